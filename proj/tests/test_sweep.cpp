#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "attoscat/sweep.hpp"

namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::path("test_scratch") / "sweep";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kSmallSweep =
    "[model]\n"
    "type = oscillator\n"
    "dim = 16\n"
    "omega_eV = 0.1\n"
    "mass_amu = 1.007276467\n"
    "[state]\n"
    "type = thermal\n"
    "beta_inv_eV = 1e6\n"
    "[sweep]\n"
    "q_invA = 2.0, 3.0\n"
    "tau_sc_as = 658.2119569\n"
    "k_invas = 0, logspace(1e-5, 3.8e-3, 5)\n"
    "[outputs]\n"
    "kinds = anomaly, rates\n";

}  // namespace

TEST_CASE("run_sweep writes schema-pinned CSV outputs") {
  const auto cfg_path = write_config("small.cfg", kSmallSweep);
  const auto cfg = attoscat::parse_config(cfg_path.string());

  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_a";
  options.config_path = cfg_path.string();
  fs::remove_all(options.out_dir);
  const auto manifest = attoscat::run_sweep(cfg, options);

  const fs::path out(options.out_dir);
  REQUIRE(fs::exists(out / "anomaly.csv"));
  REQUIRE(fs::exists(out / "rates.csv"));
  REQUIRE(fs::exists(out / "manifest.txt"));

  const std::string anomaly = slurp(out / "anomaly.csv");
  std::istringstream lines(anomaly);
  std::string schema_line, header_line;
  std::getline(lines, schema_line);
  std::getline(lines, header_line);
  CHECK(schema_line == std::string("# schema: ") + attoscat::kAnomalySchema);
  CHECK(header_line == attoscat::kAnomalyHeader);

  // 2 q x 1 tau x 6 K rows plus schema and header lines
  CHECK(std::count(anomaly.begin(), anomaly.end(), '\n') == 2 + 2 * 6);
  CHECK(anomaly.find("\r") == std::string::npos);  // LF only

  // manifest lists both outputs
  const std::string mf = slurp(out / "manifest.txt");
  CHECK(mf.find("anomaly.csv") != std::string::npos);
  CHECK(mf.find("rates.csv") != std::string::npos);
  CHECK(manifest.output_files.size() == 2);

  SECTION("reruns are byte-identical") {
    attoscat::RunOptions again = options;
    again.out_dir = "test_scratch/sweep/out_b";
    fs::remove_all(again.out_dir);
    attoscat::run_sweep(cfg, again);
    CHECK(slurp(out / "anomaly.csv") == slurp(fs::path(again.out_dir) / "anomaly.csv"));
    CHECK(slurp(out / "rates.csv") == slurp(fs::path(again.out_dir) / "rates.csv"));
  }

  SECTION("threads do not change the bytes") {
    attoscat::RunOptions threaded = options;
    threaded.out_dir = "test_scratch/sweep/out_threads";
    threaded.threads = 4;
    fs::remove_all(threaded.out_dir);
    attoscat::run_sweep(cfg, threaded);
    CHECK(slurp(out / "anomaly.csv") ==
          slurp(fs::path(threaded.out_dir) / "anomaly.csv"));
  }

  SECTION("summary tracks the grid minimum") {
    CHECK(manifest.summary.min_ratio <= 1.0 + 1e-12);
    CHECK(manifest.summary.min_ratio > 0.0);
    CHECK(manifest.summary.max_ratio == 1.0);  // the K = 0 row
    const std::string report = attoscat::summarize(manifest);
    CHECK(report.find("min ratio") != std::string::npos);
  }
}

TEST_CASE("single-point K = 0 sweep reports ratio exactly 1") {
  const auto cfg_path = write_config("k0.cfg",
      "[model]\n"
      "type = oscillator\n"
      "dim = 12\n"
      "omega_eV = 0.1\n"
      "mass_amu = 1.007276467\n"
      "[state]\n"
      "type = thermal\n"
      "beta_inv_eV = 1e6\n"
      "[sweep]\n"
      "q_invA = 2.0\n"
      "tau_sc_as = 658.2119569\n"
      "k_invas = 0\n"
      "[outputs]\n"
      "kinds = anomaly\n");
  const auto cfg = attoscat::parse_config(cfg_path.string());
  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_k0";
  fs::remove_all(options.out_dir);
  const auto manifest = attoscat::run_sweep(cfg, options);
  CHECK(manifest.summary.min_ratio == 1.0);
  const std::string report = attoscat::summarize(manifest);
  CHECK(report.find("min ratio = 1.000000") != std::string::npos);
}

TEST_CASE("failing grid points carry their coordinates") {
  const auto cfg_path = write_config("badq.cfg",
      "[model]\n"
      "type = custom\n"
      "dim = 2\n"
      "energies_eV = 0, 0\n"
      "lindblad_values = 0, 1\n"
      "n_q = 1.0 : (0.8,0) (0.6,0) ; (0.6,0) (0.8,0)\n"
      "[state]\n"
      "type = diagonal\n"
      "populations = 1, 0\n"
      "[sweep]\n"
      "q_invA = 2.0, 3.0\n"  // neither q is present in the custom model
      "tau_sc_as = 658.2119569\n"
      "k_invas = 0\n"
      "[outputs]\n"
      "kinds = anomaly\n");
  const auto cfg = attoscat::parse_config(cfg_path.string());
  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_bad";
  fs::remove_all(options.out_dir);
  try {
    attoscat::run_sweep(cfg, options);
    FAIL("expected a runtime_error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    // one diagnostic per failed point
    CHECK(what.find("grid point (q=2") != std::string::npos);
    CHECK(what.find("grid point (q=3") != std::string::npos);
  }
}

TEST_CASE("timescale table derives v0 from the model") {
  const auto cfg_path = write_config("ts.cfg",
      "[model]\n"
      "type = oscillator\n"
      "dim = 16\n"
      "omega_eV = 0.1\n"
      "mass_amu = 1.007276467\n"
      "[state]\n"
      "type = thermal\n"
      "beta_inv_eV = 1e6\n"
      "[sweep]\n"
      "q_invA = 2.0\n"
      "tau_sc_as = 658.2119569\n"
      "k_invas = 0\n"
      "[outputs]\n"
      "kinds = timescales\n"
      "[timescales]\n"
      "q_invA = 100\n"
      "deltaE_eV = 10\n"
      "Es_eV = 30\n"
      "E0_eV = 10\n"
      "range_A = 1e-5\n");
  const auto cfg = attoscat::parse_config(cfg_path.string());
  const auto table = attoscat::compute_timescales(cfg);

  double v0 = 0.0, tau_ia = 0.0, product = 0.0;
  for (const auto& [name, value, unit] : table) {
    if (name == "v0_rms") v0 = value;
    if (name == "tau_sc_ia") tau_ia = value;
    if (name == "tau_ia_q_v0") product = value;
  }
  // T = 0 proton in a 0.1 eV well: v0 = sqrt(omega/(2m)) natural
  const attoscat::UnitsContext units;
  const double m = units.amu_to_natural_mass(1.007276467);
  const double expected_v0 = units.natural_to_A_per_s(std::sqrt(0.1 / (2.0 * m)));
  CHECK(v0 == Catch::Approx(expected_v0).epsilon(1e-9));
  CHECK(product == Catch::Approx(1.0).epsilon(1e-12));
  // the IA time lands in the 100-1000 as window for these kinematics
  CHECK(tau_ia > 100e-18);
  CHECK(tau_ia < 1000e-18);

  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_ts";
  options.config_path = cfg_path.string();
  fs::remove_all(options.out_dir);
  const auto manifest = attoscat::run_sweep(cfg, options);
  CHECK(fs::exists(fs::path(options.out_dir) / "timescales.csv"));
  const std::string report = attoscat::summarize(manifest);
  CHECK(report.find("tau_sc * q * v0") != std::string::npos);
}

TEST_CASE("huge K grids trigger the limiting-case-B report line") {
  const auto cfg_path = write_config("bigk.cfg",
      "[model]\n"
      "type = oscillator\n"
      "dim = 12\n"
      "omega_eV = 0.1\n"
      "mass_amu = 1.007276467\n"
      "[state]\n"
      "type = thermal\n"
      "beta_inv_eV = 1e6\n"
      "[sweep]\n"
      "q_invA = 2.0\n"
      "tau_sc_as = 658.2119569\n"
      "k_invas = 0, 2000\n"  // K_max tau_sc ~ 1.3e6 in natural units
      "[outputs]\n"
      "kinds = anomaly\n");
  const auto cfg = attoscat::parse_config(cfg_path.string());
  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_bigk";
  fs::remove_all(options.out_dir);
  const auto manifest = attoscat::run_sweep(cfg, options);
  REQUIRE(manifest.summary.limit_checks_run);
  CHECK(manifest.summary.limit_b_residual < 1e-6);
  CHECK(attoscat::summarize(manifest).find("limiting-case-B residual") !=
        std::string::npos);
}

TEST_CASE("tolerance report runs the limiting-case checks") {
  const auto cfg_path = write_config("tol.cfg", kSmallSweep);
  const auto cfg = attoscat::parse_config(cfg_path.string());
  attoscat::RunOptions options;
  options.out_dir = "test_scratch/sweep/out_tol";
  options.tolerance_report = true;
  fs::remove_all(options.out_dir);
  const auto manifest = attoscat::run_sweep(cfg, options);
  REQUIRE(manifest.summary.limit_checks_run);
  CHECK(manifest.summary.limit_a_residual < 1e-12);
  CHECK(manifest.summary.limit_b_residual < 1e-6);
  const std::string report = attoscat::summarize(manifest);
  CHECK(report.find("limiting-case-A residual") != std::string::npos);
  CHECK(report.find("limiting-case-B residual") != std::string::npos);
}
