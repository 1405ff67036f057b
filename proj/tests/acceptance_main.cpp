// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Criteria 1, 2, 8 and 9 drive the installed CLI end to end;
// the rest go through the library against independent oracles.
//
// usage: acceptance <path-to-cli> <path-to-demo-config>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "attoscat/attoscat.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return status;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct AnomalyRow {
  double k_invas, tau_sc_as, q_invA, rate, rate_k0, ratio;
};

std::vector<AnomalyRow> read_anomaly_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<AnomalyRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'K') continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(cells, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() == 6) {
      rows.push_back({values[0], values[1], values[2], values[3], values[4], values[5]});
    }
  }
  return rows;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_and_2(const std::string& cli, const std::string& config,
                       const fs::path& scratch) {
  const auto cfg = attoscat::parse_config(config);
  const auto model = attoscat::realize_model(cfg);
  const auto rho = attoscat::realize_state(cfg, model);
  const attoscat::UnitsContext units;
  const double q = cfg.q_invA.front();
  const double tau = units.as_to_natural(cfg.tau_sc_as.front());

  const auto start = std::chrono::steady_clock::now();
  const fs::path log = scratch / "limits.log";
  const int status =
      run_command(cli + " limits \"" + config + "\" > \"" + log.string() + "\" 2>&1");
  const double elapsed = seconds_since(start);
  const std::string output = slurp(log);

  const auto checks = attoscat::run_limit_checks(model, rho, q, tau);

  const bool pass_a = (status == 0) && output.find("limit A") != std::string::npos &&
                      output.find("FAIL") == std::string::npos &&
                      checks.residual_a < 1e-12 && elapsed < 1.0;
  report(1, pass_a,
         "limiting case A (K->0): limits subcommand residual " +
             fmt("%.3e < 1e-12, %.2f s < 1 s", checks.residual_a, elapsed));

  const bool pass_b = (status == 0) && checks.residual_b < 1e-6 && elapsed < 1.0;
  report(2, pass_b,
         "limiting case B (K->inf): diagonal-limit residual " +
             fmt("%.3e < 1e-6 at K = %.3g", checks.residual_b, checks.k_b));
}

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(20250810);
  double worst_rate = 0.0, worst_w = 0.0;
  int models = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto rm = oracles::random_model(rng, 4, 0.3);
    const auto rate = attoscat::rate_decohered(rm.model, rm.rho, rm.q, rm.tau_sc);
    const double rate_quad =
        oracles::trapezoid_rate(rm.model, rm.rho, rm.q, rm.tau_sc, 5000);
    worst_rate = std::max(worst_rate,
                          std::abs(rate.rate - rate_quad) / std::abs(rate_quad));

    const double w = attoscat::w_exact(rm.model, rm.rho, rm.q, rm.tau_sc);
    const double w_quad =
        oracles::trapezoid_w_2d(rm.model, rm.rho, rm.q, rm.tau_sc, 2000);
    worst_w = std::max(worst_w, std::abs(w - w_quad) / std::abs(w_quad));
    ++models;
  }
  const double elapsed = seconds_since(start);
  const bool pass = models >= 20 && worst_rate < 1e-8 && worst_w < 1e-6 && elapsed < 60.0;
  report(3, pass,
         "oracle equivalence on 20 random models: rate vs 5000-node quadrature " +
             fmt("%.2e < 1e-8, W vs 2000^2 quadrature %.2e < 1e-6, %.1f s < 60 s",
                 worst_rate, worst_w, elapsed));
}

void criterion_4() {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_entry = 0.0, worst_trace = 0.0;
  int models = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> dim_dist(2, 6);
    const int d = dim_dist(rng);
    std::vector<double> energies(static_cast<size_t>(d)), lindblad(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
      energies[size_t(i)] = -0.5 + unit(rng);
      lindblad[size_t(i)] = 2.0 * unit(rng);
    }
    const auto model = attoscat::build_custom(
        energies, lindblad, 0.5 * unit(rng),
        {{0.0, attoscat::ComplexMatrix::Identity(d, d)}});
    const auto rho = oracles::random_density(rng, d);
    for (double t : {0.1, 1.0, 10.0}) {
      const auto fast = attoscat::evolve_analytic(model, rho.matrix(), t);
      const auto slow = attoscat::evolve_superop_oracle(model, rho.matrix(), t);
      worst_entry = std::max(worst_entry, (fast - slow).cwiseAbs().maxCoeff());
      worst_trace = std::max(
          worst_trace, std::abs(attoscat::trace(fast) - attoscat::Complex(1.0, 0.0)));
      worst_trace = std::max(
          worst_trace, std::abs(attoscat::trace(slow) - attoscat::Complex(1.0, 0.0)));
    }
    ++models;
  }
  const bool pass = models >= 20 && worst_entry < 1e-8 && worst_trace < 1e-10;
  report(4, pass,
         "propagator equivalence on 20 random models, t in {0.1, 1, 10}: " +
             fmt("max entry diff %.2e < 1e-8, trace drift %.2e < 1e-10", worst_entry,
                 worst_trace));
}

void criterion_5() {
  attoscat::ComplexMatrix n(2, 2);
  n << 0.8, 0.6, 0.6, 0.8;
  const auto model = attoscat::build_custom({0.0, 0.0}, {0.0, 1.0}, 0.0,
                                            {{1.0, n}, {-1.0, n.adjoint()}});
  const auto rho = attoscat::DensityMatrix::diagonal({0.7, 0.3});
  const double tau = 1.0;
  const double diag = 0.64;     // 0.8^2 (p0 + p1)
  const double offdiag = 0.36;  // 0.6^2 (p0 + p1)

  std::vector<double> k_grid;
  for (int i = 0; i < 50; ++i) k_grid.push_back(1e-3 * std::pow(10.0, 6.0 * i / 49.0));
  const auto curve = attoscat::anomaly_curve(model, rho, 1.0, tau, k_grid);

  double worst = 0.0;
  bool monotone = true;
  for (size_t i = 0; i < curve.size(); ++i) {
    const double k = curve[i].first;
    const double hand =
        (diag + offdiag * (1.0 - std::exp(-k * tau)) / (k * tau)) / (diag + offdiag);
    worst = std::max(worst, std::abs(curve[i].second - hand));
    if (i > 0 && !(curve[i].second < curve[i - 1].second)) monotone = false;
  }
  const bool pass = monotone && worst < 1e-10;
  report(5, pass,
         "restricted monotonicity on the degenerate two-level fixture: " +
             fmt("strictly decreasing over 50 log-grid points, closed-form deviation "
                 "%.2e < 1e-10",
                 worst));
}

void criterion_6() {
  attoscat::OscillatorSpec spec;
  spec.omega = 1.0;
  spec.mass = 1.0;
  spec.dim = 40;
  const double y = 0.5;
  const double q = std::sqrt(2.0 * y);
  const auto model = attoscat::build_oscillator(spec, {q});
  const auto rho = attoscat::thermal_state(model, 1e9);

  const int n_tau = 241;
  const double tau_max = 60.0;
  std::vector<double> grid(static_cast<size_t>(n_tau));
  for (int i = 0; i < n_tau; ++i) grid[size_t(i)] = tau_max * i / (n_tau - 1);
  const auto series = attoscat::intermediate_function(model, rho, q, grid);
  const auto spectrum = attoscat::dynamic_structure_factor(
      series, attoscat::SpectralWindow::gaussian(10.0));

  const double d_omega = spectrum.omegas[1] - spectrum.omegas[0];
  double worst_peak = 0.0;
  double expected = std::exp(-y);
  for (int n = 0; n <= 4; ++n) {
    double weight = 0.0;
    for (size_t i = 0; i < spectrum.omegas.size(); ++i) {
      if (std::abs(spectrum.omegas[i] - n) <= 0.5) {
        weight += spectrum.s_values[i] * d_omega;
      }
    }
    worst_peak = std::max(worst_peak, std::abs(weight - expected) / expected);
    expected *= y / (n + 1);
  }

  double total = 0.0;
  for (double s : spectrum.s_values) total += s * d_omega;
  const double sum_rule =
      std::abs(total - series.values[0].real()) / series.values[0].real();

  const bool pass = worst_peak < 0.02 && sum_rule < 1e-3;
  report(6, pass,
         "oscillator spectroscopy: Poisson peak deviation " +
             fmt("%.3f%% < 2%%, sum rule residual %.2e < 1e-3", 100.0 * worst_peak,
                 sum_rule));
}

void criterion_7(const std::string& config) {
  const double width10 = attoscat::scattering_time_width(10.0);
  const double transit = attoscat::transit_time(10.0, 1e-5);
  const double radius = attoscat::causal_radius(1e-19);
  const double ml10 = attoscat::margolus_levitin(10.0);

  const auto cfg = attoscat::parse_config(config);
  const double ml_cfg = attoscat::margolus_levitin(cfg.timescales.Es_eV);
  const double width_cfg = attoscat::scattering_time_width(cfg.timescales.deltaE_eV);
  const double transit_cfg =
      attoscat::transit_time(cfg.timescales.E0_eV, cfg.timescales.range_A);

  const bool width_ok = width10 >= 1e-17 && width10 <= 1e-16;
  const bool transit_ok = transit >= 1e-20 && transit <= 1e-18;
  const bool radius_ok = std::abs(radius - 0.30) <= 0.02 * 0.30;
  const bool ml_ok = ml10 >= 0.9e-16 && ml10 <= 1.2e-16;
  const bool ordering_ok = transit_cfg < ml_cfg && ml_cfg <= width_cfg;

  const bool pass = width_ok && transit_ok && radius_ok && ml_ok && ordering_ok;
  report(7, pass,
         "timescales: width(10 eV) = " +
             fmt("%.3e s, transit = %.3e s, radius(1e-19 s) = %.4f A", width10, transit,
                 radius) +
             fmt(", ML(10 eV) = %.3e s; demo ordering transit < ML <= width ", ml10) +
             (ordering_ok ? "holds" : "VIOLATED"));
}

void criterion_8_and_9(const std::string& cli, const std::string& config,
                       const fs::path& scratch) {
  const fs::path out_a = scratch / "run_a";
  const fs::path out_b = scratch / "run_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);

  const auto start = std::chrono::steady_clock::now();
  const int status_a = run_command(cli + " run \"" + config + "\" --out-dir \"" +
                                   out_a.string() + "\" > \"" +
                                   (scratch / "run_a.log").string() + "\" 2>&1");
  const double elapsed = seconds_since(start);
  const int status_b = run_command(cli + " run \"" + config + "\" --out-dir \"" +
                                   out_b.string() + "\" > \"" +
                                   (scratch / "run_b.log").string() + "\" 2>&1");

  // --- criterion 8: anomaly demonstration ---
  bool pass_8 = (status_a == 0);
  std::string detail_8 = "demo run failed";
  if (pass_8) {
    const auto rows = read_anomaly_csv(out_a / "anomaly.csv");
    // global minimum over the scanned (q, tau_sc, K) grid
    double best_ratio = 2.0;
    double best_k = 0.0, best_tau = 0.0, best_q = 0.0;
    for (const auto& row : rows) {
      if (row.ratio < best_ratio) {
        best_ratio = row.ratio;
        best_k = row.k_invas;
        best_tau = row.tau_sc_as;
        best_q = row.q_invA;
      }
    }
    const double k_inv_as = best_k > 0.0 ? 1.0 / best_k : 0.0;
    const bool in_bracket = best_ratio >= 0.6 && best_ratio <= 0.8;
    const bool k_matched =
        best_k > 0.0 && k_inv_as >= best_tau / 3.0 && k_inv_as <= 3.0 * best_tau;
    pass_8 = in_bracket && k_matched && elapsed < 120.0;
    detail_8 = "anomaly demonstration: min ratio " +
               fmt("%.4f in [0.6, 0.8] at q = %.3g 1/A, 1/K = %.4g as", best_ratio,
                   best_q, k_inv_as) +
               fmt(" vs tau_sc = %.4g as (factor %.2f <= 3), ", best_tau,
                   std::max(k_inv_as / best_tau, best_tau / k_inv_as)) +
               fmt("%.1f s < 120 s", elapsed);
  }
  report(8, pass_8, detail_8);

  // --- criterion 9: determinism and schema ---
  bool pass_9 = (status_a == 0) && (status_b == 0);
  std::string mismatch;
  for (const char* name :
       {"anomaly.csv", "rates.csv", "sqw.csv", "correlation.csv", "timescales.csv"}) {
    if (!fs::exists(out_a / name) || slurp(out_a / name) != slurp(out_b / name)) {
      pass_9 = false;
      mismatch = name;
      break;
    }
  }
  std::string header_line, schema_line;
  {
    std::ifstream in(out_a / "anomaly.csv");
    std::getline(in, schema_line);
    std::getline(in, header_line);
  }
  const bool header_ok = header_line == attoscat::kAnomalyHeader &&
                         schema_line == std::string("# schema: ") + attoscat::kAnomalySchema;
  pass_9 = pass_9 && header_ok;
  report(9, pass_9,
         std::string("determinism and schema: consecutive runs byte-identical") +
             (mismatch.empty() ? "" : " EXCEPT " + mismatch) +
             ", anomaly.csv header " + (header_ok ? "pinned" : "MISMATCH"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <path-to-cli> <path-to-demo-config>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::string config = argv[2];
  const fs::path scratch = "acceptance_scratch";
  fs::create_directories(scratch);

  try {
    criterion_1_and_2(cli, config, scratch);
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(config);
    criterion_8_and_9(cli, config, scratch);
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << "\n";
    return 2;
  }

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
