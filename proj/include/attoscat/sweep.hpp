#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "attoscat/config.hpp"
#include "attoscat/model.hpp"
#include "attoscat/scattering.hpp"
#include "attoscat/timescales.hpp"
#include "attoscat/units.hpp"
#include "attoscat/version.hpp"

// Scenario runner behind the CLI: realizes the configured model and state,
// sweeps (q, tau_sc, K), and serializes CSV files plus a manifest. Grid
// points are pure computations, so workers share nothing and rows are always
// written in grid order; identical configs give byte-identical CSVs.

namespace attoscat {

struct RunOptions {
  std::string out_dir = "out";
  int threads = 1;
  bool tolerance_report = false;
  std::string config_path;
};

struct RunSummary {
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  double argmin_k_invas = 0.0;
  double argmin_tau_as = 0.0;
  double argmin_q = 0.0;
  std::vector<std::pair<double, double>> tau_qv;  // (tau_sc_as, tau_s * q * v0)
  bool have_tau_qv = false;
  bool limit_checks_run = false;
  double limit_a_residual = 0.0;
  double limit_b_residual = 0.0;
  double limit_b_k_natural = 0.0;
};

struct RunManifest {
  std::string tool_version;
  std::string config_path;
  std::string config_hash;
  std::string started_utc;
  std::string finished_utc;
  std::string out_dir;
  std::vector<std::string> output_files;
  std::vector<std::string> applied_defaults;
  RunSummary summary;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "-";
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Locale-independent, round-trippable number formatting for CSV cells.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& schema,
          const std::string& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file " + path.string());
    out_ << "# schema: " << schema << "\n" << header << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() { out_.close(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace detail

inline constexpr const char* kAnomalySchema = "attoscat.anomaly.v1";
inline constexpr const char* kAnomalyHeader = "K,tau_sc_as,q_invA,rate,rate_k0,ratio";
inline constexpr const char* kRatesSchema = "attoscat.rates.v1";
inline constexpr const char* kRatesHeader =
    "q_invA,tau_sc_as,K,w_total,rate,rate_k0,ratio";
inline constexpr const char* kSqwSchema = "attoscat.sqw.v1";
inline constexpr const char* kSqwHeader = "q_invA,omega_eV,S";
inline constexpr const char* kCorrelationSchema = "attoscat.correlation.v1";
inline constexpr const char* kCorrelationHeader = "q_invA,tau_as,F_re,F_im";
inline constexpr const char* kTimescalesSchema = "attoscat.timescales.v1";
inline constexpr const char* kTimescalesHeader = "quantity,value,unit";

/// Construct the ModelSystem described by a parsed config, in natural units.
inline ModelSystem realize_model(const SweepConfig& cfg, const UnitsContext& units = {}) {
  const double k_natural = units.inverse_as_to_natural_rate(cfg.model.decoherence_K_invas);
  if (cfg.model.type == "oscillator") {
    OscillatorSpec spec;
    spec.omega = cfg.model.omega_eV;
    spec.mass = units.amu_to_natural_mass(cfg.model.mass_amu);
    spec.dim = cfg.model.dim;
    spec.coupling = (cfg.model.lindblad_variable == "energy")
                        ? LindbladCoupling::EnergyValue
                        : LindbladCoupling::BasisIndex;
    return build_oscillator(spec, cfg.q_invA, k_natural, cfg.model.coupling_lambda);
  }
  if (static_cast<int>(cfg.model.energies_eV.size()) != cfg.model.dim) {
    throw ConfigError("config: key 'energies_eV' in section [model] must list exactly "
                      "dim values");
  }
  // Supply the conjugate-transpose partner for any q listed without its -q.
  std::map<double, ComplexMatrix> n_matrices = cfg.model.n_matrices;
  for (const auto& [q, m] : cfg.model.n_matrices) {
    if (!n_matrices.count(-q)) n_matrices.emplace(-q, m.adjoint());
  }
  return build_custom(cfg.model.energies_eV, cfg.model.lindblad_values, k_natural,
                      std::move(n_matrices), cfg.model.coupling_lambda);
}

inline DensityMatrix realize_state(const SweepConfig& cfg, const ModelSystem& model) {
  if (cfg.state.type == "thermal") {
    return thermal_state(model, cfg.state.beta_inv_eV);
  }
  if (static_cast<int>(cfg.state.populations.size()) != model.dim) {
    throw ConfigError("config: key 'populations' in section [state] must list exactly "
                      "dim values");
  }
  return DensityMatrix::diagonal(cfg.state.populations);
}

/// rms velocity used in the IA estimate, angstrom/s: configured override or
/// derived from the oscillator model at the configured temperature.
inline double realize_v0_A_per_s(const SweepConfig& cfg, const UnitsContext& units = {}) {
  if (!cfg.timescales.v0_auto) return cfg.timescales.v0_A_per_s;
  if (cfg.model.type != "oscillator") {
    throw ConfigError("config: v0_A_per_s = auto requires an oscillator model; supply "
                      "a numeric value in [timescales]");
  }
  OscillatorSpec spec;
  spec.omega = cfg.model.omega_eV;
  spec.mass = units.amu_to_natural_mass(cfg.model.mass_amu);
  spec.dim = cfg.model.dim;
  const double beta = (cfg.state.type == "thermal") ? cfg.state.beta_inv_eV : 1e9;
  const double v_natural = oscillator_rms_velocity(spec, beta);
  if (!std::isfinite(v_natural) || !(v_natural > 0.0)) {
    throw ConfigError("config: rms velocity from the model is not finite; supply "
                      "v0_A_per_s in [timescales]");
  }
  return units.natural_to_A_per_s(v_natural);
}

/// The full estimator table for the configured kinematics.
inline std::vector<std::tuple<std::string, double, std::string>> compute_timescales(
    const SweepConfig& cfg, const UnitsContext& units = {}) {
  const auto& kin = cfg.timescales;
  const double v0 = realize_v0_A_per_s(cfg, units);
  const double tau_ia = scattering_time_ia(kin.q_invA, v0);
  const double tau_width = scattering_time_width(kin.deltaE_eV, units);
  const double t_perp = margolus_levitin(kin.Es_eV, units);
  const double tau_act = transit_time(kin.E0_eV, kin.range_A, units);
  const double radius = causal_radius(tau_act, units);
  return {
      {"v0_rms", v0, "A/s"},
      {"tau_sc_ia", tau_ia, "s"},
      {"tau_sc_width", tau_width, "s"},
      {"margolus_levitin", t_perp, "s"},
      {"transit_time", tau_act, "s"},
      {"causal_radius", radius, "A"},
      {"tau_ia_q_v0", tau_ia * kin.q_invA * v0, "1"},
  };
}

struct LimitCheckResult {
  double rate_k0 = 0.0;
  double rate_standard_spectral = 0.0;
  double residual_a = 0.0;  // |rate(K=0) - spectral standard| / |spectral standard|
  double k_b = 0.0;         // 1e8 / (min dxi^2 * tau_sc), natural units
  double rate_kb = 0.0;
  double rate_diagonal_limit = 0.0;
  double residual_b = 0.0;
};

/// Independent spectral-sum evaluation of the K = 0 standard rate, using only
/// real trigonometric arithmetic per pair (no complex exponentials).
inline double standard_rate_spectral_sum(const ModelSystem& model,
                                         const DensityMatrix& rho, double q,
                                         double tau_sc) {
  const ComplexMatrix& n_minus = model.n_q(-q);
  const ComplexMatrix n_rho = matmul(model.n_q(q), rho.matrix());
  double acc = 0.0;
  for (int i = 0; i < model.dim; ++i) {
    for (int j = 0; j < model.dim; ++j) {
      const Complex m = n_minus(i, j) * n_rho(j, i);
      const double de = model.energies[static_cast<size_t>(j)] -
                        model.energies[static_cast<size_t>(i)];
      if (de == 0.0) {
        acc += m.real() * tau_sc;
      } else {
        const double theta = de * tau_sc;
        const double s = std::sin(theta) / de;
        const double half = std::sin(0.5 * theta);
        const double versine = 2.0 * half * half / de;  // (1 - cos theta)/de
        acc += m.real() * s + m.imag() * versine;
      }
    }
  }
  return 2.0 * model.coupling_lambda * model.coupling_lambda * acc;
}

/// Limiting cases of the decohered rate: (A) K -> 0 reproduces the standard
/// spectral-sum rate; (B) K -> infinity leaves only the diagonal sum
/// 2 lambda^2 tau_sc sum_xi M_xi_xi.
inline LimitCheckResult run_limit_checks(const ModelSystem& model,
                                         const DensityMatrix& rho, double q,
                                         double tau_sc) {
  LimitCheckResult out;

  ModelSystem zero_k = model;
  zero_k.decoherence_k = 0.0;
  out.rate_k0 = rate_decohered(zero_k, rho, q, tau_sc).rate;
  out.rate_standard_spectral = standard_rate_spectral_sum(model, rho, q, tau_sc);
  out.residual_a = std::abs(out.rate_k0 - out.rate_standard_spectral) /
                   std::abs(out.rate_standard_spectral);

  out.k_b = 1e8 / (model.min_nonzero_lindblad_gap_sq() * tau_sc);
  ModelSystem big_k = model;
  big_k.decoherence_k = out.k_b;
  out.rate_kb = rate_decohered(big_k, rho, q, tau_sc).rate;

  const ComplexMatrix& n_minus = model.n_q(-q);
  const ComplexMatrix n_rho = matmul(model.n_q(q), rho.matrix());
  Complex diag_sum(0.0, 0.0);
  for (int i = 0; i < model.dim; ++i) diag_sum += n_minus(i, i) * n_rho(i, i);
  out.rate_diagonal_limit =
      2.0 * model.coupling_lambda * model.coupling_lambda * tau_sc * diag_sum.real();
  out.residual_b =
      std::abs(out.rate_kb - out.rate_diagonal_limit) / std::abs(out.rate_diagonal_limit);
  return out;
}

inline RunManifest run_sweep(const SweepConfig& cfg, const RunOptions& options) {
  namespace fs = std::filesystem;
  const UnitsContext units;

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.config_path = options.config_path;
  manifest.config_hash =
      options.config_path.empty() ? "-" : detail::file_hash(options.config_path);
  manifest.started_utc = detail::utc_now();
  manifest.out_dir = options.out_dir;
  manifest.applied_defaults = cfg.applied_defaults;

  const ModelSystem model = realize_model(cfg, units);
  const DensityMatrix rho = realize_state(cfg, model);

  std::vector<double> k_natural(cfg.k_invas.size());
  for (size_t i = 0; i < cfg.k_invas.size(); ++i) {
    k_natural[i] = units.inverse_as_to_natural_rate(cfg.k_invas[i]);
  }
  std::vector<double> tau_natural(cfg.tau_sc_as.size());
  for (size_t i = 0; i < cfg.tau_sc_as.size(); ++i) {
    tau_natural[i] = units.as_to_natural(cfg.tau_sc_as[i]);
  }

  // One task per (q, tau_sc); each fills its K rows independently.
  struct Task {
    size_t iq, itau;
    std::vector<RateResult> rows;
    std::string error;
  };
  std::vector<Task> tasks;
  for (size_t iq = 0; iq < cfg.q_invA.size(); ++iq) {
    for (size_t itau = 0; itau < cfg.tau_sc_as.size(); ++itau) {
      tasks.push_back({iq, itau, {}, {}});
    }
  }

  const int n_workers =
      std::max(1, std::min<int>(options.threads, static_cast<int>(tasks.size())));
  std::atomic<size_t> next_task{0};
  auto worker = [&] {
    for (size_t idx = next_task.fetch_add(1); idx < tasks.size();
         idx = next_task.fetch_add(1)) {
      Task& task = tasks[idx];
      const double q = cfg.q_invA[task.iq];
      const double tau = tau_natural[task.itau];
      for (double k : k_natural) {
        try {
          task.rows.push_back(rate_decohered(model, rho, q, tau, k));
        } catch (const std::exception& e) {
          std::ostringstream msg;
          msg << "grid point (q=" << q << " 1/A, tau_sc=" << cfg.tau_sc_as[task.itau]
              << " as, K=" << units.natural_rate_to_inverse_as(k)
              << " 1/as): " << e.what();
          task.error = msg.str();
          break;
        }
      }
    }
  };
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::string diagnostics;
  for (const Task& task : tasks) {
    if (!task.error.empty()) {
      if (!diagnostics.empty()) diagnostics += '\n';
      diagnostics += task.error;
    }
  }
  if (!diagnostics.empty()) throw std::runtime_error(diagnostics);

  fs::create_directories(options.out_dir);
  const fs::path out_dir(options.out_dir);
  auto record_file = [&manifest](const detail::CsvFile& file) {
    manifest.output_files.push_back(file.path().filename().string());
  };

  RunSummary& summary = manifest.summary;
  bool first_row = true;
  for (const Task& task : tasks) {
    for (size_t ik = 0; ik < task.rows.size(); ++ik) {
      const RateResult& r = task.rows[ik];
      if (first_row || r.anomaly_ratio < summary.min_ratio) {
        summary.min_ratio = r.anomaly_ratio;
        summary.argmin_k_invas = cfg.k_invas[ik];
        summary.argmin_tau_as = cfg.tau_sc_as[task.itau];
        summary.argmin_q = cfg.q_invA[task.iq];
      }
      summary.max_ratio =
          first_row ? r.anomaly_ratio : std::max(summary.max_ratio, r.anomaly_ratio);
      first_row = false;
    }
  }

  if (cfg.wants("anomaly")) {
    detail::CsvFile anomaly(out_dir / "anomaly.csv", kAnomalySchema, kAnomalyHeader);
    for (const Task& task : tasks) {
      for (size_t ik = 0; ik < task.rows.size(); ++ik) {
        const RateResult& r = task.rows[ik];
        anomaly.row({detail::fmt(cfg.k_invas[ik]), detail::fmt(cfg.tau_sc_as[task.itau]),
                     detail::fmt(cfg.q_invA[task.iq]), detail::fmt(r.rate),
                     detail::fmt(r.rate_decoherence_free),
                     detail::fmt(r.anomaly_ratio)});
      }
    }
    anomaly.close();
    record_file(anomaly);
  }

  if (cfg.wants("rates")) {
    detail::CsvFile rates(out_dir / "rates.csv", kRatesSchema, kRatesHeader);
    for (const Task& task : tasks) {
      for (size_t ik = 0; ik < task.rows.size(); ++ik) {
        const RateResult& r = task.rows[ik];
        rates.row({detail::fmt(cfg.q_invA[task.iq]), detail::fmt(cfg.tau_sc_as[task.itau]),
                   detail::fmt(cfg.k_invas[ik]), detail::fmt(r.w_total),
                   detail::fmt(r.rate), detail::fmt(r.rate_decoherence_free),
                   detail::fmt(r.anomaly_ratio)});
      }
    }
    rates.close();
    record_file(rates);
  }

  if (cfg.wants("sqw")) {
    detail::CsvFile sqw(out_dir / "sqw.csv", kSqwSchema, kSqwHeader);
    const double tau_max = units.as_to_natural(cfg.sqw.tau_max_as);
    std::vector<double> grid(static_cast<size_t>(cfg.sqw.n_tau));
    for (int i = 0; i < cfg.sqw.n_tau; ++i) {
      grid[static_cast<size_t>(i)] = tau_max * i / (cfg.sqw.n_tau - 1);
    }
    const SpectralWindow window =
        cfg.sqw.window_sigma_as > 0.0
            ? SpectralWindow::gaussian(units.as_to_natural(cfg.sqw.window_sigma_as))
            : SpectralWindow::none();
    for (double q : cfg.q_invA) {
      const auto series = intermediate_function(model, rho, q, grid);
      const auto spectrum = dynamic_structure_factor(series, window);
      for (size_t i = 0; i < spectrum.omegas.size(); ++i) {
        sqw.row({detail::fmt(q), detail::fmt(spectrum.omegas[i]),
                 detail::fmt(spectrum.s_values[i])});
      }
    }
    sqw.close();
    record_file(sqw);
  }

  if (cfg.wants("correlation")) {
    detail::CsvFile corr(out_dir / "correlation.csv", kCorrelationSchema,
                         kCorrelationHeader);
    const double tau_max = units.as_to_natural(cfg.correlation.tau_max_as);
    std::vector<double> grid(static_cast<size_t>(cfg.correlation.n_tau));
    for (int i = 0; i < cfg.correlation.n_tau; ++i) {
      grid[static_cast<size_t>(i)] = tau_max * i / (cfg.correlation.n_tau - 1);
    }
    for (double q : cfg.q_invA) {
      const auto series = intermediate_function(model, rho, q, grid);
      for (size_t i = 0; i < series.taus.size(); ++i) {
        corr.row({detail::fmt(q), detail::fmt(units.natural_to_as(series.taus[i])),
                  detail::fmt(series.values[i].real()),
                  detail::fmt(series.values[i].imag())});
      }
    }
    corr.close();
    record_file(corr);
  }

  if (cfg.wants("timescales")) {
    detail::CsvFile ts(out_dir / "timescales.csv", kTimescalesSchema, kTimescalesHeader);
    for (const auto& [name, value, unit] : compute_timescales(cfg, units)) {
      ts.row({name, detail::fmt(value), unit});
    }
    ts.close();
    record_file(ts);
  }

  // IA consistency: tau_sc * q * v0 for every swept tau_sc at the kinematics q.
  if (cfg.wants("timescales")) {
    const double v0 = realize_v0_A_per_s(cfg, units);
    for (double tau_as : cfg.tau_sc_as) {
      const double product =
          UnitsContext::as_to_s(tau_as) * cfg.timescales.q_invA * v0;
      summary.tau_qv.emplace_back(tau_as, product);
    }
    summary.have_tau_qv = true;
  }

  // Limit-case residuals, on the first grid point. Models with a fully
  // degenerate Lindblad spectrum have no K -> infinity limit to check.
  const double k_max_natural = k_natural.empty() ? 0.0 : k_natural.back();
  const double tau0 = tau_natural.front();
  try {
    if (options.tolerance_report ||
        k_max_natural >= 1e6 / (model.min_nonzero_lindblad_gap_sq() * tau0)) {
      const auto checks = run_limit_checks(model, rho, cfg.q_invA.front(), tau0);
      summary.limit_checks_run = true;
      summary.limit_a_residual = checks.residual_a;
      summary.limit_b_residual = checks.residual_b;
      summary.limit_b_k_natural = checks.k_b;
    }
  } catch (const std::runtime_error&) {
    if (options.tolerance_report) throw;
  }

  manifest.finished_utc = detail::utc_now();

  // Write the manifest and verify every listed output is present and non-empty.
  {
    std::ofstream mf(out_dir / "manifest.txt", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot open manifest.txt for writing");
    mf << "tool: attoscat " << manifest.tool_version << "\n";
    mf << "config: " << manifest.config_path << "\n";
    mf << "config_hash: " << manifest.config_hash << "\n";
    mf << "started: " << manifest.started_utc << "\n";
    mf << "finished: " << manifest.finished_utc << "\n";
    mf << "grid: q=" << cfg.q_invA.size() << " tau_sc=" << cfg.tau_sc_as.size()
       << " K=" << cfg.k_invas.size() << "\n";
    for (const auto& d : manifest.applied_defaults) mf << "default: " << d << "\n";
    for (const auto& f : manifest.output_files) {
      const auto size = fs::file_size(out_dir / f);
      if (size == 0) throw std::runtime_error("output file is empty: " + f);
      mf << "output: " << f << " (" << size << " bytes)\n";
    }
  }

  return manifest;
}

/// Human-readable run report.
inline std::string summarize(const RunManifest& manifest) {
  std::ostringstream out;
  out << "attoscat " << manifest.tool_version << " run summary\n";
  out << "  config hash : " << manifest.config_hash << "\n";
  out << "  outputs     : " << manifest.out_dir << " (";
  for (size_t i = 0; i < manifest.output_files.size(); ++i) {
    if (i) out << ", ";
    out << manifest.output_files[i];
  }
  out << ")\n";
  char line[256];
  std::snprintf(line, sizeof(line),
                "  min ratio = %.6f at K = %.6g 1/as, tau_sc = %.6g as, q = %.6g 1/A\n",
                manifest.summary.min_ratio, manifest.summary.argmin_k_invas,
                manifest.summary.argmin_tau_as, manifest.summary.argmin_q);
  out << line;
  std::snprintf(line, sizeof(line), "  max ratio = %.6f\n", manifest.summary.max_ratio);
  out << line;
  if (manifest.summary.have_tau_qv) {
    for (const auto& [tau_as, product] : manifest.summary.tau_qv) {
      std::snprintf(line, sizeof(line),
                    "  tau_sc * q * v0 = %.4f at tau_sc = %.6g as\n", product, tau_as);
      out << line;
    }
  }
  if (manifest.summary.limit_checks_run) {
    std::snprintf(line, sizeof(line),
                  "  limiting-case-A residual = %.3e (K=0 vs spectral standard)\n",
                  manifest.summary.limit_a_residual);
    out << line;
    std::snprintf(line, sizeof(line),
                  "  limiting-case-B residual = %.3e at K = %.6g (diagonal limit)\n",
                  manifest.summary.limit_b_residual, manifest.summary.limit_b_k_natural);
    out << line;
  }
  return out.str();
}

}  // namespace attoscat
