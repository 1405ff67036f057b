// Batch front end: runs configured sweeps, prints the timescale estimator
// table, and performs the limiting-case self checks.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "attoscat/attoscat.hpp"

namespace {

int cmd_validate(const std::string& config_path) {
  const auto cfg = attoscat::parse_config(config_path);
  const auto model = attoscat::realize_model(cfg);
  const auto rho = attoscat::realize_state(cfg, model);
  (void)rho;
  std::cout << "config OK: " << config_path << "\n";
  std::cout << "  model: " << cfg.model.type << ", dim " << model.dim << "\n";
  std::cout << "  state: " << cfg.state.type << "\n";
  std::cout << "  sweep: " << cfg.q_invA.size() << " q x " << cfg.tau_sc_as.size()
            << " tau_sc x " << cfg.k_invas.size() << " K\n";
  std::cout << "  outputs:";
  for (const auto& kind : cfg.outputs) std::cout << " " << kind;
  std::cout << "\n";
  for (const auto& d : cfg.applied_defaults) std::cout << "  default applied: " << d << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const attoscat::RunOptions& options) {
  const auto cfg = attoscat::parse_config(config_path);
  const auto manifest = attoscat::run_sweep(cfg, options);
  std::cout << attoscat::summarize(manifest);
  return 0;
}

int cmd_timescales(const std::string& config_path) {
  auto cfg = attoscat::parse_config(config_path);
  if (!cfg.wants("timescales")) {
    throw attoscat::ConfigError(
        "config: the timescales subcommand needs a [timescales] section and the "
        "'timescales' output kind");
  }
  std::printf("%-18s %14s  %s\n", "quantity", "value", "unit");
  for (const auto& [name, value, unit] : attoscat::compute_timescales(cfg)) {
    std::printf("%-18s %14.6e  %s\n", name.c_str(), value, unit.c_str());
  }
  return 0;
}

int cmd_limits(const std::string& config_path) {
  const auto cfg = attoscat::parse_config(config_path);
  const auto model = attoscat::realize_model(cfg);
  const auto rho = attoscat::realize_state(cfg, model);
  const attoscat::UnitsContext units;
  const double q = cfg.q_invA.front();
  const double tau = units.as_to_natural(cfg.tau_sc_as.front());
  const auto checks = attoscat::run_limit_checks(model, rho, q, tau);

  const bool pass_a = checks.residual_a < 1e-12;
  const bool pass_b = checks.residual_b < 1e-6;
  std::printf("limit A (K->0):   rate=%.15e standard=%.15e rel_residual=%.3e %s\n",
              checks.rate_k0, checks.rate_standard_spectral, checks.residual_a,
              pass_a ? "PASS" : "FAIL");
  std::printf("limit B (K->inf): rate=%.15e diagonal=%.15e rel_residual=%.3e K=%.6g %s\n",
              checks.rate_kb, checks.rate_diagonal_limit, checks.residual_b, checks.k_b,
              pass_b ? "PASS" : "FAIL");
  return (pass_a && pass_b) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attoscat: finite-time neutron scattering rates for open quantum systems"};
  app.set_version_flag("--version", std::string("attoscat ") + attoscat::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  attoscat::RunOptions options;

  auto* run = app.add_subcommand("run", "run the configured sweep and write CSV outputs");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out-dir", options.out_dir, "output directory (default: out)");
  run->add_option("--threads", options.threads, "worker threads (default: 1)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--tolerance-report", options.tolerance_report,
                "include limiting-case residuals in the summary");

  auto* timescales =
      app.add_subcommand("timescales", "print the timescale estimator table");
  timescales->add_option("config", config_path, "config file")->required();

  auto* limits =
      app.add_subcommand("limits", "run the K->0 and K->infinity limiting-case checks");
  limits->add_option("config", config_path, "config file")->required();

  auto* validate = app.add_subcommand("validate", "parse and validate a config file");
  validate->add_option("config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      options.config_path = config_path;
      return cmd_run(config_path, options);
    }
    if (app.got_subcommand(timescales)) return cmd_timescales(config_path);
    if (app.got_subcommand(limits)) return cmd_limits(config_path);
    if (app.got_subcommand(validate)) return cmd_validate(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
