#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "attoscat/matrix.hpp"

// Config-file front end. The format is a plain sectioned key-value text file:
//
//   [model]
//   type = oscillator
//   dim = 40
//   ...
//
// '#' starts a comment. Lists are comma separated; numeric lists accept
// logspace(a, b, n) items. CLI-facing units are eV, angstrom and attoseconds.

namespace attoscat {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ModelConfig {
  std::string type;  // "oscillator" | "custom"
  int dim = 40;
  double coupling_lambda = 1.0;
  double decoherence_K_invas = 0.0;
  // oscillator
  double omega_eV = 0.0;
  double mass_amu = 0.0;
  std::string lindblad_variable = "index";  // "index" | "energy"
  // custom
  std::vector<double> energies_eV;
  std::vector<double> lindblad_values;
  std::map<double, ComplexMatrix> n_matrices;  // keyed by q in 1/angstrom
};

struct StateConfig {
  std::string type;  // "thermal" | "diagonal"
  double beta_inv_eV = 0.0;
  std::vector<double> populations;
};

struct SqwOutputConfig {
  double tau_max_as = 0.0;
  int n_tau = 0;
  double window_sigma_as = 0.0;  // 0 = no window
};

struct CorrelationOutputConfig {
  double tau_max_as = 0.0;
  int n_tau = 0;
};

struct TimescalesConfig {
  double q_invA = 0.0;
  bool v0_auto = true;  // derive rms velocity from the model
  double v0_A_per_s = 0.0;
  double deltaE_eV = 0.0;
  double Es_eV = 0.0;
  double E0_eV = 0.0;
  double range_A = 0.0;
};

struct SweepConfig {
  ModelConfig model;
  StateConfig state;
  std::vector<double> q_invA;
  std::vector<double> tau_sc_as;
  std::vector<double> k_invas;
  std::vector<std::string> outputs;
  SqwOutputConfig sqw;
  CorrelationOutputConfig correlation;
  TimescalesConfig timescales;
  std::vector<std::string> applied_defaults;

  bool wants(const std::string& kind) const {
    return std::find(outputs.begin(), outputs.end(), kind) != outputs.end();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

struct RawConfig {
  // section -> ordered (key, value) pairs; keys may repeat (n_q)
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

  bool has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return false;
    for (const auto& [k, v] : it->second)
      if (k == key) return true;
    return false;
  }

  std::string get(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it != sections.end()) {
      for (const auto& [k, v] : it->second)
        if (k == key) return v;
    }
    throw ConfigError("config: missing key '" + key + "' in section [" + section + "]");
  }

  std::vector<std::string> get_all(const std::string& section,
                                   const std::string& key) const {
    std::vector<std::string> out;
    auto it = sections.find(section);
    if (it == sections.end()) return out;
    for (const auto& [k, v] : it->second)
      if (k == key) out.push_back(v);
    return out;
  }
};

inline RawConfig read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  RawConfig raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config: malformed section header at line " +
                          std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      raw.sections[section];  // register even if empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    }
    raw.sections[section].emplace_back(trim(line.substr(0, eq)),
                                       trim(line.substr(eq + 1)));
  }
  return raw;
}

inline double parse_double(const std::string& text, const std::string& section,
                           const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (trim(text.substr(pos)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: key '" + key + "' in section [" + section +
                    "] must be a finite number, got '" + text + "'");
}

inline int parse_int(const std::string& text, const std::string& section,
                     const std::string& key) {
  const double v = parse_double(text, section, key);
  const int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 1e-9) {
    throw ConfigError("config: key '" + key + "' in section [" + section +
                      "] must be an integer");
  }
  return i;
}

/// Split on commas that are not nested inside parentheses.
inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  int depth = 0;
  std::string current;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!trim(current).empty()) items.push_back(trim(current));
  return items;
}

inline std::vector<double> parse_double_list(const std::string& text,
                                             const std::string& section,
                                             const std::string& key) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    if (item.rfind("logspace(", 0) == 0 && item.back() == ')') {
      const auto args = split_list(item.substr(9, item.size() - 10));
      if (args.size() != 3) {
        throw ConfigError("config: logspace in '" + key +
                          "' requires (min, max, count)");
      }
      const double lo = parse_double(args[0], section, key);
      const double hi = parse_double(args[1], section, key);
      const int count = parse_int(args[2], section, key);
      if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw ConfigError("config: logspace in '" + key +
                          "' requires 0 < min < max and count >= 2");
      }
      const double step = std::log(hi / lo) / (count - 1);
      for (int i = 0; i < count; ++i) values.push_back(lo * std::exp(step * i));
    } else {
      values.push_back(parse_double(item, section, key));
    }
  }
  if (values.empty()) {
    throw ConfigError("config: key '" + key + "' in section [" + section +
                      "] must be a non-empty list");
  }
  return values;
}

/// "q : (re,im) (re,im) ; (re,im) (re,im)"  ->  (q, row-major matrix)
inline std::pair<double, ComplexMatrix> parse_n_matrix(const std::string& text,
                                                       int dim,
                                                       const std::string& section) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("config: n_q in section [" + section +
                      "] must look like 'q : (re,im) ... ; ...'");
  }
  const double q = parse_double(trim(text.substr(0, colon)), section, "n_q");
  std::istringstream rows_in(text.substr(colon + 1));
  std::vector<std::vector<Complex>> rows;
  std::string row_text;
  while (std::getline(rows_in, row_text, ';')) {
    std::vector<Complex> row;
    std::istringstream entries(row_text);
    std::string token;
    while (entries >> token) {
      if (token.size() < 5 || token.front() != '(' || token.back() != ')') {
        throw ConfigError("config: n_q entry '" + token + "' must be '(re,im)'");
      }
      const auto comma = token.find(',');
      if (comma == std::string::npos) {
        throw ConfigError("config: n_q entry '" + token + "' must be '(re,im)'");
      }
      row.emplace_back(parse_double(token.substr(1, comma - 1), section, "n_q"),
                       parse_double(token.substr(comma + 1, token.size() - comma - 2),
                                    section, "n_q"));
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != dim) {
    throw ConfigError("config: n_q matrix at q = " + std::to_string(q) + " has " +
                      std::to_string(rows.size()) + " rows, expected " +
                      std::to_string(dim));
  }
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != dim) {
      throw ConfigError("config: n_q matrix at q = " + std::to_string(q) +
                        " is not square");
    }
    for (int j = 0; j < dim; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return {q, std::move(m)};
}

}  // namespace detail

inline SweepConfig parse_config(const std::string& path) {
  using detail::parse_double;
  using detail::parse_double_list;
  using detail::parse_int;

  const detail::RawConfig raw = detail::read_raw(path);

  std::vector<std::string> missing;
  for (const char* section : {"model", "state", "sweep", "outputs"}) {
    if (!raw.sections.count(section)) missing.emplace_back(section);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += "[" + s + "] ";
    throw ConfigError("config: missing required section(s): " + list +
                      "(required: [model], [state], [sweep], [outputs])");
  }

  SweepConfig cfg;
  auto note_default = [&cfg](const std::string& text) {
    cfg.applied_defaults.push_back(text);
  };

  // --- model ---
  cfg.model.type = raw.get("model", "type");
  if (cfg.model.type != "oscillator" && cfg.model.type != "custom") {
    throw ConfigError("config: key 'type' in section [model] must be 'oscillator' or "
                      "'custom', got '" + cfg.model.type + "'");
  }
  cfg.model.dim = parse_int(raw.get("model", "dim"), "model", "dim");
  if (raw.has("model", "coupling_lambda")) {
    cfg.model.coupling_lambda =
        parse_double(raw.get("model", "coupling_lambda"), "model", "coupling_lambda");
  } else {
    note_default("[model] coupling_lambda = 1.0");
  }
  if (raw.has("model", "decoherence_K_invas")) {
    cfg.model.decoherence_K_invas = parse_double(raw.get("model", "decoherence_K_invas"),
                                                 "model", "decoherence_K_invas");
    if (cfg.model.decoherence_K_invas < 0.0) {
      throw ConfigError("config: key 'decoherence_K_invas' in section [model] must be "
                        ">= 0 (K is real and K>0; K=0 is the decoherence-free limit)");
    }
  } else {
    note_default("[model] decoherence_K_invas = 0.0");
  }
  if (cfg.model.type == "oscillator") {
    cfg.model.omega_eV = parse_double(raw.get("model", "omega_eV"), "model", "omega_eV");
    cfg.model.mass_amu = parse_double(raw.get("model", "mass_amu"), "model", "mass_amu");
    if (!(cfg.model.omega_eV > 0.0)) {
      throw ConfigError("config: key 'omega_eV' in section [model] must be > 0 eV");
    }
    if (!(cfg.model.mass_amu > 0.0)) {
      throw ConfigError("config: key 'mass_amu' in section [model] must be > 0 amu");
    }
    if (raw.has("model", "lindblad_variable")) {
      cfg.model.lindblad_variable = raw.get("model", "lindblad_variable");
      if (cfg.model.lindblad_variable != "index" &&
          cfg.model.lindblad_variable != "energy") {
        throw ConfigError("config: key 'lindblad_variable' in section [model] must be "
                          "'index' or 'energy'");
      }
    } else {
      note_default("[model] lindblad_variable = index");
    }
  } else {
    cfg.model.energies_eV =
        parse_double_list(raw.get("model", "energies_eV"), "model", "energies_eV");
    cfg.model.lindblad_values = parse_double_list(raw.get("model", "lindblad_values"),
                                                  "model", "lindblad_values");
    for (const std::string& text : raw.get_all("model", "n_q")) {
      auto [q, m] = detail::parse_n_matrix(text, cfg.model.dim, "model");
      cfg.model.n_matrices[q] = std::move(m);
    }
    if (cfg.model.n_matrices.empty()) {
      throw ConfigError("config: missing key 'n_q' in section [model] (custom models "
                        "need at least one density-operator matrix)");
    }
  }

  // --- state ---
  cfg.state.type = raw.get("state", "type");
  if (cfg.state.type == "thermal") {
    cfg.state.beta_inv_eV =
        parse_double(raw.get("state", "beta_inv_eV"), "state", "beta_inv_eV");
    if (cfg.state.beta_inv_eV < 0.0) {
      throw ConfigError("config: key 'beta_inv_eV' in section [state] must be >= 0");
    }
  } else if (cfg.state.type == "diagonal") {
    cfg.state.populations =
        parse_double_list(raw.get("state", "populations"), "state", "populations");
  } else {
    throw ConfigError("config: key 'type' in section [state] must be 'thermal' or "
                      "'diagonal', got '" + cfg.state.type + "'");
  }

  // --- sweep ---
  cfg.q_invA = parse_double_list(raw.get("sweep", "q_invA"), "sweep", "q_invA");
  cfg.tau_sc_as = parse_double_list(raw.get("sweep", "tau_sc_as"), "sweep", "tau_sc_as");
  cfg.k_invas = parse_double_list(raw.get("sweep", "k_invas"), "sweep", "k_invas");
  for (double tau : cfg.tau_sc_as) {
    if (!(tau > 0.0)) {
      throw ConfigError("config: key 'tau_sc_as' in section [sweep] must list positive "
                        "attosecond values");
    }
  }
  for (size_t i = 0; i < cfg.k_invas.size(); ++i) {
    if (cfg.k_invas[i] < 0.0) {
      throw ConfigError("config: key 'k_invas' in section [sweep] must be nonnegative "
                        "(K is real and K>0; K=0 is the decoherence-free limit)");
    }
    if (i > 0 && cfg.k_invas[i] < cfg.k_invas[i - 1]) {
      throw ConfigError("config: key 'k_invas' in section [sweep] must be ascending");
    }
  }

  // --- outputs ---
  for (const std::string& kind :
       detail::split_list(raw.get("outputs", "kinds"))) {
    if (kind != "rates" && kind != "anomaly" && kind != "sqw" &&
        kind != "correlation" && kind != "timescales") {
      throw ConfigError("config: key 'kinds' in section [outputs] contains unknown "
                        "output '" + kind + "'");
    }
    cfg.outputs.push_back(kind);
  }
  if (cfg.outputs.empty()) {
    throw ConfigError("config: key 'kinds' in section [outputs] must request at least "
                      "one output");
  }

  // --- optional per-output sections ---
  if (cfg.wants("sqw")) {
    cfg.sqw.tau_max_as = parse_double(raw.get("sqw", "tau_max_as"), "sqw", "tau_max_as");
    cfg.sqw.n_tau = parse_int(raw.get("sqw", "n_tau"), "sqw", "n_tau");
    if (raw.has("sqw", "window_sigma_as")) {
      cfg.sqw.window_sigma_as =
          parse_double(raw.get("sqw", "window_sigma_as"), "sqw", "window_sigma_as");
    } else {
      note_default("[sqw] window_sigma_as = 0.0 (no window)");
    }
    if (!(cfg.sqw.tau_max_as > 0.0) || cfg.sqw.n_tau < 2 ||
        cfg.sqw.window_sigma_as < 0.0) {
      throw ConfigError("config: section [sqw] needs tau_max_as > 0 as, n_tau >= 2 and "
                        "window_sigma_as >= 0 as");
    }
  }
  if (cfg.wants("correlation")) {
    cfg.correlation.tau_max_as =
        parse_double(raw.get("correlation", "tau_max_as"), "correlation", "tau_max_as");
    cfg.correlation.n_tau =
        parse_int(raw.get("correlation", "n_tau"), "correlation", "n_tau");
    if (!(cfg.correlation.tau_max_as > 0.0) || cfg.correlation.n_tau < 2) {
      throw ConfigError("config: section [correlation] needs tau_max_as > 0 as and "
                        "n_tau >= 2");
    }
  }
  if (cfg.wants("timescales")) {
    cfg.timescales.q_invA =
        parse_double(raw.get("timescales", "q_invA"), "timescales", "q_invA");
    const std::string v0_text = raw.has("timescales", "v0_A_per_s")
                                    ? raw.get("timescales", "v0_A_per_s")
                                    : std::string("auto");
    if (!raw.has("timescales", "v0_A_per_s")) {
      note_default("[timescales] v0_A_per_s = auto (rms velocity from the model)");
    }
    if (v0_text == "auto") {
      cfg.timescales.v0_auto = true;
    } else {
      cfg.timescales.v0_auto = false;
      cfg.timescales.v0_A_per_s = parse_double(v0_text, "timescales", "v0_A_per_s");
    }
    cfg.timescales.deltaE_eV =
        parse_double(raw.get("timescales", "deltaE_eV"), "timescales", "deltaE_eV");
    cfg.timescales.Es_eV =
        parse_double(raw.get("timescales", "Es_eV"), "timescales", "Es_eV");
    cfg.timescales.E0_eV =
        parse_double(raw.get("timescales", "E0_eV"), "timescales", "E0_eV");
    cfg.timescales.range_A =
        parse_double(raw.get("timescales", "range_A"), "timescales", "range_A");
  }

  return cfg;
}

}  // namespace attoscat
