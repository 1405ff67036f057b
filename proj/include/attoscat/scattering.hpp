#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "attoscat/lindblad.hpp"
#include "attoscat/matrix.hpp"
#include "attoscat/model.hpp"

// The observable chain: two-time correlation function C(q,tau), intermediate
// function F(q,t), dynamic structure factor S(q,omega), finite-time transition
// probability W(tau_sc) and rate Wdot, and the anomaly ratio Wdot(K)/Wdot(0).
//
// In the pointer basis every (xi, xi') pair evolves with the complex rate
//   z = i(E_xi' - E_xi) + K(xi' - xi)^2,
// so all time integrals are done in closed form per pair. The rate uses the
// stationarity-symmetrized kernel C(eta) + C(-eta) = 2 Re C(eta), which keeps
// it real for states where C itself is complex (e.g. a T=0 oscillator).

namespace attoscat {

struct CorrelationSeries {
  double q = 0.0;
  std::vector<double> taus;      // increasing, starting at 0 for transforms
  std::vector<Complex> values;   // C(q, tau)
};

struct SpectrumSeries {
  double q = 0.0;
  std::vector<double> omegas;
  std::vector<double> s_values;
};

struct RateResult {
  double q = 0.0;
  double tau_sc = 0.0;
  double K = 0.0;
  double w_total = 0.0;                 // W(tau_sc) = rate * tau_sc
  double rate = 0.0;                    // Wdot
  double rate_decoherence_free = 0.0;   // same kinematics with K = 0
  double anomaly_ratio = 0.0;           // rate / rate_decoherence_free
};

struct SpectralWindow {
  enum class Kind { None, Gaussian };
  Kind kind = Kind::None;
  double sigma = 0.0;  // time-domain width for Gaussian

  static SpectralWindow none() { return {}; }
  static SpectralWindow gaussian(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("SpectralWindow: sigma must be > 0");
    return {Kind::Gaussian, sigma};
  }

  double weight(double tau) const {
    if (kind == Kind::None) return 1.0;
    const double x = tau / sigma;
    return std::exp(-0.5 * x * x);
  }
};

namespace detail {

/// (1 - exp(-z tau)) / z, the one-sided integral of exp(-z eta) over [0, tau].
/// Series evaluation below |z tau| = 1/2 avoids the cancellation in 1 - e^{-x}
/// and gives the z -> 0 limit tau exactly.
inline Complex integral_decay(Complex z, double tau) {
  const Complex zt = z * tau;
  if (std::abs(zt) < 0.5) {
    // tau * sum_{k>=0} (-z tau)^k / (k+1)!
    Complex sum(1.0, 0.0);
    Complex term(1.0, 0.0);
    for (int k = 1; k <= 24; ++k) {
      term *= -zt / static_cast<double>(k + 1);
      sum += term;
      if (std::abs(term) < 1e-20) break;
    }
    return tau * sum;
  }
  return (1.0 - std::exp(-zt)) / z;
}

/// (z tau - 1 + exp(-z tau)) / z^2 = integral over the triangle
/// {0 <= t' <= t'' <= tau} of exp(-z (t'' - t')).
inline Complex integral_triangle(Complex z, double tau) {
  const Complex zt = z * tau;
  if (std::abs(zt) < 0.5) {
    // tau^2 * sum_{k>=0} (-z tau)^k / (k+2)!
    Complex sum(0.5, 0.0);
    Complex term(0.5, 0.0);
    for (int k = 1; k <= 24; ++k) {
      term *= -zt / static_cast<double>(k + 2);
      sum += term;
      if (std::abs(term) < 1e-20) break;
    }
    return tau * tau * sum;
  }
  return (zt - 1.0 + std::exp(-zt)) / (z * z);
}

struct PairDecomposition {
  ComplexMatrix weight;  // M_{xi xi'} = <xi|n(-q)|xi'><xi'|n(q) rho|xi>
  ComplexMatrix zrate;   // z_{xi xi'} = i(E_xi' - E_xi) + K(xi' - xi)^2
};

inline PairDecomposition pair_decomposition(const ModelSystem& model,
                                            const DensityMatrix& rho, double q,
                                            double k_override) {
  const ComplexMatrix& n_minus = model.n_q(-q);
  const ComplexMatrix n_rho = matmul(model.n_q(q), rho.matrix());
  const int d = model.dim;
  PairDecomposition out;
  out.weight.resize(d, d);
  out.zrate.resize(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out.weight(i, j) = n_minus(i, j) * n_rho(j, i);
      const double de = model.energies[static_cast<size_t>(j)] -
                        model.energies[static_cast<size_t>(i)];
      const double dx = model.lindblad_values[static_cast<size_t>(j)] -
                        model.lindblad_values[static_cast<size_t>(i)];
      out.zrate(i, j) = Complex(k_override * dx * dx, de);
    }
  }
  return out;
}

/// 2 lambda^2 * Re sum_{xi xi'} M (1 - e^{-z tau}) / z.
inline double rate_from_pairs(const PairDecomposition& pairs, double tau_sc,
                              double lambda) {
  Complex sum(0.0, 0.0);
  for (Eigen::Index i = 0; i < pairs.weight.rows(); ++i) {
    for (Eigen::Index j = 0; j < pairs.weight.cols(); ++j) {
      sum += pairs.weight(i, j) * integral_decay(pairs.zrate(i, j), tau_sc);
    }
  }
  return 2.0 * lambda * lambda * sum.real();
}

}  // namespace detail

/// C(q, tau) = Tr[n(-q) rho_B(tau)] with rho_B(0) = n(q) rho, realizing
/// Tr[n(q,0) rho n(-q,tau)] through the regression relation.
inline Complex correlation(const ModelSystem& model, const DensityMatrix& rho, double q,
                           double tau) {
  if (tau < 0.0) throw std::invalid_argument("correlation: tau must be >= 0");
  const ComplexMatrix& n_minus = model.n_q(-q);
  const ComplexMatrix rho_b = evolve_rho_b(model, model.n_q(q), rho, tau);
  return trace(matmul(n_minus, rho_b));
}

/// F(q, t) on a grid; identical to C(q, t) pointwise.
inline CorrelationSeries intermediate_function(const ModelSystem& model,
                                               const DensityMatrix& rho, double q,
                                               const std::vector<double>& tau_grid) {
  if (tau_grid.empty()) {
    throw std::invalid_argument("intermediate_function: empty tau grid");
  }
  for (size_t i = 1; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > tau_grid[i - 1])) {
      throw std::invalid_argument("intermediate_function: tau grid must be increasing");
    }
  }
  CorrelationSeries series;
  series.q = q;
  series.taus = tau_grid;
  series.values.reserve(tau_grid.size());
  for (double tau : tau_grid) series.values.push_back(correlation(model, rho, q, tau));
  return series;
}

/// Discrete transform of F(q,t) extended to negative times by conjugate
/// symmetry F(q,-t) = conj F(q,t). A component e^{-i w0 t} of F lands at
/// +w0 on the omega grid (energy transferred to the system counts positive).
/// The grid satisfies the sum rule  d_omega * sum S = F(q,0) exactly.
inline SpectrumSeries dynamic_structure_factor(const CorrelationSeries& series,
                                               const SpectralWindow& window = {}) {
  const size_t n = series.taus.size();
  if (n < 2) throw std::invalid_argument("dynamic_structure_factor: need >= 2 samples");
  if (std::abs(series.taus[0]) > 1e-12) {
    throw std::invalid_argument("dynamic_structure_factor: tau grid must start at 0");
  }
  const double dt = series.taus[1] - series.taus[0];
  for (size_t i = 1; i < n; ++i) {
    const double step = series.taus[i] - series.taus[i - 1];
    if (std::abs(step - dt) > 1e-9 * dt) {
      throw std::invalid_argument("dynamic_structure_factor: tau grid must be uniform");
    }
  }

  const int half = static_cast<int>(n) - 1;
  const int total = 2 * half + 1;
  const double d_omega = 2.0 * M_PI / (total * dt);

  SpectrumSeries spectrum;
  spectrum.q = series.q;
  spectrum.omegas.reserve(static_cast<size_t>(total));
  spectrum.s_values.reserve(static_cast<size_t>(total));
  for (int k = -half; k <= half; ++k) {
    const double omega = k * d_omega;
    // S(w) = (dt / 2 pi) [ F(0) + 2 Re sum_{j>=1} e^{i w t_j} w(t_j) F(t_j) ]
    double acc = series.values[0].real() * window.weight(0.0);
    for (size_t j = 1; j < n; ++j) {
      const double tau = series.taus[j];
      const Complex phase(std::cos(omega * tau), std::sin(omega * tau));
      acc += 2.0 * (phase * series.values[j]).real() * window.weight(tau);
    }
    spectrum.omegas.push_back(omega);
    spectrum.s_values.push_back(acc * dt / (2.0 * M_PI));
  }
  return spectrum;
}

/// Exact double-time-integral transition probability
///   W(tau_sc) = lambda^2 int_0^tau int_0^tau C(q, t'' - t') dt' dt''
/// with C extended to negative arguments by conjugate symmetry. Analytically
/// real; the imaginary residue is checked below 1e-9 relative and dropped.
inline double w_exact(const ModelSystem& model, const DensityMatrix& rho, double q,
                      double tau_sc) {
  if (!(tau_sc > 0.0)) throw std::invalid_argument("w_exact: tau_sc must be > 0");
  const auto pairs = detail::pair_decomposition(model, rho, q, model.decoherence_k);
  Complex sum(0.0, 0.0);
  for (Eigen::Index i = 0; i < pairs.weight.rows(); ++i) {
    for (Eigen::Index j = 0; j < pairs.weight.cols(); ++j) {
      const Complex upper =
          pairs.weight(i, j) * detail::integral_triangle(pairs.zrate(i, j), tau_sc);
      sum += upper + std::conj(upper);  // the two time orderings
    }
  }
  const double lambda_sq = model.coupling_lambda * model.coupling_lambda;
  const double scale = std::abs(sum.real()) > 0.0 ? std::abs(sum.real()) : 1.0;
  if (std::abs(sum.imag()) > 1e-9 * scale) {
    std::ostringstream msg;
    msg << "w_exact: imaginary residue " << sum.imag() << " exceeds 1e-9 relative";
    throw std::runtime_error(msg.str());
  }
  return lambda_sq * sum.real();
}

/// Finite-time transition rate with decoherence, Wdot(K), together with its
/// decoherence-free reference and the anomaly ratio at fixed kinematics.
/// The overload with k_override evaluates at a K other than the model's.
inline RateResult rate_decohered(const ModelSystem& model, const DensityMatrix& rho,
                                 double q, double tau_sc, double k_override) {
  if (!(tau_sc > 0.0)) throw std::invalid_argument("rate_decohered: tau_sc must be > 0");
  if (k_override < 0.0) {
    throw std::invalid_argument("rate_decohered: K must be >= 0 (K is real and K>0)");
  }
  const auto pairs_k = detail::pair_decomposition(model, rho, q, k_override);
  const auto pairs_0 = detail::pair_decomposition(model, rho, q, 0.0);
  RateResult result;
  result.q = q;
  result.tau_sc = tau_sc;
  result.K = k_override;
  result.rate = detail::rate_from_pairs(pairs_k, tau_sc, model.coupling_lambda);
  result.rate_decoherence_free =
      detail::rate_from_pairs(pairs_0, tau_sc, model.coupling_lambda);
  result.w_total = result.rate * tau_sc;
  result.anomaly_ratio = result.rate / result.rate_decoherence_free;
  return result;
}

inline RateResult rate_decohered(const ModelSystem& model, const DensityMatrix& rho,
                                 double q, double tau_sc) {
  return rate_decohered(model, rho, q, tau_sc, model.decoherence_k);
}

/// The standard finite-time rate, Wdot = 2 lambda^2 int_0^tau_sc C(q,eta) deta
/// with the stationarity-symmetrized (real) kernel, at the model's stored K.
/// Shares the closed-form path with rate_decohered by construction; it exists
/// to expose the single-integral form next to the exact double integral.
inline double rate_standard(const ModelSystem& model, const DensityMatrix& rho, double q,
                            double tau_sc) {
  if (!(tau_sc > 0.0)) throw std::invalid_argument("rate_standard: tau_sc must be > 0");
  const auto pairs = detail::pair_decomposition(model, rho, q, model.decoherence_k);
  return detail::rate_from_pairs(pairs, tau_sc, model.coupling_lambda);
}

/// Wdot(K)/Wdot(0) over a nonnegative ascending K grid. The K = 0 point is
/// exactly 1 because numerator and denominator follow the same code path.
inline std::vector<std::pair<double, double>> anomaly_curve(
    const ModelSystem& model, const DensityMatrix& rho, double q, double tau_sc,
    const std::vector<double>& k_grid) {
  if (!(tau_sc > 0.0)) throw std::invalid_argument("anomaly_curve: tau_sc must be > 0");
  for (size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 0.0) {
      throw std::invalid_argument(
          "anomaly_curve: K grid must be nonnegative (K is real and K>0)");
    }
    if (i > 0 && k_grid[i] < k_grid[i - 1]) {
      throw std::invalid_argument("anomaly_curve: K grid must be ascending");
    }
  }
  const auto pairs_0 = detail::pair_decomposition(model, rho, q, 0.0);
  const double rate_0 = detail::rate_from_pairs(pairs_0, tau_sc, model.coupling_lambda);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(k_grid.size());
  for (double k : k_grid) {
    const auto pairs_k = detail::pair_decomposition(model, rho, q, k);
    const double rate_k = detail::rate_from_pairs(pairs_k, tau_sc, model.coupling_lambda);
    curve.emplace_back(k, rate_k / rate_0);
  }
  return curve;
}

}  // namespace attoscat
