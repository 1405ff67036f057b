#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "attoscat/matrix.hpp"

// Finite-dimensional scattering-system models: a pointer basis that
// simultaneously diagonalizes the Hamiltonian (energies E_xi) and the single
// Lindblad variable X (eigenvalues xi), together with the density-operator
// matrices n(q) that couple the system to the probe.

namespace attoscat {

/// Which eigenvalues the Lindblad variable X carries in the pointer basis.
enum class LindbladCoupling {
  BasisIndex,   // xi = 0, 1, 2, ...
  EnergyValue,  // xi = E_xi
};

struct ModelSystem {
  int dim = 0;
  std::vector<double> energies;         // E_xi, natural energy units
  std::vector<double> lindblad_values;  // xi
  double decoherence_k = 0.0;           // K >= 0
  double coupling_lambda = 1.0;         // overall rate scale, cancels in ratios
  std::map<double, ComplexMatrix> n_of_q;

  bool has_q(double q) const { return n_of_q.count(q) > 0; }

  const ComplexMatrix& n_q(double q) const {
    auto it = n_of_q.find(q);
    if (it == n_of_q.end()) {
      std::ostringstream msg;
      msg << "ModelSystem: no n(q) matrix stored for q = " << q;
      throw std::invalid_argument(msg.str());
    }
    return it->second;
  }

  /// Smallest nonzero (xi - xi')^2; throws if all Lindblad values coincide.
  double min_nonzero_lindblad_gap_sq() const {
    double best = 0.0;
    for (size_t i = 0; i < lindblad_values.size(); ++i) {
      for (size_t j = i + 1; j < lindblad_values.size(); ++j) {
        const double d = lindblad_values[i] - lindblad_values[j];
        if (d != 0.0 && (best == 0.0 || d * d < best)) best = d * d;
      }
    }
    if (best == 0.0) {
      throw std::runtime_error("ModelSystem: all Lindblad eigenvalues are degenerate");
    }
    return best;
  }
};

struct OscillatorSpec {
  double omega = 1.0;  // angular frequency, natural units
  double mass = 1.0;   // natural mass units
  int dim = 40;        // truncation size
  LindbladCoupling coupling = LindbladCoupling::BasisIndex;
};

namespace detail {

inline void validate_n_pairs(const std::map<double, ComplexMatrix>& n_of_q, double tol) {
  for (const auto& [q, m] : n_of_q) {
    auto it = n_of_q.find(-q);
    if (it == n_of_q.end()) continue;
    if (!approx_equal(it->second, m.adjoint(), tol)) {
      std::ostringstream msg;
      msg << "density-operator pair violates n†(q)=n(-q) at q = " << q;
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace detail

/// Direct construction from explicit data. When both +q and -q matrices are
/// supplied they must satisfy n(-q) = n(q)^dagger.
inline ModelSystem build_custom(std::vector<double> energies,
                                std::vector<double> lindblad_values, double K,
                                std::map<double, ComplexMatrix> n_matrices,
                                double lambda = 1.0) {
  ModelSystem model;
  model.dim = static_cast<int>(energies.size());
  if (model.dim < 1) {
    throw std::invalid_argument("build_custom: at least one basis state required");
  }
  if (lindblad_values.size() != energies.size()) {
    std::ostringstream msg;
    msg << "build_custom: energies has length " << energies.size()
        << " but lindblad_values has length " << lindblad_values.size();
    throw std::invalid_argument(msg.str());
  }
  if (K < 0.0) {
    throw std::invalid_argument(
        "build_custom: decoherence constant must satisfy K >= 0 (K is real and K>0; "
        "K=0 is the decoherence-free limit)");
  }
  for (const auto& [q, m] : n_matrices) {
    if (!is_square(m) || m.rows() != model.dim) {
      std::ostringstream msg;
      msg << "build_custom: n(q) at q = " << q << " is " << m.rows() << "x" << m.cols()
          << ", expected " << model.dim << "x" << model.dim;
      throw std::invalid_argument(msg.str());
    }
  }
  detail::validate_n_pairs(n_matrices, 1e-10);
  model.energies = std::move(energies);
  model.lindblad_values = std::move(lindblad_values);
  model.decoherence_k = K;
  model.coupling_lambda = lambda;
  model.n_of_q = std::move(n_matrices);
  return model;
}

/// Truncated harmonic oscillator model for a single scatterer.
///
/// n(q) = exp(-i q X) with X = (a + a^dagger)/sqrt(2 m omega); both signs of
/// every requested q are stored. Energies are E_n = omega(n + 1/2), built by
/// accumulation so consecutive spacings equal omega. Fails if truncation
/// leaks ground-state matrix-element weight into the top two basis states.
inline ModelSystem build_oscillator(const OscillatorSpec& spec,
                                    const std::vector<double>& q_list, double K = 0.0,
                                    double lambda = 1.0) {
  if (!(spec.omega > 0.0)) throw std::invalid_argument("build_oscillator: omega must be > 0");
  if (!(spec.mass > 0.0)) throw std::invalid_argument("build_oscillator: mass must be > 0");
  if (spec.dim < 2) throw std::invalid_argument("build_oscillator: dim must be >= 2");

  const int dim = spec.dim;
  ComplexMatrix position = ComplexMatrix::Zero(dim, dim);
  const double x0 = 1.0 / std::sqrt(2.0 * spec.mass * spec.omega);
  for (int n = 0; n + 1 < dim; ++n) {
    const double v = x0 * std::sqrt(static_cast<double>(n + 1));
    position(n, n + 1) = v;
    position(n + 1, n) = v;
  }

  std::vector<double> energies(static_cast<size_t>(dim));
  energies[0] = 0.5 * spec.omega;
  for (int n = 1; n < dim; ++n) energies[static_cast<size_t>(n)] = energies[static_cast<size_t>(n - 1)] + spec.omega;

  std::vector<double> lindblad(static_cast<size_t>(dim));
  for (int n = 0; n < dim; ++n) {
    lindblad[static_cast<size_t>(n)] = (spec.coupling == LindbladCoupling::BasisIndex)
                                           ? static_cast<double>(n)
                                           : energies[static_cast<size_t>(n)];
  }

  std::map<double, ComplexMatrix> n_of_q;
  for (double q : q_list) {
    for (double sq : {q, -q}) {
      if (n_of_q.count(sq)) continue;
      ComplexMatrix u = matrix_exp(Complex(0.0, -sq) * position, 1.0);
      // Ground-state column leakage into the top two states signals that the
      // truncated X no longer represents the displacement faithfully.
      const double leak = std::norm(u(dim - 1, 0)) + std::norm(u(dim - 2, 0));
      if (leak >= 1e-8) {
        std::ostringstream msg;
        msg << "build_oscillator: truncation insufficient at q = " << sq
            << " (top-two-state weight " << leak << " >= 1e-8); increase dim beyond "
            << dim;
        throw std::runtime_error(msg.str());
      }
      n_of_q.emplace(sq, std::move(u));
    }
  }

  return build_custom(std::move(energies), std::move(lindblad), K, std::move(n_of_q),
                      lambda);
}

/// Diagonal Gibbs state rho_xi = exp(-beta E_xi)/Z. Energies are shifted by
/// their minimum before exponentiating, so large beta cannot overflow.
inline DensityMatrix thermal_state(const ModelSystem& model, double beta) {
  if (beta < 0.0) throw std::invalid_argument("thermal_state: beta must be >= 0");
  double e_min = model.energies[0];
  for (double e : model.energies) e_min = std::min(e_min, e);
  std::vector<double> weights(model.energies.size());
  double z = 0.0;
  for (size_t i = 0; i < model.energies.size(); ++i) {
    weights[i] = std::exp(-beta * (model.energies[i] - e_min));
    z += weights[i];
  }
  for (double& w : weights) w /= z;
  return DensityMatrix::diagonal(weights);
}

/// rms velocity sqrt(<v^2>) of the oscillator at inverse temperature beta,
/// natural units. <p^2> = (m omega / 2) coth(beta omega / 2).
inline double oscillator_rms_velocity(const OscillatorSpec& spec, double beta) {
  double coth = 1.0;  // beta -> infinity limit
  const double x = 0.5 * beta * spec.omega;
  if (std::isfinite(beta) && x < 350.0) coth = 1.0 / std::tanh(x);
  const double p_sq = 0.5 * spec.mass * spec.omega * coth;
  return std::sqrt(p_sq) / spec.mass;
}

}  // namespace attoscat
