#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "attoscat/matrix.hpp"
#include "attoscat/model.hpp"

// Time evolution under d/dt rho = -i[H, rho] - K[X, [X, rho]] with H and X
// diagonal in the pointer basis. The generator then decouples entry-wise,
// giving an exact O(dim^2) propagator; a dense superoperator exponential is
// kept alongside as a brute-force oracle.

namespace attoscat {

enum class PropagationMethod { Analytic, Superoperator };

struct PropagationResult {
  ComplexMatrix state;  // a DensityMatrix or a non-Hermitian rho_B
  double time = 0.0;
  PropagationMethod method = PropagationMethod::Analytic;
};

/// Exact entry-wise propagator:
///   rho_{xi xi'}(t) = exp[(-i(E_xi - E_xi') - K(xi - xi')^2) t] rho_{xi xi'}(0).
inline ComplexMatrix evolve_analytic(const ModelSystem& model, const ComplexMatrix& rho0,
                                     double t) {
  if (t < 0.0) {
    throw std::invalid_argument("evolve_analytic: t must be >= 0 (no backward decoherence)");
  }
  if (rho0.rows() != model.dim || rho0.cols() != model.dim) {
    std::ostringstream msg;
    msg << "evolve_analytic: state is " << rho0.rows() << "x" << rho0.cols()
        << " but model dim is " << model.dim;
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix out(model.dim, model.dim);
  for (int i = 0; i < model.dim; ++i) {
    for (int j = 0; j < model.dim; ++j) {
      const double de = model.energies[static_cast<size_t>(i)] -
                        model.energies[static_cast<size_t>(j)];
      const double dx = model.lindblad_values[static_cast<size_t>(i)] -
                        model.lindblad_values[static_cast<size_t>(j)];
      const Complex exponent(-model.decoherence_k * dx * dx * t, -de * t);
      out(i, j) = std::exp(exponent) * rho0(i, j);
    }
  }
  return out;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// dim^2 x dim^2 matrix of L acting on column-major vec(rho):
///   vec(-i[H,.] - K[X,[X,.]]).
inline ComplexMatrix liouvillian_matrix(const ModelSystem& model) {
  const int d = model.dim;
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  ComplexMatrix x = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    h(i, i) = model.energies[static_cast<size_t>(i)];
    x(i, i) = model.lindblad_values[static_cast<size_t>(i)];
  }
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix x2 = x * x;
  const Complex minus_i(0.0, -1.0);
  // vec(A rho B) = (B^T kron A) vec(rho)
  ComplexMatrix lv = minus_i * (kron(id, h) - kron(h.transpose(), id));
  lv -= model.decoherence_k *
        (kron(id, x2) + kron(x2.transpose(), id) - 2.0 * kron(x.transpose(), x));
  return lv;
}

/// Brute-force reference: vectorize rho, exponentiate the full Liouvillian,
/// devectorize. Guarded to dim <= 8.
inline ComplexMatrix evolve_superop_oracle(const ModelSystem& model,
                                           const ComplexMatrix& rho0, double t) {
  if (model.dim > 8) {
    std::ostringstream msg;
    msg << "evolve_superop_oracle: oracle guard allows dim <= 8, got dim = " << model.dim;
    throw std::invalid_argument(msg.str());
  }
  if (t < 0.0) {
    throw std::invalid_argument("evolve_superop_oracle: t must be >= 0");
  }
  if (rho0.rows() != model.dim || rho0.cols() != model.dim) {
    throw std::invalid_argument("evolve_superop_oracle: state dimension mismatch");
  }
  const int d = model.dim;
  const ComplexMatrix propagator = matrix_exp(liouvillian_matrix(model), t);
  Eigen::VectorXcd vec(d * d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) vec(j * d + i) = rho0(i, j);
  }
  const Eigen::VectorXcd evolved = propagator * vec;
  ComplexMatrix out(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) out(i, j) = evolved(j * d + i);
  }
  return out;
}

/// Regression-theorem companion state: rho_B(t) solves the master equation
/// with the (generally non-Hermitian) initial condition rho_B(0) = B rho(0),
/// so that <A(t) B> = Tr(A rho_B(t)).
inline ComplexMatrix evolve_rho_b(const ModelSystem& model, const ComplexMatrix& B,
                                  const DensityMatrix& rho0, double t) {
  return evolve_analytic(model, matmul(B, rho0.matrix()), t);
}

inline PropagationResult propagate(const ModelSystem& model, const ComplexMatrix& rho0,
                                   double t, PropagationMethod method) {
  PropagationResult result;
  result.time = t;
  result.method = method;
  result.state = (method == PropagationMethod::Analytic)
                     ? evolve_analytic(model, rho0, t)
                     : evolve_superop_oracle(model, rho0, t);
  return result;
}

}  // namespace attoscat
