#pragma once

#include <cmath>
#include <stdexcept>

#include "attoscat/units.hpp"

// Order-of-magnitude time estimators for the epithermal scattering regime.
// Inputs are in eV / angstrom / (angstrom per second); outputs in seconds
// (times) and angstrom (lengths).

namespace attoscat {

struct KinematicsInput {
  double q_invA = 0.0;       // momentum-transfer wavenumber, 1/angstrom
  double v0_A_per_s = 0.0;   // rms velocity of the struck nucleus
  double deltaE_eV = 0.0;    // width of S(q, omega)
  double Es_eV = 0.0;        // mean energy above ground state
  double E0_eV = 0.0;        // incident neutron energy
  double range_A = 0.0;      // interaction range
};

/// Impulse-approximation scattering time, tau * q * v0 = 1.
inline double scattering_time_ia(double q_invA, double v0_A_per_s) {
  if (!(q_invA > 0.0) || !(v0_A_per_s > 0.0)) {
    throw std::invalid_argument("scattering_time_ia: q and v0 must be > 0");
  }
  return 1.0 / (q_invA * v0_A_per_s);
}

/// Width-based scattering time, hbar / deltaE.
inline double scattering_time_width(double deltaE_eV,
                                    const UnitsContext& units = {}) {
  if (!(deltaE_eV > 0.0)) {
    throw std::invalid_argument("scattering_time_width: deltaE must be > 0");
  }
  return units.hbar_eV_s / deltaE_eV;
}

/// Minimum time to reach an orthogonal state, pi hbar / (2 Es).
inline double margolus_levitin(double Es_eV, const UnitsContext& units = {}) {
  if (!(Es_eV > 0.0)) {
    throw std::invalid_argument("margolus_levitin: Es must be > 0");
  }
  return M_PI * units.hbar_eV_s / (2.0 * Es_eV);
}

/// Classical neutron crossing time of the interaction range,
/// range / sqrt(2 E0 / m_n). Nonrelativistic (v/c < 1e-3 at eV energies).
inline double transit_time(double E0_eV, double range_A,
                           const UnitsContext& units = {}) {
  if (!(E0_eV > 0.0)) throw std::invalid_argument("transit_time: E0 must be > 0");
  if (!(range_A > 0.0)) throw std::invalid_argument("transit_time: range must be > 0");
  const double energy_J = E0_eV * constants::elementary_charge_C;
  const double v_m_per_s = std::sqrt(2.0 * energy_J / units.neutron_mass_kg);
  return UnitsContext::angstrom_to_m(range_A) / v_m_per_s;
}

/// Causal radius c * tau_act, in angstrom.
inline double causal_radius(double tau_act_s, const UnitsContext& units = {}) {
  if (!(tau_act_s > 0.0)) {
    throw std::invalid_argument("causal_radius: tau_act must be > 0");
  }
  return UnitsContext::m_to_angstrom(units.c_m_s * tau_act_s);
}

}  // namespace attoscat
