#pragma once

#include <cmath>

// Physical constants and unit conversions.
//
// All internal computations run in natural units with hbar = 1:
//   energy  : eV
//   length  : angstrom
//   time    : hbar/eV  (= 6.582119569e-16 s, i.e. 658.2119569 as)
//   mass    : hbar^2 / (eV * angstrom^2)
// Conversions happen only at input parsing and output formatting.

namespace attoscat {

namespace constants {

// CODATA-style values, 10 significant digits where the constant has them.
inline constexpr double hbar_eV_s = 6.582119569e-16;        // eV s (exact, derived)
inline constexpr double hbar_J_s = 1.054571817e-34;         // J s (exact, derived)
inline constexpr double c_m_per_s = 299792458.0;            // m/s (exact)
inline constexpr double elementary_charge_C = 1.602176634e-19;  // C (exact)
inline constexpr double neutron_mass_kg = 1.674927498e-27;  // kg
inline constexpr double proton_mass_kg = 1.672621924e-27;   // kg
inline constexpr double amu_kg = 1.660539067e-27;           // kg
inline constexpr double proton_mass_amu = 1.007276467;      // amu
inline constexpr double hbar_c_eV_A = 1973.269804;          // eV angstrom

}  // namespace constants

/// Conversion helpers between SI-facing inputs/outputs and the internal
/// natural-unit system (hbar = 1, energies in eV, lengths in angstrom).
struct UnitsContext {
  double hbar_eV_s = constants::hbar_eV_s;
  double c_m_s = constants::c_m_per_s;
  double neutron_mass_kg = constants::neutron_mass_kg;

  // One natural time unit expressed in seconds / attoseconds.
  double natural_time_s() const { return hbar_eV_s; }
  double natural_time_as() const { return hbar_eV_s * 1e18; }

  // energy <-> angular frequency
  double eV_to_inverse_s(double e_eV) const { return e_eV / hbar_eV_s; }
  double inverse_s_to_eV(double w_per_s) const { return w_per_s * hbar_eV_s; }

  // length
  static double angstrom_to_m(double a) { return a * 1e-10; }
  static double m_to_angstrom(double m) { return m * 1e10; }

  // time
  static double s_to_as(double s) { return s * 1e18; }
  static double as_to_s(double as) { return as * 1e-18; }
  double as_to_natural(double as) const { return as / natural_time_as(); }
  double natural_to_as(double t) const { return t * natural_time_as(); }
  double s_to_natural(double s) const { return s / natural_time_s(); }
  double natural_to_s(double t) const { return t * natural_time_s(); }

  // mass: one natural mass unit is hbar^2 / (eV angstrom^2)
  double natural_mass_unit_kg() const {
    const double hbar = 1.054571817e-34;
    return hbar * hbar / (constants::elementary_charge_C * 1e-20);
  }
  double kg_to_natural_mass(double kg) const { return kg / natural_mass_unit_kg(); }
  double natural_mass_to_kg(double m) const { return m * natural_mass_unit_kg(); }
  double amu_to_natural_mass(double amu) const {
    return kg_to_natural_mass(amu * constants::amu_kg);
  }

  // velocity: one natural velocity unit is angstrom per natural time
  double natural_velocity_m_per_s() const { return 1e-10 / natural_time_s(); }
  double m_per_s_to_natural(double v) const { return v / natural_velocity_m_per_s(); }
  double natural_to_m_per_s(double v) const { return v * natural_velocity_m_per_s(); }
  double A_per_s_to_natural(double v) const { return m_per_s_to_natural(v * 1e-10); }
  double natural_to_A_per_s(double v) const { return natural_to_m_per_s(v) * 1e10; }

  // decoherence constant for a dimensionless Lindblad variable: a rate
  double inverse_as_to_natural_rate(double k_per_as) const {
    return k_per_as * natural_time_as();
  }
  double natural_rate_to_inverse_as(double k) const { return k / natural_time_as(); }
};

}  // namespace attoscat
