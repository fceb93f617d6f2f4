#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "droptest/error.hpp"

namespace droptest::mechanics {

/// Loads on a circular shaft section. Magnitudes in SI (N·m, m).
struct SectionLoad {
  double torque_nm = 0.0;
  double bending_moment_nm = 0.0;
  double diameter_m = 0.0;
};

/// Plane stress state, Pa.
struct PlaneStress {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double tau_xy = 0.0;
};

struct ImpactInputs {
  double mass_kg = 0.0;
  double max_velocity_m_s = 0.0;
  double stopping_distance_m = 0.0;
};

/// Load-cell amplifier calibration.
struct RigCalibration {
  double volts_to_newtons = 20.0;  // N per V
  double display_resolution_n = 0.01;
};

namespace detail {

inline void require_section(const SectionLoad& load) {
  if (!(load.diameter_m > 0.0) || !std::isfinite(load.diameter_m))
    fail(ErrorKind::InvalidInput, "section diameter must be positive, got " + std::to_string(load.diameter_m));
}

inline double cube(double x) { return x * x * x; }

}  // namespace detail

/// Shear stress at the surface of a circular section under torsion: 16T/(πd³).
inline double torsional_stress(const SectionLoad& load) {
  detail::require_section(load);
  if (load.torque_nm < 0.0) fail(ErrorKind::InvalidInput, "torque is a magnitude and must be >= 0");
  return 16.0 * load.torque_nm / (std::numbers::pi * detail::cube(load.diameter_m));
}

/// Outer-fibre bending stress of a circular section: 32M/(πd³).
inline double bending_stress(const SectionLoad& load) {
  detail::require_section(load);
  if (load.bending_moment_nm < 0.0) fail(ErrorKind::InvalidInput, "bending moment is a magnitude and must be >= 0");
  return 32.0 * load.bending_moment_nm / (std::numbers::pi * detail::cube(load.diameter_m));
}

/// Plane-stress Von Mises equivalent: sqrt(σx² − σxσy + σy² + 3τxy²).
inline double von_mises(const PlaneStress& s) {
  if (!std::isfinite(s.sigma_x) || !std::isfinite(s.sigma_y) || !std::isfinite(s.tau_xy))
    fail(ErrorKind::InvalidInput, "stress components must be finite");
  const double sx = s.sigma_x;
  const double sy = s.sigma_y;
  const double t = s.tau_xy;
  // Clamp rounding noise; the quadratic form is positive semidefinite.
  return std::sqrt(std::max(0.0, (sx * sx + sy * sy) - sx * sy + 3.0 * t * t));
}

inline double voltage_to_force(double peak_voltage_v, const RigCalibration& cal = {}) {
  if (!(cal.volts_to_newtons > 0.0)) fail(ErrorKind::InvalidInput, "calibration scale must be positive");
  if (peak_voltage_v < 0.0 || !std::isfinite(peak_voltage_v))
    fail(ErrorKind::InvalidInput, "peak voltage must be a finite value >= 0 (baseline-corrected)");
  return cal.volts_to_newtons * peak_voltage_v;
}

/// Lossless energy balance: ½mv² = F·d_stop.
inline double theoretical_impact_force(const ImpactInputs& in) {
  if (!(in.mass_kg > 0.0)) fail(ErrorKind::InvalidInput, "mass must be positive");
  if (in.max_velocity_m_s < 0.0 || !std::isfinite(in.max_velocity_m_s))
    fail(ErrorKind::InvalidInput, "velocity must be a finite magnitude");
  if (!(in.stopping_distance_m > 0.0))
    fail(ErrorKind::DegenerateKinematics,
         "stopping distance must be positive, got " + std::to_string(in.stopping_distance_m) + " m");
  return in.mass_kg * in.max_velocity_m_s * in.max_velocity_m_s / (2.0 * in.stopping_distance_m);
}

/// Percent by which theory exceeds measurement, relative to the measurement.
inline double validation_error(double theoretical_n, double actual_n) {
  if (!(actual_n > 0.0)) fail(ErrorKind::InvalidInput, "actual force must be positive");
  return 100.0 * (theoretical_n - actual_n) / actual_n;
}

/// Net-section bending screen for a rectangular arm with a slot cut from one
/// face. The remaining ligament (height − slot) carries M = F·arm.
inline double slot_section_screen(double applied_force_n, double lever_arm_m, double section_width_m,
                                  double section_height_m, double slot_depth_m) {
  if (applied_force_n < 0.0) fail(ErrorKind::InvalidInput, "applied force must be >= 0");
  if (!(lever_arm_m > 0.0) || !(section_width_m > 0.0) || !(section_height_m > 0.0))
    fail(ErrorKind::InvalidInput, "lever arm and section dimensions must be positive");
  if (slot_depth_m < 0.0) fail(ErrorKind::InvalidInput, "slot depth must be >= 0");
  if (slot_depth_m >= section_height_m)
    fail(ErrorKind::SeveredSection, "slot depth reaches through the section");

  const double ligament = section_height_m - slot_depth_m;
  const double moment = applied_force_n * lever_arm_m;
  const double second_moment = section_width_m * detail::cube(ligament) / 12.0;
  const double fibre = ligament / 2.0;
  return von_mises({moment * fibre / second_moment, 0.0, 0.0});
}

}  // namespace droptest::mechanics
