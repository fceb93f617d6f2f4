#pragma once

// Internal quantities are SI. These helpers are the only place mm/cm enter.

namespace droptest::units {

inline constexpr double kGravity = 9.81;  // m/s^2

constexpr double mm_to_m(double mm) { return mm * 1e-3; }
constexpr double m_to_mm(double m) { return m * 1e3; }
constexpr double cm_to_m(double cm) { return cm * 1e-2; }
constexpr double m_to_cm(double m) { return m * 1e2; }

}  // namespace droptest::units
