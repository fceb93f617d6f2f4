#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "droptest/error.hpp"
#include "droptest/trace.hpp"
#include "droptest/units.hpp"

namespace droptest::simrig {

/// Synthetic drop rig: the basket falls along a lossy rail onto a
/// spring-damper contact (part + load cell), then is brought to rest.
struct SimConfig {
  double mass_kg = 0.735;
  double drop_height_cm = 4.0;
  double rail_efficiency = 0.85;
  double contact_stiffness_n_m = 5.8e4;
  double contact_damping_n_s_m = 165.0;
  std::optional<double> part_break_threshold_n;
  double noise_sigma_v = 0.005;
  double force_rate_hz = trace::kForceRateHz;
  double kin_rate_hz = trace::kKinRateHz;
  std::uint64_t seed = 1;

  double integration_rate_hz = 50000.0;
  double hold_s = 0.2;
  double settle_s = 0.6;
  double rest_position_mm = 690.489;
  double height_jitter_cm = 0.0;
  double volts_to_newtons = 20.0;

  // Fracture morphology: load saturates at the part strength while the crack
  // runs (fracture_time_s), falls to break_fraction of it and decays; the
  // basket then crosses break_gap_mm and lands on the load cell through a
  // stiffer seat.
  double fracture_time_s = 0.002;
  double break_fraction = 0.4;
  double break_decay_s = 0.001;
  double break_gap_mm = 1.0;
  double seat_stiffness_ratio = 4.0;

  // Once the first compression peaks, upward motion of the basket is
  // braked (damping ratio against the contact stiffness). The brake acts on
  // the basket, not through the load cell, so it does not distort the pulse.
  double settle_damping_ratio = 3.0;
};

struct SimTruth {
  double drop_height_cm = 0.0;  // after jitter
  double v_impact_m_s = 0.0;
  double peak_force_n = 0.0;
  bool broke = false;
  double d_stop_m = 0.0;
  double t_impact_s = 0.0;
  double t_max_compression_s = 0.0;
  double kinetic_energy_j = 0.0;
  double peak_elastic_energy_j = 0.0;
  double gravity_work_j = 0.0;
};

struct SimResult {
  trace::ForceTrace force;
  trace::KinTrace kin;
  SimTruth truth;
};

namespace detail {

inline void validate(const SimConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::InvalidInput, what);
  };
  require(cfg.mass_kg > 0.0, "mass must be positive");
  require(cfg.drop_height_cm >= 0.0 && std::isfinite(cfg.drop_height_cm), "drop height must be >= 0");
  require(cfg.rail_efficiency > 0.0 && cfg.rail_efficiency <= 1.0, "rail efficiency must be in (0, 1]");
  require(cfg.contact_stiffness_n_m > 0.0, "contact stiffness must be positive");
  require(cfg.contact_damping_n_s_m >= 0.0, "contact damping must be >= 0");
  require(cfg.noise_sigma_v >= 0.0, "noise sigma must be >= 0");
  require(cfg.force_rate_hz > 0.0 && cfg.kin_rate_hz > 0.0, "sensor rates must be positive");
  require(cfg.integration_rate_hz >= 20000.0, "integration rate must be at least 20 kHz");
  require(cfg.hold_s >= 0.1, "hold before release must cover the baseline window");
  require(cfg.settle_s >= 0.3, "settle time must cover the rest window");
  require(cfg.height_jitter_cm >= 0.0, "height jitter must be >= 0");
  require(cfg.volts_to_newtons > 0.0, "calibration scale must be positive");
  require(cfg.break_fraction >= 0.0 && cfg.break_fraction < 1.0, "break fraction must be in [0, 1)");
  require(cfg.break_decay_s > 0.0 && cfg.break_gap_mm >= 0.0 && cfg.fracture_time_s >= 0.0,
          "break morphology parameters out of range");
  require(cfg.seat_stiffness_ratio > 0.0, "seat stiffness ratio must be positive");
  require(cfg.settle_damping_ratio > 1.0, "settle damping must be overdamped");
  if (cfg.part_break_threshold_n) require(*cfg.part_break_threshold_n > 0.0, "break threshold must be positive");

  const double k_max = cfg.contact_stiffness_n_m * std::max(1.0, cfg.part_break_threshold_n ? cfg.seat_stiffness_ratio : 1.0);
  const double omega = std::sqrt(k_max / cfg.mass_kg);
  const double decay = std::max(cfg.contact_damping_n_s_m / (2.0 * cfg.mass_kg), cfg.settle_damping_ratio * omega);
  const double dt = 1.0 / cfg.integration_rate_hz;
  if (dt * (omega + decay) > 0.1) {
    fail(ErrorKind::Stability, "integration step " + std::to_string(dt) + " s is too large for stiffness " +
                                   std::to_string(k_max) + " N/m; raise integration_rate_hz above " +
                                   std::to_string(10.0 * (omega + decay)) + " Hz");
  }
}

struct ContactSample {
  double x_m;
  double force_n;
};

}  // namespace detail

inline SimResult simulate_drop(const SimConfig& cfg) {
  detail::validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  const double g = units::kGravity;
  const double m = cfg.mass_kg;
  const double k = cfg.contact_stiffness_n_m;
  const double k_seat = k * cfg.seat_stiffness_ratio;
  const double jitter = cfg.height_jitter_cm > 0.0 ? cfg.height_jitter_cm * unit(rng) : 0.0;
  const double h_m = units::cm_to_m(std::max(0.0, cfg.drop_height_cm + jitter));
  const double eta = cfg.rail_efficiency;

  SimTruth truth;
  truth.drop_height_cm = units::m_to_cm(h_m);
  truth.v_impact_m_s = eta * std::sqrt(2.0 * g * h_m);
  truth.kinetic_energy_j = 0.5 * m * truth.v_impact_m_s * truth.v_impact_m_s;

  const double x_static = m * g / k;
  const double z_contact_mm = cfg.rest_position_mm + units::m_to_mm(x_static);
  const double g_rail = eta * eta * g;
  const bool placed = h_m == 0.0;
  const double t_fall = placed ? 0.0 : truth.v_impact_m_s / g_rail;
  const double t_contact = placed ? 0.0 : cfg.hold_s + t_fall;
  truth.t_impact_s = t_contact;
  const double t_end = t_contact + cfg.settle_s + (placed ? cfg.hold_s : 0.0);

  // Contact phase, explicit fixed step (semi-implicit Euler). x is
  // compression below first contact, positive down.
  const double dt = 1.0 / cfg.integration_rate_hz;
  const std::size_t steps = static_cast<std::size_t>(std::ceil((t_end - t_contact) / dt)) + 2;
  std::vector<detail::ContactSample> fine;
  fine.reserve(steps);

  double x = placed ? x_static : 0.0;
  double v = placed ? 0.0 : truth.v_impact_m_s;
  bool cracking = false;
  bool broken = false;
  bool settling = placed;
  double break_force = 0.0;
  double t_crack = 0.0;
  double t_break = 0.0;
  double x_seat = 0.0;
  double x_max = x;

  auto catch_damping = [&](bool on_seat) {
    return cfg.settle_damping_ratio * 2.0 * std::sqrt((on_seat ? k_seat : k) * m);
  };

  auto contact_force = [&](double t, double x_now, double v_now, bool& breaks_now) {
    breaks_now = false;
    if (cracking && !broken) {
      breaks_now = t - t_crack >= cfg.fracture_time_s;
      return *cfg.part_break_threshold_n;
    }
    if (!broken) {
      double f = x_now > 0.0 ? std::max(0.0, k * x_now + cfg.contact_damping_n_s_m * v_now) : 0.0;
      if (cfg.part_break_threshold_n && f >= *cfg.part_break_threshold_n) {
        cracking = true;
        t_crack = t;
        breaks_now = cfg.fracture_time_s == 0.0;
        f = *cfg.part_break_threshold_n;
      }
      return f;
    }
    double f = cfg.break_fraction * break_force * std::exp(-(t - t_break) / cfg.break_decay_s);
    const double xs = x_now - x_seat;
    if (xs > 0.0) f += std::max(0.0, k_seat * xs + cfg.contact_damping_n_s_m * v_now);
    return f;
  };

  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t_contact + static_cast<double>(i) * dt;
    bool breaks_now = false;
    const double f = contact_force(t, x, v, breaks_now);
    fine.push_back({x, f});
    truth.peak_force_n = std::max(truth.peak_force_n, f);
    if (breaks_now) {
      broken = true;
      break_force = f;
      t_break = t;
      x_seat = x + units::mm_to_m(cfg.break_gap_mm);
    }
    const double brake = settling && v < 0.0 ? -catch_damping(broken) * v : 0.0;
    v += (g - (f - brake) / m) * dt;
    x += v * dt;
    if (!settling && v <= 0.0) settling = true;
    if (x > x_max) {
      x_max = x;
      truth.t_max_compression_s = t + dt;
    }
  }

  truth.broke = broken || cracking;
  const double x_rest = broken ? x_seat + m * g / k_seat : x_static;
  truth.d_stop_m = placed ? 0.0 : x_max - x_rest;
  truth.peak_elastic_energy_j = broken ? 0.0 : 0.5 * k * x_max * x_max;
  truth.gravity_work_j = placed ? 0.0 : m * g * x_max;

  auto contact_at = [&](double t) {
    const double idx = (t - t_contact) / dt;
    const std::size_t i = std::min(static_cast<std::size_t>(idx), fine.size() - 2);
    const double w = std::clamp(idx - static_cast<double>(i), 0.0, 1.0);
    return detail::ContactSample{fine[i].x_m + w * (fine[i + 1].x_m - fine[i].x_m),
                                 fine[i].force_n + w * (fine[i + 1].force_n - fine[i].force_n)};
  };

  std::vector<trace::ForceSample> force_samples;
  const auto n_force = static_cast<std::size_t>(std::floor(t_end * cfg.force_rate_hz)) + 1;
  force_samples.reserve(n_force);
  for (std::size_t i = 0; i < n_force; ++i) {
    const double t = static_cast<double>(i) / cfg.force_rate_hz;
    const double f = t < t_contact ? 0.0 : contact_at(t).force_n;
    const double noise = cfg.noise_sigma_v > 0.0 ? cfg.noise_sigma_v * unit(rng) : 0.0;
    force_samples.push_back({t, f / cfg.volts_to_newtons + noise});
  }

  std::vector<trace::KinSample> kin_samples;
  const auto n_kin = static_cast<std::size_t>(std::floor(t_end * cfg.kin_rate_hz)) + 1;
  kin_samples.reserve(n_kin);
  for (std::size_t i = 0; i < n_kin; ++i) {
    const double t = static_cast<double>(i) / cfg.kin_rate_hz;
    double above_contact_m = 0.0;
    if (t < cfg.hold_s && !placed) {
      above_contact_m = h_m;
    } else if (t < t_contact) {
      const double tau = t - cfg.hold_s;
      above_contact_m = h_m - 0.5 * g_rail * tau * tau;
    } else {
      above_contact_m = -contact_at(t).x_m;
    }
    kin_samples.push_back({t, z_contact_mm + units::m_to_mm(above_contact_m)});
  }

  trace::AnalysisConfig acfg;
  return {trace::make_force_trace(std::move(force_samples), acfg, cfg.force_rate_hz),
          trace::make_kin_trace(std::move(kin_samples), acfg, cfg.kin_rate_hz), truth};
}

/// One simulated trial of a campaign fixture.
struct FixtureTrial {
  double height_cm = 0.0;
  std::size_t index = 0;  // repeat number at this height
  SimResult result;
};

/// Per-trial seeds derived from the template seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (n + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Simulates one trial per entry of `heights_cm` against a part of the given
/// strength (none: the part never breaks).
inline std::vector<FixtureTrial> generate_campaign_fixture(std::optional<double> part_strength_n,
                                                           const SimConfig& templ,
                                                           const std::vector<double>& heights_cm) {
  std::vector<FixtureTrial> out;
  out.reserve(heights_cm.size());
  for (std::size_t i = 0; i < heights_cm.size(); ++i) {
    if (!(heights_cm[i] > 0.0)) fail(ErrorKind::InvalidInput, "fixture heights must be positive");
    std::size_t repeat = 0;
    for (std::size_t j = 0; j < i; ++j)
      if (heights_cm[j] == heights_cm[i]) ++repeat;
    SimConfig cfg = templ;
    cfg.drop_height_cm = heights_cm[i];
    cfg.part_break_threshold_n = part_strength_n;
    cfg.seed = derive_seed(templ.seed, i);
    out.push_back({heights_cm[i], repeat, simulate_drop(cfg)});
  }
  return out;
}

}  // namespace droptest::simrig
