#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "droptest/mechanics.hpp"
#include "droptest/units.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

using namespace droptest;
using namespace droptest::mechanics;

namespace {

using support::expect_error;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(TorsionalStress, ZeroTorqueIsZero) { EXPECT_EQ(torsional_stress({0.0, 0.0, 0.01}), 0.0); }

TEST(TorsionalStress, MatchesHandEvaluation) {
  EXPECT_LT(rel(torsional_stress({1.0, 0.0, 0.01}), oracle::kTorsionT1D10mm), 1e-14);
  EXPECT_LT(rel(torsional_stress({1.0, 0.0, 0.02}), oracle::kTorsionT1D20mm), 1e-14);
  EXPECT_NEAR(torsional_stress({1.0, 0.0, 0.01}), 5.0930e6, 5e1);
}

TEST(TorsionalStress, RejectsBadSection) {
  expect_error(ErrorKind::InvalidInput, [] { torsional_stress({1.0, 0.0, 0.0}); });
  expect_error(ErrorKind::InvalidInput, [] { torsional_stress({1.0, 0.0, -0.01}); });
  expect_error(ErrorKind::InvalidInput, [] { torsional_stress({-1.0, 0.0, 0.01}); });
}

TEST(BendingStress, MatchesHandEvaluation) {
  EXPECT_EQ(bending_stress({0.0, 0.0, 0.01}), 0.0);
  EXPECT_LT(rel(bending_stress({0.0, 1.0, 0.01}), oracle::kBendingM1D10mm), 1e-14);
  EXPECT_LT(rel(bending_stress({0.0, 2.0, 0.01}), oracle::kBendingM2D10mm), 1e-14);
}

TEST(BendingStress, RejectsNonPositiveDiameter) {
  expect_error(ErrorKind::InvalidInput, [] { bending_stress({0.0, 1.0, 0.0}); });
}

TEST(SectionStress, LinearInLoadAndInverseCubeInDiameter) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> load(1e-3, 500.0), dia(1e-3, 0.08), scale(0.05, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double T = load(rng), M = load(rng), d = dia(rng), k = scale(rng), s = scale(rng);
    const double tau = torsional_stress({T, M, d});
    const double sigma = bending_stress({T, M, d});
    ASSERT_LT(rel(torsional_stress({k * T, M, d}), k * tau), 1e-12);
    ASSERT_LT(rel(bending_stress({T, k * M, d}), k * sigma), 1e-12);
    ASSERT_LT(rel(torsional_stress({T, M, s * d}), tau / (s * s * s)), 1e-12);
    ASSERT_LT(rel(bending_stress({T, M, s * d}), sigma / (s * s * s)), 1e-12);
    // Same section, same load: bending is exactly twice torsion.
    ASSERT_LT(rel(bending_stress({0.0, T, d}), 2.0 * torsional_stress({T, 0.0, d})), 1e-15);
  }
}

TEST(VonMises, Identities) {
  EXPECT_EQ(von_mises({0.0, 0.0, 0.0}), 0.0);
  EXPECT_EQ(von_mises({1.0e8, 0.0, 0.0}), 1.0e8);
  EXPECT_LT(rel(von_mises({0.0, 0.0, 1.0e6}), std::sqrt(3.0) * 1.0e6), 1e-15);
  EXPECT_NEAR(von_mises({0.0, 0.0, 1.0e6}), 1.7321e6, 1e2);
  EXPECT_EQ(von_mises({-3.0e7, 0.0, 0.0}), 3.0e7);
}

TEST(VonMises, EqualBiaxialEqualsEitherStress) {
  // sqrt(s^2 - s^2 + s^2) = |s|
  EXPECT_LT(rel(von_mises({2.5e7, 2.5e7, 0.0}), 2.5e7), 1e-15);
}

TEST(VonMises, PureShearStaysReal) {
  const double s = von_mises({0.0, 0.0, -4.0e6});
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_GT(s, 0.0);
}

TEST(VonMises, RejectsNonFinite) {
  expect_error(ErrorKind::InvalidInput, [] { von_mises({NAN, 0.0, 0.0}); });
  expect_error(ErrorKind::InvalidInput, [] { von_mises({0.0, INFINITY, 0.0}); });
}

TEST(VonMises, NonNegativeSymmetricHomogeneous) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> comp(-1e9, 1e9), scale(0.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const PlaneStress s{comp(rng), comp(rng), comp(rng)};
    const double k = scale(rng);
    const double e = von_mises(s);
    ASSERT_GE(e, 0.0);
    ASSERT_EQ(e, von_mises({s.sigma_y, s.sigma_x, s.tau_xy}));
    ASSERT_NEAR(von_mises({k * s.sigma_x, k * s.sigma_y, k * s.tau_xy}), k * e, 1e-12 * k * e + 1e-300);
  }
}

TEST(VoltageToForce, ScaleFactor) {
  EXPECT_NEAR(voltage_to_force(3.78), 75.6, 1e-12);
  EXPECT_EQ(voltage_to_force(0.0), 0.0);
  EXPECT_NEAR(voltage_to_force(3.25), 65.0, 1e-12);
  EXPECT_NEAR(voltage_to_force(1.0, {10.0, 0.01}), 10.0, 1e-12);
}

TEST(VoltageToForce, RejectsNegativeVoltageAndBadScale) {
  expect_error(ErrorKind::InvalidInput, [] { voltage_to_force(-0.1); });
  expect_error(ErrorKind::InvalidInput, [] { voltage_to_force(1.0, {0.0, 0.01}); });
}

TEST(TheoreticalImpactForce, ReferenceExample) {
  const double f = theoretical_impact_force({0.735, 0.860634, 0.003060});
  EXPECT_NEAR(f, 89.0, 0.1);
  EXPECT_NEAR(f, oracle::kTheoreticalN, 1e-10);
}

TEST(TheoreticalImpactForce, HandCases) {
  EXPECT_EQ(theoretical_impact_force({1.0, 0.0, 0.005}), 0.0);
  EXPECT_NEAR(theoretical_impact_force({1.0, 1.0, 0.005}), 100.0, 1e-12);
}

TEST(TheoreticalImpactForce, DegenerateStoppingDistance) {
  expect_error(ErrorKind::DegenerateKinematics, [] { theoretical_impact_force({1.0, 1.0, 0.0}); });
  expect_error(ErrorKind::DegenerateKinematics, [] { theoretical_impact_force({1.0, 1.0, -0.001}); });
  expect_error(ErrorKind::InvalidInput, [] { theoretical_impact_force({0.0, 1.0, 0.001}); });
}

TEST(TheoreticalImpactForce, UnitRoundTripInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(0.1, 5.0), v(0.0, 3.0), d(1e-4, 0.02);
  for (int i = 0; i < 500; ++i) {
    const ImpactInputs in{m(rng), v(rng), d(rng)};
    const ImpactInputs round{in.mass_kg, units::mm_to_m(units::m_to_mm(in.max_velocity_m_s)),
                             units::mm_to_m(units::m_to_mm(in.stopping_distance_m))};
    const double a = theoretical_impact_force(in), b = theoretical_impact_force(round);
    ASSERT_LE(std::abs(a - b), 1e-9 * std::max(a, 1e-300));
  }
}

TEST(ValidationError, RelativeToActual) {
  EXPECT_NEAR(validation_error(89.0, 75.6), 17.7, 0.1);
  EXPECT_EQ(validation_error(50.0, 50.0), 0.0);
  EXPECT_NEAR(validation_error(60.0, 50.0), 20.0, 1e-12);
  EXPECT_LT(validation_error(40.0, 50.0), 0.0);
  expect_error(ErrorKind::InvalidInput, [] { validation_error(10.0, 0.0); });
}

TEST(ReferencePipeline, ReproducesPublishedRow) {
  const double f_theor = theoretical_impact_force(
      {oracle::kMassKg, units::mm_to_m(oracle::kVelocityMmS), units::mm_to_m(oracle::kRestMm - oracle::kLowestMm)});
  const double f_actual = voltage_to_force(oracle::kPeakV);
  const double err = validation_error(f_theor, f_actual);
  EXPECT_NEAR(f_theor, 89.0, 0.1);
  EXPECT_NEAR(f_actual, 75.6, 1e-9);
  EXPECT_NEAR(err, 17.7, 0.1);
  EXPECT_NEAR(err, oracle::kErrorPct, 1e-9);
}

TEST(SlotSectionScreen, BeamFormula) {
  EXPECT_LT(rel(slot_section_screen(65.0, 0.05, 0.01, 0.01, 0.001), oracle::kSlotScreen65N), 1e-12);
  EXPECT_EQ(slot_section_screen(0.0, 0.05, 0.01, 0.01, 0.001), 0.0);
}

TEST(SlotSectionScreen, StrictlyIncreasingInSlotDepth) {
  double prev = slot_section_screen(65.0, 0.05, 0.01, 0.01, 0.0);
  for (int i = 1; i < 100; ++i) {
    const double s = slot_section_screen(65.0, 0.05, 0.01, 0.01, i * 0.0000999);
    ASSERT_GT(s, prev);
    prev = s;
  }
}

TEST(SlotSectionScreen, SeveredAndInvalid) {
  expect_error(ErrorKind::SeveredSection, [] { slot_section_screen(65.0, 0.05, 0.01, 0.01, 0.01); });
  expect_error(ErrorKind::SeveredSection, [] { slot_section_screen(65.0, 0.05, 0.01, 0.01, 0.02); });
  expect_error(ErrorKind::InvalidInput, [] { slot_section_screen(65.0, 0.0, 0.01, 0.01, 0.001); });
  expect_error(ErrorKind::InvalidInput, [] { slot_section_screen(-1.0, 0.05, 0.01, 0.01, 0.001); });
}
