#include "attsync/sphere.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace attsync;

namespace {

Vec3 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng));
}

void expect_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_LT((a - b).norm(), tol) << "a=" << a.transpose() << " b=" << b.transpose();
}

}  // namespace

TEST(Skew, StandardBasis) {
  EXPECT_EQ(Vec3(skew(Vec3(0, 0, 1)) * Vec3(1, 0, 0)), Vec3(0, 1, 0));
  EXPECT_EQ(Vec3(skew(Vec3(1, 0, 0)) * Vec3(0, 1, 0)), Vec3(0, 0, 1));
}

TEST(Skew, AntisymmetryAndJacobiConsistency) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a = random_vec(rng);
    const Vec3 b = random_vec(rng);
    const Mat3 s = skew(a);
    EXPECT_TRUE((s + s.transpose()).isZero(0.0));
    EXPECT_EQ((s * a).norm(), 0.0);
    EXPECT_LT((skew(a) * b + skew(b) * a).norm(), 1e-14);
    expect_near(s * b, a.cross(b), 1e-14);
  }
}

TEST(ChordalParam, Landmarks) {
  const UnitVector3 n(0.3, -0.4, 0.5);
  EXPECT_EQ(chordal_param(n, n), 0.0);
  EXPECT_NEAR(chordal_param(n, -n), 2.0, 1e-15);
  EXPECT_NEAR(chordal_param(UnitVector3(1, 0, 0), UnitVector3(0, 1, 0)), 1.0, 1e-15);
}

TEST(ChordalParam, SymmetricAndPreciseForSmallAngles) {
  const double theta = 1e-7;
  const UnitVector3 a(1, 0, 0);
  const UnitVector3 b(std::cos(theta), std::sin(theta), 0);
  EXPECT_EQ(chordal_param(a, b), chordal_param(b, a));
  // 1 - cos(theta) = 2 sin^2(theta/2)
  const double exact = 2.0 * std::pow(std::sin(theta / 2.0), 2);
  EXPECT_NEAR(chordal_param(a, b) / exact, 1.0, 1e-8);
}

TEST(GeodesicAngle, Landmarks) {
  const UnitVector3 n(0.1, 0.7, -0.2);
  EXPECT_EQ(geodesic_angle(n, n), 0.0);
  EXPECT_NEAR(geodesic_angle(n, -n), std::numbers::pi, 1e-15);
  EXPECT_NEAR(geodesic_angle(UnitVector3(1, 0, 0), UnitVector3(0, 1, 0)), std::numbers::pi / 2, 1e-15);
}

TEST(GeodesicAngle, ResolvesTinyAngles) {
  const double theta = 3e-10;
  EXPECT_NEAR(geodesic_angle(UnitVector3(1, 0, 0), UnitVector3(std::cos(theta), std::sin(theta), 0)) / theta,
              1.0, 1e-9);
}

TEST(RotateStep, QuarterTurnAboutZ) {
  const auto n = rotate_step(UnitVector3(1, 0, 0), AngularVelocity(0, 0, std::numbers::pi / 2), 1.0);
  expect_near(n.vec(), Vec3(0, 1, 0), 1e-12);
}

TEST(RotateStep, ZeroRateIsIdentity) {
  const UnitVector3 n(0.2, -0.3, 0.9);
  EXPECT_EQ(rotate_step(n, AngularVelocity(0, 0, 0), 1.0).vec(), n.vec());
}

TEST(RotateStep, PlanarRotationMatchesClosedForm) {
  const auto n = rotate_step(UnitVector3(1, 0, 0), AngularVelocity(0, 0, 1), 0.1);
  expect_near(n.vec(), Vec3(std::cos(0.1), std::sin(0.1), 0), 1e-15);
}

TEST(RotateStep, SmallAngleBranchAgreesWithRodrigues) {
  // Just either side of the 1e-12 switch.
  const UnitVector3 n(0.3, 0.4, 0.5);
  const Vec3 axis = Vec3(1, 2, -1).normalized();
  const auto below = rotate_step(n, AngularVelocity(axis * 0.99e-12), 1.0);
  const auto above = rotate_step(n, AngularVelocity(axis * 1.01e-12), 1.0);
  expect_near(below.vec(), n.vec() + 0.99e-12 * axis.cross(n.vec()), 1e-15);
  expect_near(above.vec(), n.vec() + 1.01e-12 * axis.cross(n.vec()), 1e-15);
}

TEST(RotateStep, RejectsNonPositiveStep) {
  EXPECT_THROW(rotate_step(UnitVector3(), AngularVelocity(0, 0, 1), 0.0), std::invalid_argument);
}

TEST(RotateStep, PreservesNormOverLongRuns) {
  std::mt19937_64 rng(7);
  UnitVector3 n(random_vec(rng));
  for (int i = 0; i < 100000; ++i) {
    n = rotate_step(n, AngularVelocity(random_vec(rng)), 0.01);
    ASSERT_LT(std::abs(n.vec().norm() - 1.0), 1e-12);
  }
}

TEST(UnitVector, RejectsZero) { EXPECT_THROW(UnitVector3(0, 0, 0), std::invalid_argument); }

// ---------------------------------------------------------------------------

namespace {
const OmegaFunction kInverseT = [](double t) { return AngularVelocity(0, 0, 1.0 / t); };
}

TEST(DriveWithOmega, LnTClosedFormAtE) {
  const auto traj = drive_with_omega(UnitVector3(1, 0, 0), kInverseT, 1.0, std::numbers::e, 1e-4);
  EXPECT_DOUBLE_EQ(traj.back().t, std::numbers::e);
  expect_near(traj.back().n.vec(), Vec3(std::cos(1.0), std::sin(1.0), 0), 1e-8);
  for (const auto& p : traj) ASSERT_LT(std::abs(p.n.vec().norm() - 1.0), 1e-12);
}

TEST(DriveWithOmega, ZeroOmegaIsConstant) {
  const UnitVector3 n0(0.5, 0.5, -0.2);
  const auto traj = drive_with_omega(n0, [](double) { return AngularVelocity(); }, 0.0, 3.0, 0.1);
  for (const auto& p : traj) EXPECT_EQ(p.n.vec(), n0.vec());
}

TEST(DriveWithOmega, FullRevolutionReturnsHome) {
  const auto traj = drive_with_omega(UnitVector3(1, 0, 0), [](double) { return AngularVelocity(0, 0, 1); },
                                     0.0, 2.0 * std::numbers::pi, 1e-3);
  expect_near(traj.back().n.vec(), Vec3(1, 0, 0), 1e-8);
}

TEST(DriveWithOmega, SecondOrderConvergence) {
  auto endpoint_error = [](double h) {
    const auto traj = drive_with_omega(UnitVector3(1, 0, 0), kInverseT, 1.0, std::exp(2.0), h);
    return (traj.back().n.vec() - Vec3(std::cos(2.0), std::sin(2.0), 0)).norm();
  };
  double prev = endpoint_error(0.1);
  for (double h : {0.05, 0.025}) {
    const double e = endpoint_error(h);
    EXPECT_GE(prev / e, 3.5) << "h=" << h;
    prev = e;
  }
}

TEST(DriveWithOmega, TimeVaryingAxisStaysOnSphere) {
  const OmegaFunction w = [](double t) { return AngularVelocity(std::sin(t), std::cos(3 * t), 0.5); };
  const auto traj = drive_with_omega(UnitVector3(0, 0, 1), w, 0.0, 50.0, 1e-2);
  for (const auto& p : traj) ASSERT_LT(std::abs(p.n.vec().norm() - 1.0), 1e-12);
}

TEST(DriveWithOmega, RejectsNonFiniteOmega) {
  const OmegaFunction bad = [](double t) {
    return t > 0.3 ? AngularVelocity(0, 0, std::nan("")) : AngularVelocity(0, 0, 1);
  };
  EXPECT_THROW(drive_with_omega(UnitVector3(), bad, 0.0, 1.0, 0.25), std::domain_error);
}
