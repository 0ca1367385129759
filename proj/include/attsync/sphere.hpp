#pragma once

// Geometry and kinematics of reduced attitudes (unit vectors on S^2).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace attsync {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point on the unit sphere. Construction always renormalizes, so every
/// instance satisfies |n| = 1 to rounding.
class UnitVector3 {
public:
  UnitVector3() : v_(1.0, 0.0, 0.0) {}

  explicit UnitVector3(const Vec3& v) : v_(v) {
    const double norm = v.norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      throw std::invalid_argument("UnitVector3: cannot normalize a zero or non-finite vector");
    }
    v_ /= norm;
  }

  UnitVector3(double x, double y, double z) : UnitVector3(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  UnitVector3 operator-() const { return UnitVector3(-v_); }

  friend bool operator==(const UnitVector3& a, const UnitVector3& b) { return a.v_ == b.v_; }

private:
  Vec3 v_;
};

/// Angular velocity in the inertial frame, radians per unit time.
struct AngularVelocity {
  Vec3 w = Vec3::Zero();

  AngularVelocity() = default;
  explicit AngularVelocity(const Vec3& v) : w(v) {}
  AngularVelocity(double wx, double wy, double wz) : w(wx, wy, wz) {}

  bool finite() const { return w.allFinite(); }
};

/// Cross-product matrix: skew(v) * u == v x u.
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// s = 1 - n1.n2 in [0, 2]. For nearby vectors the equivalent |n1 - n2|^2 / 2
/// is used, which keeps full relative precision as s -> 0.
inline double chordal_param(const UnitVector3& n1, const UnitVector3& n2) {
  const double c = n1.vec().dot(n2.vec());
  double s = c > 0.0 ? 0.5 * (n1.vec() - n2.vec()).squaredNorm() : 1.0 - c;
  if (s < 0.0) s = 0.0;
  if (s > 2.0) s = 2.0;
  return s;
}

/// Great-circle angle in [0, pi]. Equal to arccos(clamp(n1.n2)) but computed
/// through atan2 so that tiny angles are not lost to rounding.
inline double geodesic_angle(const UnitVector3& n1, const UnitVector3& n2) {
  return std::atan2(n1.vec().cross(n2.vec()).norm(), n1.vec().dot(n2.vec()));
}

/// exp(S(w h)) n by the Rodrigues formula, renormalized.
inline UnitVector3 rotate_step(const UnitVector3& n, const AngularVelocity& w, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rotate_step: timestep must be positive");
  if (!w.finite()) throw std::invalid_argument("rotate_step: non-finite angular velocity");

  const Vec3 phi = w.w * h;
  const double angle = phi.norm();
  const Vec3 cross = phi.cross(n.vec());
  const Vec3 cross2 = phi.cross(cross);

  double a;  // sin(angle)/angle
  double b;  // (1 - cos(angle))/angle^2
  if (angle < 1e-12) {
    const double a2 = angle * angle;
    a = 1.0 - a2 / 6.0;
    b = 0.5 - a2 / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return UnitVector3(n.vec() + a * cross + b * cross2);
}

struct TimedVector {
  double t;
  UnitVector3 n;
};

using OmegaFunction = std::function<AngularVelocity(double)>;

/// Integrates n' = S(w(t)) n from t0 to t1 with the exponential midpoint rule
/// (order 2). The step is shrunk so that t1 is hit exactly; every step is
/// returned, including t0.
inline std::vector<TimedVector> drive_with_omega(const UnitVector3& n0, const OmegaFunction& omega,
                                                 double t0, double t1, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("drive_with_omega: step must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("drive_with_omega: t1 must exceed t0");

  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
  const double step = (t1 - t0) / static_cast<double>(steps);

  std::vector<TimedVector> out;
  out.reserve(steps + 1);
  out.push_back({t0, n0});
  UnitVector3 n = n0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    const AngularVelocity w = omega(t + 0.5 * step);
    if (!w.finite()) {
      throw std::domain_error("drive_with_omega: non-finite angular velocity at t=" +
                              std::to_string(t + 0.5 * step));
    }
    n = rotate_step(n, w, step);
    out.push_back({k + 1 == steps ? t1 : t0 + static_cast<double>(k + 1) * step, n});
  }
  return out;
}

/// Applies a fixed rotation matrix to a unit vector.
inline UnitVector3 rotate(const Mat3& r, const UnitVector3& n) { return UnitVector3(r * n.vec()); }

}  // namespace attsync
