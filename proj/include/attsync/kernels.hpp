#pragma once

// Distance kernels d(n1, n2) = f(1 - n1.n2), the edge errors they induce,
// and numerical diagnostics for their endpoint behaviour.

#include "attsync/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace attsync {

enum class KernelClass { P, P0, PInf, PBar0, Custom };

inline std::string to_string(KernelClass c) {
  switch (c) {
    case KernelClass::P: return "P";
    case KernelClass::P0: return "P0";
    case KernelClass::PInf: return "Pinf";
    case KernelClass::PBar0: return "Pbar0";
    case KernelClass::Custom: return "custom";
  }
  return "custom";
}

using ScalarFunction = std::function<double(double)>;

/// Upper guard on s when evaluating f': kernels with f -> inf at s = 2 have
/// unbounded derivatives there.
inline constexpr double kEndpointGuard = 1e-6;

/// A pair (f, f') on s in (0, 2). Immutable once built.
class DistanceKernel {
public:
  DistanceKernel(std::string name, ScalarFunction f, ScalarFunction f_prime,
                 KernelClass declared = KernelClass::Custom)
      : name_(std::move(name)), f_(std::move(f)), fp_(std::move(f_prime)), class_(declared) {
    if (!f_ || !fp_) throw std::invalid_argument("DistanceKernel: f and f' are required");
  }

  const std::string& name() const { return name_; }
  KernelClass declared_class() const { return class_; }

  double f(double s) const { return f_(s); }

  /// f'(s) with s clamped to [0, 2 - kEndpointGuard].
  double f_prime(double s) const { return fp_(std::clamp(s, 0.0, 2.0 - kEndpointGuard)); }

  /// Raw derivative without the endpoint guard, for limit estimation.
  double f_prime_raw(double s) const { return fp_(s); }

private:
  std::string name_;
  ScalarFunction f_;
  ScalarFunction fp_;
  KernelClass class_;
};

/// f(s) = a s.
inline DistanceKernel linear_cos_kernel(double gain = 1.0) {
  if (!(gain > 0.0)) throw std::invalid_argument("linear_cos: gain must be positive");
  return DistanceKernel(
      "linear_cos", [gain](double s) { return gain * s; }, [gain](double) { return gain; },
      KernelClass::PBar0);
}

/// f(s) = (sqrt(s(2-s))(s-1) + arccos(1-s)) / 8, whose derivative reduces to
/// sqrt(s(2-s)) / 4.
inline DistanceKernel arccos_sqrt_kernel() {
  return DistanceKernel(
      "arccos_sqrt",
      [](double s) {
        const double q = std::sqrt(std::max(0.0, s * (2.0 - s)));
        return 0.125 * (q * (s - 1.0) + std::acos(std::clamp(1.0 - s, -1.0, 1.0)));
      },
      [](double s) { return 0.25 * std::sqrt(std::max(0.0, s * (2.0 - s))); }, KernelClass::P0);
}

/// f(s) = a s^2 / 2. Flat at s = 0, used in tests.
inline DistanceKernel quadratic_kernel(double gain = 1.0) {
  if (!(gain > 0.0)) throw std::invalid_argument("quadratic: gain must be positive");
  return DistanceKernel(
      "quadratic", [gain](double s) { return 0.5 * gain * s * s; },
      [gain](double s) { return gain * s; }, KernelClass::Custom);
}

inline const std::vector<std::string>& builtin_kernel_names() {
  static const std::vector<std::string> names{"linear_cos", "arccos_sqrt", "quadratic"};
  return names;
}

/// Looks a kernel up by name. `gain` applies to linear_cos and quadratic.
inline DistanceKernel builtin_kernel(const std::string& name, double gain = 1.0) {
  if (name == "linear_cos") return linear_cos_kernel(gain);
  if (name == "arccos_sqrt") return arccos_sqrt_kernel();
  if (name == "quadratic") return quadratic_kernel(gain);
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

inline double distance(const DistanceKernel& k, const UnitVector3& n1, const UnitVector3& n2) {
  return k.f(chordal_param(n1, n2));
}

struct EdgeError {
  std::size_t k = 0;
  Vec3 vector = Vec3::Zero();
};

/// e = f'(1 - nt.nh) (nt x nh). Lies in the tangent plane at the tail.
inline EdgeError edge_error(const DistanceKernel& kernel, const UnitVector3& tail,
                            const UnitVector3& head, std::size_t k = 0) {
  const double g = kernel.f_prime(chordal_param(tail, head));
  return {k, g * tail.vec().cross(head.vec())};
}

/// S(n1) grad1 + S(n2) grad2 for an arbitrary scalar field with the given
/// gradients. Vanishes for fields invariant under a common rotation.
inline Vec3 rotation_residual(const UnitVector3& n1, const Vec3& grad1, const UnitVector3& n2,
                              const Vec3& grad2) {
  return n1.vec().cross(grad1) + n2.vec().cross(grad2);
}

/// Residual for eta(n1, n2) = f(1 - n1.n2) using its analytic gradients
/// -f'(s) n2 and -f'(s) n1.
inline Vec3 pde_residual(const DistanceKernel& k, const UnitVector3& n1, const UnitVector3& n2) {
  const double g = k.f_prime(chordal_param(n1, n2));
  return rotation_residual(n1, -g * n2.vec(), n2, -g * n1.vec());
}

/// Worst relative mismatch between f' and a central difference of f on an
/// evenly spaced grid over [lo, hi].
inline double derivative_mismatch(const DistanceKernel& k, std::size_t points = 1000,
                                  double lo = 0.01, double hi = 1.99) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double h = 1e-5 * std::max(1.0, s);
    const double fd = (k.f(s + h) - k.f(s - h)) / (2.0 * h);
    const double an = k.f_prime(s);
    const double scale = std::max(std::abs(an), 1e-12);
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

struct LimitEstimate {
  double value = 0.0;      // extrapolated limit, meaningful when !divergent
  bool divergent = false;
  std::vector<double> samples;  // f'(s) sqrt(dist) along the ladder
};

struct ClassLimits {
  LimitEstimate at_zero;  // lim s->0+ f'(s) sqrt(s)
  LimitEstimate at_two;   // lim s->2- f'(s) sqrt(2 - s)
};

namespace detail {

/// Reads a limit off samples taken at distances 1e-3 ... 1e-8 from the
/// endpoint. Monotone growth past 1e6, or sustained power-law growth, is
/// divergence; sustained power-law decay extrapolates to 0; anything flatter
/// is taken at its last sample.
inline LimitEstimate read_ladder(std::vector<double> samples) {
  LimitEstimate est;
  est.samples = std::move(samples);
  const auto& v = est.samples;
  for (double x : v) {
    if (!std::isfinite(x)) throw std::domain_error("class_limits: non-finite kernel evaluation");
  }

  const bool increasing = std::is_sorted(v.begin(), v.end());
  const std::size_t n = v.size();
  if (v.back() == 0.0) {
    est.value = 0.0;
    return est;
  }
  if (increasing && v.back() > 1e6) {
    est.divergent = true;
    return est;
  }
  // Log-log slope per decade over the last three rungs.
  auto slope = [&](std::size_t i) { return std::log10(std::abs(v[i + 1]) / std::abs(v[i])); };
  const double s1 = v[n - 3] != 0.0 ? slope(n - 3) : 0.0;
  const double s2 = slope(n - 2);
  constexpr double kPowerLaw = 0.05;
  if (increasing && s1 > kPowerLaw && s2 > kPowerLaw) {
    est.divergent = true;
  } else if (s1 < -kPowerLaw && s2 < -kPowerLaw) {
    est.value = 0.0;
  } else {
    est.value = v.back();
  }
  return est;
}

}  // namespace detail

inline ClassLimits class_limits(const DistanceKernel& k) {
  std::vector<double> zero;
  std::vector<double> two;
  for (int e = 3; e <= 8; ++e) {
    const double dist = std::pow(10.0, -e);
    zero.push_back(k.f_prime_raw(dist) * std::sqrt(dist));
    two.push_back(k.f_prime_raw(2.0 - dist) * std::sqrt(dist));
  }
  return {detail::read_ladder(std::move(zero)), detail::read_ladder(std::move(two))};
}

struct SandwichReport {
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  bool holds = false;
};

/// Empirical range of d / |e|^2 over `samples` evenly spaced geodesic angles
/// in (0, theta_max].
inline SandwichReport verify_sandwich(const DistanceKernel& k, double theta_max,
                                      std::size_t samples) {
  if (!(theta_max > 0.0 && theta_max < std::numbers::pi)) {
    throw std::invalid_argument("verify_sandwich: theta_max must lie in (0, pi)");
  }
  if (samples == 0) throw std::invalid_argument("verify_sandwich: need at least one sample");

  const UnitVector3 tail(1.0, 0.0, 0.0);
  SandwichReport r;
  r.alpha_lower = std::numeric_limits<double>::infinity();
  r.alpha_upper = 0.0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double theta = theta_max * static_cast<double>(i) / static_cast<double>(samples);
    const UnitVector3 head(std::cos(theta), std::sin(theta), 0.0);
    const double e2 = edge_error(k, tail, head).vector.squaredNorm();
    if (e2 == 0.0) {
      throw std::domain_error("verify_sandwich: edge error vanishes at theta=" +
                              std::to_string(theta));
    }
    const double ratio = distance(k, tail, head) / e2;
    r.alpha_lower = std::min(r.alpha_lower, ratio);
    r.alpha_upper = std::max(r.alpha_upper, ratio);
  }
  r.holds = std::isfinite(r.alpha_lower) && std::isfinite(r.alpha_upper) && r.alpha_lower > 0.0 &&
            r.alpha_upper > 0.0;
  return r;
}

/// Vector saturation x -> sigma(|x|) x.
struct SaturationFunction {
  ScalarFunction sigma_scalar;
  double sigma_max = std::numeric_limits<double>::infinity();
  double sigma_prime_max = std::numeric_limits<double>::infinity();
};

/// sigma(r) = 1 / sqrt(1 + r^2): |sigma(x)| < 1, Jacobian norm <= 1.
inline SaturationFunction smooth_saturation() {
  return {[](double r) { return 1.0 / std::sqrt(1.0 + r * r); }, 1.0, 1.0};
}

inline Vec3 saturation_apply(const SaturationFunction& s, const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0) return Vec3::Zero();
  return s.sigma_scalar(r) * x;
}

/// Central-difference Jacobian of the saturation map at x.
inline Mat3 saturation_jacobian(const SaturationFunction& s, const Vec3& x, double h = 1e-6) {
  Mat3 j;
  const double step = h * std::max(1.0, x.norm());
  for (int c = 0; c < 3; ++c) {
    Vec3 dp = x;
    Vec3 dm = x;
    dp[c] += step;
    dm[c] -= step;
    j.col(c) = (saturation_apply(s, dp) - saturation_apply(s, dm)) / (2.0 * step);
  }
  return j;
}

}  // namespace attsync
