#pragma once

// Unit-hypersphere utilities: uniform and von Mises-Fisher sampling and the
// VMF log-likelihood used by the discriminator.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "visr/error.hpp"
#include "visr/rng.hpp"

namespace visr {

inline constexpr double kUnitNormTolerance = 1e-9;
inline constexpr double kUnitInputTolerance = 1e-6;

/// A d-dimensional vector of unit Euclidean norm.
class UnitVector {
 public:
  /// Throws if `v` is not unit length within kUnitNormTolerance.
  explicit UnitVector(Eigen::VectorXd v) : v_(std::move(v)) {
    if (v_.size() < 1) throw DimensionError("UnitVector must have dimension >= 1");
    const double n = v_.norm();
    if (!(std::abs(n - 1.0) <= kUnitNormTolerance))
      throw InvalidArgument("UnitVector has norm " + std::to_string(n));
  }

  /// Divides by the norm; throws NumericalError if the norm is below `min_norm`.
  static UnitVector normalized(const Eigen::VectorXd& v, double min_norm = 1e-12) {
    const double n = v.norm();
    if (!(n >= min_norm)) throw NumericalError("cannot normalize a vector of norm " + std::to_string(n));
    return UnitVector(v / n);
  }

  static UnitVector basis(int d, int axis) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e(axis) = 1.0;
    return UnitVector(std::move(e));
  }

  int dim() const { return static_cast<int>(v_.size()); }
  double operator()(int i) const { return v_(i); }
  double dot(const UnitVector& other) const { return v_.dot(other.v_); }

  const Eigen::VectorXd& vec() const { return v_; }
  operator const Eigen::VectorXd&() const { return v_; }  // NOLINT(google-explicit-constructor)

 private:
  Eigen::VectorXd v_;
};

struct VmfParams {
  UnitVector mean_direction;
  double concentration;

  VmfParams(UnitVector mu, double kappa) : mean_direction(std::move(mu)), concentration(kappa) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
      throw InvalidArgument("VMF concentration must be finite and >= 0, got " + std::to_string(kappa));
    if (mean_direction.dim() < 2) throw DimensionError("VMF needs dimension >= 2");
  }
};

namespace detail {

inline void require_unit(const Eigen::VectorXd& x, const char* name) {
  const double n = x.norm();
  if (!(std::abs(n - 1.0) <= kUnitInputTolerance))
    throw InvalidArgument(std::string(name) + " must be a unit vector, norm is " + std::to_string(n));
}

inline Eigen::VectorXd standard_normal(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) g(i) = normal(rng);
  return g;
}

inline double beta_sample(double a, double b, Rng& rng) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

}  // namespace detail

/// Normalized standard Gaussian draw.
inline UnitVector sample_uniform_sphere(int d, Rng& rng) {
  if (d < 2) throw InvalidArgument("sphere dimension must be >= 2, got " + std::to_string(d));
  for (;;) {
    Eigen::VectorXd g = detail::standard_normal(d, rng);
    const double n = g.norm();
    if (n > 1e-12) return UnitVector(g / n);
  }
}

inline constexpr int kVmfMaxRejections = 1000;

/// Wood (1994): rejection-sample the cosine t = mu^T x from its marginal
/// density proportional to exp(kappa t) (1 - t^2)^((d-3)/2), then attach a
/// uniformly random tangent direction.
inline UnitVector sample_vmf(const VmfParams& params, Rng& rng) {
  const Eigen::VectorXd& mu = params.mean_direction;
  const int d = params.mean_direction.dim();
  const double kappa = params.concentration;
  const double m1 = d - 1.0;

  // b = (-2k + sqrt(4k^2 + m1^2)) / m1, written without cancellation.
  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);

  double t = 0.0;
  bool accepted = false;
  for (int attempt = 0; attempt < kVmfMaxRejections; ++attempt) {
    const double z = detail::beta_sample(m1 / 2.0, m1 / 2.0, rng);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = uniform01(rng);
    if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      t = w;
      accepted = true;
      break;
    }
  }
  if (!accepted) throw NumericalError("VMF rejection sampler exceeded iteration cap");

  Eigen::VectorXd tangent;
  for (;;) {
    tangent = detail::standard_normal(d, rng);
    tangent -= tangent.dot(mu) * mu;
    const double n = tangent.norm();
    if (n > 1e-12) {
      tangent /= n;
      break;
    }
  }
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  Eigen::VectorXd x = t * mu + s * tangent;
  // Rounding can leave |x| a few ulps off one.
  return UnitVector(x / x.norm());
}

/// kappa * mu^T x; the normalizer log C_d(kappa) is omitted.
inline double vmf_log_density_unnormalized(const Eigen::VectorXd& x, const VmfParams& params) {
  detail::require_unit(x, "x");
  if (x.size() != params.mean_direction.dim()) throw DimensionError("x and mean direction differ in dimension");
  return params.concentration * params.mean_direction.vec().dot(x);
}

struct VmfLoss {
  double loss;
  Eigen::VectorXd grad_wrt_phi;
};

/// Unit-concentration VMF negative log-likelihood of w under features phi (constant dropped).
inline VmfLoss vmf_nll_loss(const Eigen::VectorXd& phi, const Eigen::VectorXd& w) {
  detail::require_unit(phi, "phi");
  detail::require_unit(w, "w");
  if (phi.size() != w.size()) throw DimensionError("phi and w differ in dimension");
  return {-phi.dot(w), -w};
}

}  // namespace visr
