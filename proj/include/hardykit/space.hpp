#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "hardykit/errors.hpp"
#include "hardykit/logspace.hpp"
#include "hardykit/wexpr.hpp"

namespace hardykit {

/// Area of the unit sphere S^{n-1} in R^n.
inline double euclidean_sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace geometry {
struct Euclidean {
  int n;
};
struct HomogeneousGroup {
  double Q;
};
struct Hyperbolic {
  int n;
};
/// Constant sectional curvature -b, b >= 0.
struct CartanHadamard {
  int n;
  double b;
};
struct GenericRadial {
  wexpr::WeightExpr density;
};
}  // namespace geometry

/// A metric measure space seen from its base point through the radial
/// density Lambda(r): the integral of a radial w over the space equals
/// the integral of w(r) * Lambda(r) over r in (0, inf).
class Space {
 public:
  using Kind = std::variant<geometry::Euclidean, geometry::HomogeneousGroup, geometry::Hyperbolic,
                            geometry::CartanHadamard, geometry::GenericRadial>;

  static Space euclidean(int n) { return euclidean(n, euclidean_sphere_area(check_dim(n))); }

  /// Euclidean density r^{n-1} with a caller-chosen sphere constant.
  static Space euclidean(int n, double sigma) {
    return Space(geometry::Euclidean{check_dim(n)}, check_sigma(sigma));
  }

  /// The half-line (0, inf) with Lebesgue measure: Lambda = 1.
  static Space half_line() { return euclidean(1, 1.0); }

  static Space homogeneous_group(double Q, double sigma) {
    if (!(Q > 0.0) || !std::isfinite(Q)) throw DomainError("homogeneous dimension Q must be > 0");
    return Space(geometry::HomogeneousGroup{Q}, check_sigma(sigma));
  }

  static Space hyperbolic(int n) {
    return Space(geometry::Hyperbolic{check_dim(n)}, euclidean_sphere_area(n));
  }

  static Space cartan_hadamard(int n, double b) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("curvature magnitude b must be >= 0");
    return Space(geometry::CartanHadamard{check_dim(n), b}, euclidean_sphere_area(n));
  }

  static Space generic(wexpr::WeightExpr density, double sigma) {
    return Space(geometry::GenericRadial{std::move(density)}, check_sigma(sigma));
  }

  const Kind& kind() const { return kind_; }
  double sigma() const { return sigma_; }

  /// Lambda(r).
  double radial_density(double r) const {
    check_radius(r);
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, geometry::Euclidean>) {
            return sigma_ * std::pow(r, k.n - 1.0);
          } else if constexpr (std::is_same_v<K, geometry::HomogeneousGroup>) {
            return sigma_ * std::pow(r, k.Q - 1.0);
          } else if constexpr (std::is_same_v<K, geometry::Hyperbolic>) {
            return sigma_ * std::pow(std::sinh(r), k.n - 1.0);
          } else if constexpr (std::is_same_v<K, geometry::CartanHadamard>) {
            if (k.b == 0.0) return sigma_ * std::pow(r, k.n - 1.0);
            const double sb = std::sqrt(k.b);
            return sigma_ * std::pow(std::sinh(sb * r) / sb, k.n - 1.0);
          } else {
            const double v = k.density.eval(r);
            if (!(v > 0.0) || !std::isfinite(v)) {
              std::ostringstream os;
              os.precision(17);
              os << "radial density '" << k.density.format() << "' is not positive and finite at r="
                 << r;
              throw DensityError(os.str(), r);
            }
            return sigma_ * v;
          }
        },
        kind_);
  }

  /// log Lambda(r); finite for every r > 0 and every built-in kind.
  double log_density(double r) const {
    check_radius(r);
    const double ls = std::log(sigma_);
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, geometry::Euclidean>) {
            return ls + power_term(k.n - 1.0, std::log(r));
          } else if constexpr (std::is_same_v<K, geometry::HomogeneousGroup>) {
            return ls + power_term(k.Q - 1.0, std::log(r));
          } else if constexpr (std::is_same_v<K, geometry::Hyperbolic>) {
            return ls + power_term(k.n - 1.0, logspace::log_sinh(r));
          } else if constexpr (std::is_same_v<K, geometry::CartanHadamard>) {
            if (k.b == 0.0) return ls + power_term(k.n - 1.0, std::log(r));
            const double sb = std::sqrt(k.b);
            return ls + power_term(k.n - 1.0, logspace::log_sinh(sb * r) - std::log(sb));
          } else {
            wexpr::SignedLog v = k.density.eval_signed_log(r);
            if (v.sign <= 0 || !std::isfinite(v.log_abs)) {
              std::ostringstream os;
              os.precision(17);
              os << "radial density '" << k.density.format() << "' is not positive and finite at r="
                 << r;
              throw DensityError(os.str(), r);
            }
            return ls + v.log_abs;
          }
        },
        kind_);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, geometry::Euclidean>) {
            os << "euclidean(n=" << k.n << ")";
          } else if constexpr (std::is_same_v<K, geometry::HomogeneousGroup>) {
            os << "homogeneous(Q=" << k.Q << ")";
          } else if constexpr (std::is_same_v<K, geometry::Hyperbolic>) {
            os << "hyperbolic(n=" << k.n << ")";
          } else if constexpr (std::is_same_v<K, geometry::CartanHadamard>) {
            os << "cartan-hadamard(n=" << k.n << ", b=" << k.b << ")";
          } else {
            os << "radial(density=" << k.density.format() << ")";
          }
        },
        kind_);
    os << ", sigma=" << sigma_;
    return os.str();
  }

 private:
  Space(Kind kind, double sigma) : kind_(std::move(kind)), sigma_(sigma) {}

  // (power) * log_base, with 0 * anything = 0 so r^0 stays exactly 1.
  static double power_term(double power, double log_base) {
    return power == 0.0 ? 0.0 : power * log_base;
  }

  static int check_dim(int n) {
    if (n < 1) throw DomainError("dimension n must be >= 1");
    return n;
  }
  static double check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sphere constant sigma must be > 0");
    return sigma;
  }
  static void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      std::ostringstream os;
      os << "radius must be positive and finite, got " << r;
      throw DomainError(os.str());
    }
  }

  Kind kind_;
  double sigma_;
};

}  // namespace hardykit
