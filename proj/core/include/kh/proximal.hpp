#ifndef KH_PROXIMAL_HPP
#define KH_PROXIMAL_HPP

#include <string>

#include "kh/types.hpp"

namespace kh {

/// The nonsmooth part l of F = f + l, drawn from a closed family so that
/// proximal maps have exact closed forms.
///
///   Zero:        l(x) = 0
///   L1:          l(x) = l1 * ||x||_1
///   SquaredL2:   l(x) = (l2 / 2) * ||x||^2
///   ElasticNet:  l(x) = l1 * ||x||_1 + (l2 / 2) * ||x||^2
struct Regularizer {
  enum class Kind { Zero, L1, SquaredL2, ElasticNet };

  Kind kind = Kind::Zero;
  double l1 = 0.0;
  double l2 = 0.0;

  static Regularizer zero() { return {}; }
  static Regularizer lasso(double lambda);
  static Regularizer squared_l2(double lambda);
  static Regularizer elastic_net(double lambda1, double lambda2);

  bool is_smooth() const noexcept { return kind == Kind::Zero || kind == Kind::SquaredL2; }
  std::string describe() const;
};

double reg_value(const Regularizer& reg, const Vector& x);

/// argmin_z (1 / (2 step)) ||z - v||^2 + l(z). Throws std::domain_error for step <= 0.
Vector prox(const Regularizer& reg, const Vector& v, double step);

/// In-place variant; out may alias v.
void prox_into(const Regularizer& reg, const Vector& v, double step, Vector& out);

/// Componentwise sign(v) * max(|v| - threshold, 0).
inline double soft_threshold(double v, double threshold) noexcept {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

}  // namespace kh

#endif  // KH_PROXIMAL_HPP
