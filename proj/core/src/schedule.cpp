#include "kh/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kh {

void ScheduleConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("schedule: alpha must lie in [0, 1], got " +
                            std::to_string(alpha));
  }
  if (n == 0) throw std::domain_error("schedule: n must be positive");
  if (batch_size == 0 || batch_size > n) {
    throw std::domain_error("schedule: batch size must satisfy 1 <= b <= n (b=" +
                            std::to_string(batch_size) +
                            ", n=" + std::to_string(n) + ")");
  }
}

double growth_coefficient(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("growth_coefficient: alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return 6.0;
  if (alpha <= 0.5) return 1.0 + std::sqrt(2.0) / 4.0;
  if (alpha <= 0.75) return 1.0 / 3.0;
  return 0.25 * std::pow(17.0 / 16.0, alpha - 1.0);
}

double alpha_at(std::uint64_t t, const ScheduleParams& params) {
  if (t <= ScheduleParams::kPlateauEnd) return ScheduleParams::kAlpha0;
  if (params.alpha == 0.0) return params.a_alpha;
  return params.a_alpha * std::pow(static_cast<double>(t), params.alpha);
}

ScheduleParams derive_constants(const ScheduleConfig& config) {
  config.validate();
  ScheduleParams p;
  p.alpha = config.alpha;
  p.batch_size = config.batch_size;
  p.a_alpha = growth_coefficient(config.alpha);

  const double alpha17 = alpha_at(17, p);
  const double inner = std::max(6.0 / 5.0, 1.0 / (1.0 - 1.0 / alpha17));
  const double b = static_cast<double>(config.batch_size);
  p.c = std::max(2.0, inner / b) + 1.0;
  p.xi = 1.0 / (b * p.c);
  const double alpha1 = alpha_at(1, p);
  p.alpha_tilde_0 = p.xi * alpha1 * alpha1;
  return p;
}

ScheduleParams compute_constants(const ScheduleConfig& config) {
  const ScheduleParams p = derive_constants(config);
  if (!(p.c <= ScheduleParams::kUniformCBound)) {
    throw std::logic_error("compute_constants: c exceeds the uniform bound 5");
  }
  if (!(p.xi > 0.0 && p.xi < 1.0)) {
    throw std::logic_error("compute_constants: xi outside (0, 1)");
  }
  return p;
}

ScheduleCursor initial_cursor(const ScheduleParams&) { return ScheduleCursor{}; }

ScheduleCursor cursor_at(std::uint64_t t, const ScheduleParams& params) {
  ScheduleCursor c = initial_cursor(params);
  while (c.t < t) advance(c, params);
  return c;
}

void advance(ScheduleCursor& cursor, const ScheduleParams& params) {
  const double next = alpha_at(cursor.t + 1, params);
  // Neumaier summation.
  const double s = cursor.cum_sum + next;
  if (std::abs(cursor.cum_sum) >= std::abs(next)) {
    cursor.cum_comp += (cursor.cum_sum - s) + next;
  } else {
    cursor.cum_comp += (next - s) + cursor.cum_sum;
  }
  cursor.cum_sum = s;
  cursor.alpha_prev = cursor.alpha_t;
  cursor.alpha_t = next;
  ++cursor.t;
}

double denominator_at(const ScheduleCursor& cursor, const ScheduleParams& params) {
  constexpr double a0sq = ScheduleParams::kAlpha0 * ScheduleParams::kAlpha0;
  return params.alpha_tilde_0 + (a0sq - cursor.alpha_t * cursor.alpha_t) +
         cursor.sum();
}

double previous_denominator(const ScheduleCursor& cursor, const ScheduleParams& params) {
  constexpr double a0sq = ScheduleParams::kAlpha0 * ScheduleParams::kAlpha0;
  if (cursor.t == 0) return params.alpha_tilde_0;
  return params.alpha_tilde_0 + (a0sq - cursor.alpha_prev * cursor.alpha_prev) +
         ((cursor.cum_sum - cursor.alpha_t) + cursor.cum_comp);
}

double p_numerator(const ScheduleCursor& cursor, const ScheduleParams& params) {
  const double at2 = cursor.alpha_t * cursor.alpha_t;
  return (cursor.alpha_prev * cursor.alpha_prev - at2) + cursor.alpha_t +
         params.xi * at2;
}

double p_at(const ScheduleCursor& cursor, const ScheduleParams& params) {
  assert(cursor.t >= 1);
  const double den = denominator_at(cursor, params);
  assert(den > 0.0);
  return p_numerator(cursor, params) / den;
}

double tau_at(const ScheduleCursor& cursor) {
  assert(cursor.t >= 1);
  return 1.0 / cursor.alpha_t;
}

double max_step_size(double L, const ScheduleParams& params) {
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw std::domain_error("max_step_size: L must be positive and finite");
  }
  return 1.0 / ((params.c + 1.0) * L);
}

}  // namespace kh
