#ifndef KH_SCHEDULE_HPP
#define KH_SCHEDULE_HPP

#include <cstddef>
#include <cstdint>

namespace kh {

/// Inputs of the momentum / checkpoint-probability schedule.
struct ScheduleConfig {
  double alpha = 1.0;          ///< growth exponent in [0, 1]
  std::size_t batch_size = 1;  ///< mini-batch size b, 1 <= b <= n
  std::size_t n = 1;           ///< number of components

  /// Throws std::domain_error when alpha or batch_size is out of range.
  void validate() const;
};

/// Problem-independent constants of the schedule. Everything downstream
/// (tau_t, p_t, D_t, the step-size cap) is a function of these and t.
struct ScheduleParams {
  static constexpr double kAlpha0 = 6.0;  ///< alpha_0 = alpha_t for t <= 16
  static constexpr std::uint64_t kPlateauEnd = 16;
  static constexpr double kUniformCBound = 5.0;

  double alpha = 1.0;
  std::size_t batch_size = 1;
  double a_alpha = 0.25;       ///< growth coefficient
  double c = 3.0;              ///< variance-cancellation constant
  double xi = 1.0 / 3.0;       ///< Katyusha momentum weight 1/(b c)
  double alpha_tilde_0 = 12.0; ///< xi * alpha_1^2
};

/// Bucketed growth coefficient a_alpha. Buckets are closed on the right:
/// {0}, (0, 1/2], (1/2, 3/4], (3/4, 1].
double growth_coefficient(double alpha);

/// alpha_t: 6 on the plateau 0 <= t <= 16, a_alpha * t^alpha afterwards.
double alpha_at(std::uint64_t t, const ScheduleParams& params);

/// Same as compute_constants without the post-checks on c and xi.
ScheduleParams derive_constants(const ScheduleConfig& config);

/// Builds the constants for a validated config. Throws std::logic_error when
/// the internal bounds c <= 5 or xi in (0, 1) fail.
ScheduleParams compute_constants(const ScheduleConfig& config);

/// Incremental view of the schedule at iteration t.
///
/// cum_sum is sum_{j=1}^{t} alpha_j, maintained with Neumaier compensation so
/// that long runs agree with a fresh summation.
struct ScheduleCursor {
  std::uint64_t t = 0;
  double alpha_t = ScheduleParams::kAlpha0;
  double alpha_prev = ScheduleParams::kAlpha0;  ///< alpha_{t-1}; alpha_0 at t = 0
  double cum_sum = 0.0;
  double cum_comp = 0.0;  ///< compensation term of cum_sum

  double sum() const noexcept { return cum_sum + cum_comp; }
};

ScheduleCursor initial_cursor(const ScheduleParams& params);
/// Cursor positioned at t, built by advancing from 0.
ScheduleCursor cursor_at(std::uint64_t t, const ScheduleParams& params);
/// Moves the cursor from t to t + 1.
void advance(ScheduleCursor& cursor, const ScheduleParams& params);

/// D_t = alpha~_0 + alpha_0^2 - alpha_t^2 + sum_{j<=t} alpha_j, the weight on
/// F(w_{t+1}) - F* in the Lyapunov function.
double denominator_at(const ScheduleCursor& cursor, const ScheduleParams& params);

/// D_{t-1}, recovered from the cursor at t (D_0 = alpha~_0).
double previous_denominator(const ScheduleCursor& cursor, const ScheduleParams& params);

/// Numerator of p_t: alpha_{t-1}^2 - alpha_t^2 + alpha_t + xi alpha_t^2.
double p_numerator(const ScheduleCursor& cursor, const ScheduleParams& params);

/// Checkpoint update probability p_t for t >= 1.
double p_at(const ScheduleCursor& cursor, const ScheduleParams& params);

/// tau_t = 1 / alpha_t for t >= 1.
double tau_at(const ScheduleCursor& cursor);

/// Largest admissible step size 1 / ((c + 1) L). Throws std::domain_error for L <= 0.
double max_step_size(double L, const ScheduleParams& params);

}  // namespace kh

#endif  // KH_SCHEDULE_HPP
