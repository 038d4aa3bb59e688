#ifndef KH_ANALYSIS_HPP
#define KH_ANALYSIS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "kh/problems.hpp"
#include "kh/schedule.hpp"
#include "kh/types.hpp"

namespace kh {

// ---------------------------------------------------------------------------
// Lyapunov function
//
//   L_{t+1} = alpha_t^2 (F(y_{t+1}) - F*) + D_t (F(w_{t+1}) - F*)
//             + ||z_{t+1} - x*||^2 / (2 eta)

double lyapunov_value(double alpha_sq, double denominator, double gap_y, double gap_w,
                      double dist_sq, double eta);

struct LyapunovInputs {
  const Vector& y;
  const Vector& z;
  const Vector& w;
  std::uint64_t t = 0;  ///< the index t of L_{t+1}
  double eta = 0.0;
  double D_t = 0.0;
  double alpha_t = 0.0;
};

/// Throws std::invalid_argument if the problem carries no reference solution.
double lyapunov(const LyapunovInputs& in, const FiniteSumProblem& problem);

/// L_1 for the common starting point x0 = y_1 = z_1 = w_1.
double initial_lyapunov(const FiniteSumProblem& problem, const Vector& x0,
                        const ScheduleParams& params, double eta);

struct Theorem1Report {
  std::size_t seeds = 0;
  double mean_lhs = 0.0;
  double std_error = 0.0;
  double rhs = 0.0;               ///< L_1
  double se_multiplier = 2.0;
  double margin = 0.0;            ///< rhs + k * se - mean_lhs
  bool pass = false;
};

/// Checks mean_s LHS_s <= L_1 + k * standard error over independent seeds.
/// Throws std::invalid_argument for fewer than min_seeds samples.
Theorem1Report theorem1_bound_check(std::span<const double> lhs_per_seed, double rhs,
                                    double se_multiplier = 2.0, std::size_t min_seeds = 30);

// ---------------------------------------------------------------------------
// Complexity predictions (order estimates: every hidden constant set to 1).

/// log(2) / log(ceil(1/eps)).
double hat_alpha(double epsilon);

enum class IfoBranch { SmallAlpha, General };

struct IfoPrediction {
  IfoBranch branch = IfoBranch::General;
  double threshold = 0.0;        ///< min{hat_alpha, 1/10}
  double batch_term = 0.0;       ///< b / eps^{1/(alpha+1)}
  double checkpoint_term = 0.0;  ///< (n/b)(1/alpha) eps^{-alpha/(alpha+1)}; 0 in the small-alpha branch
  double log_term = 0.0;         ///< n log(1/eps)

  double total() const noexcept { return batch_term + checkpoint_term + log_term; }
  double order() const;          ///< log10(total)
  const char* label() const noexcept { return "order estimate"; }
};

/// Expected IFO cost to reach eps. Throws std::domain_error unless eps in (0,1), 1 <= b <= n.
IfoPrediction predict_ifo(double alpha, std::size_t b, std::size_t n, double epsilon);

/// Both bracket forms evaluated at alpha for branch-continuity audits.
struct IfoBranchPair {
  IfoPrediction small;
  IfoPrediction general;
};
IfoBranchPair predict_ifo_both(double alpha, std::size_t b, std::size_t n, double epsilon);

class SelectionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct AlphaInterval {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double hat_alpha = 0.0;
  double threshold = 0.0;  ///< min{hat_alpha, 1/10}
  bool small_branch = false;
  double lo = 0.0;         ///< feasible alpha interval [lo, hi]
  double hi = 0.0;
};

/// Throws SelectionError when n >= 1/eps or when C2 makes Delta_2 non-positive;
/// std::domain_error for C1 or C2 below 1.
AlphaInterval delta_interval(std::size_t n, double epsilon, double C1, double C2);

struct AlphaSelection {
  double alpha = 0.0;
  AlphaInterval interval;
  double iter_lhs = 0.0, iter_rhs = 0.0;  ///< 1/eps^{1/(a+1)} <= C1 sqrt(n/eps)
  double ckpt_lhs = 0.0, ckpt_rhs = 0.0;  ///< n/eps^{a/(a+1)} <= C2 sqrt(n/eps)
};

/// Midpoint of the feasible interval, re-verified against both target inequalities.
AlphaSelection select_alpha(std::size_t n, double epsilon, double C1, double C2);

struct ParameterPair {
  double alpha = 1.0;
  std::size_t batch_size = 1;
};

/// alpha = 1, b = ceil(sqrt(n)).
ParameterPair corollary2_config(std::size_t n);

// ---------------------------------------------------------------------------
// Growth-rate helpers.

/// a~_alpha = a_alpha / (2 alpha + 2) for alpha in (0, 1), 1/16 at alpha = 1.
double tilde_a(double alpha);

/// sum_{t=17}^{upper} t^{alpha - 1}; 0 if upper < 17.
double q1_sum(double alpha, std::uint64_t upper);
/// integral_{16}^{upper} u^{alpha - 1} du.
double q1_integral_bound(double alpha, double upper);
/// sum_{t=17}^{upper} 1/t.
double q2_sum(std::uint64_t upper);
/// log(upper / 16).
double q2_integral_bound(double upper);

}  // namespace kh

#endif  // KH_ANALYSIS_HPP
