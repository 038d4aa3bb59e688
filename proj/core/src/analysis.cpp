#include "kh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kh {

double lyapunov_value(double alpha_sq, double denominator, double gap_y, double gap_w,
                      double dist_sq, double eta) {
  return alpha_sq * gap_y + denominator * gap_w + dist_sq / (2.0 * eta);
}

double lyapunov(const LyapunovInputs& in, const FiniteSumProblem& problem) {
  if (!problem.reference()) throw std::invalid_argument("lyapunov: problem has no reference solution");
  const auto& ref = *problem.reference();
  return lyapunov_value(in.alpha_t * in.alpha_t, in.D_t, problem.objective(in.y) - ref.F_star,
                        problem.objective(in.w) - ref.F_star, (in.z - ref.x_star).squaredNorm(),
                        in.eta);
}

double initial_lyapunov(const FiniteSumProblem& problem, const Vector& x0,
                        const ScheduleParams& params, double eta) {
  constexpr double a0 = ScheduleParams::kAlpha0;
  return lyapunov({x0, x0, x0, 0, eta, params.alpha_tilde_0, a0}, problem);
}

Theorem1Report theorem1_bound_check(std::span<const double> lhs, double rhs, double k,
                                    std::size_t min_seeds) {
  if (lhs.size() < min_seeds || lhs.size() < 2) {
    throw std::invalid_argument("theorem1_bound_check: need at least " +
                                std::to_string(std::max<std::size_t>(min_seeds, 2)) + " seeds");
  }
  Theorem1Report r;
  r.seeds = lhs.size();
  r.rhs = rhs;
  r.se_multiplier = k;
  const double m = static_cast<double>(lhs.size());
  r.mean_lhs = std::accumulate(lhs.begin(), lhs.end(), 0.0) / m;
  double ss = 0.0;
  for (const double v : lhs) ss += (v - r.mean_lhs) * (v - r.mean_lhs);
  r.std_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  r.margin = rhs + k * r.std_error - r.mean_lhs;
  r.pass = r.margin >= 0.0;
  return r;
}

double hat_alpha(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("hat_alpha: eps must lie in (0, 1)");
  return std::log(2.0) / std::log(std::ceil(1.0 / epsilon));
}

double IfoPrediction::order() const { return std::log10(total()); }

namespace {

void check_prediction_args(double alpha, std::size_t b, std::size_t n, double epsilon) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("predict_ifo: alpha must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("predict_ifo: eps must lie in (0, 1)");
  if (b == 0 || b > n) throw std::domain_error("predict_ifo: need 1 <= b <= n");
}

IfoPrediction make_prediction(IfoBranch branch, double alpha, std::size_t b, std::size_t n,
                              double epsilon, double threshold) {
  const double nb = static_cast<double>(n);
  const double bb = static_cast<double>(b);
  IfoPrediction p;
  p.branch = branch;
  p.threshold = threshold;
  p.batch_term = bb * std::pow(epsilon, -1.0 / (alpha + 1.0));
  p.log_term = nb * std::log(1.0 / epsilon);
  if (branch == IfoBranch::General && alpha > 0.0) {
    p.checkpoint_term = (nb / bb) / alpha * std::pow(epsilon, -alpha / (alpha + 1.0));
  } else if (branch == IfoBranch::General) {
    p.checkpoint_term = std::numeric_limits<double>::infinity();
  }
  return p;
}

}  // namespace

IfoPrediction predict_ifo(double alpha, std::size_t b, std::size_t n, double epsilon) {
  check_prediction_args(alpha, b, n, epsilon);
  const double thr = std::min(hat_alpha(epsilon), 0.1);
  const IfoBranch branch = alpha <= thr ? IfoBranch::SmallAlpha : IfoBranch::General;
  return make_prediction(branch, alpha, b, n, epsilon, thr);
}

IfoBranchPair predict_ifo_both(double alpha, std::size_t b, std::size_t n, double epsilon) {
  check_prediction_args(alpha, b, n, epsilon);
  const double thr = std::min(hat_alpha(epsilon), 0.1);
  return {make_prediction(IfoBranch::SmallAlpha, alpha, b, n, epsilon, thr),
          make_prediction(IfoBranch::General, alpha, b, n, epsilon, thr)};
}

AlphaInterval delta_interval(std::size_t n, double epsilon, double C1, double C2) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("delta_interval: eps must lie in (0, 1)");
  if (n == 0) throw std::domain_error("delta_interval: n must be positive");
  if (!(C1 >= 1.0) || !(C2 >= 1.0)) throw std::domain_error("delta_interval: C1 and C2 must be >= 1");
  const double nb = static_cast<double>(n);
  if (!(nb < 1.0 / epsilon)) {
    throw SelectionError("infeasible: the selection rule needs n < 1/eps (n=" + std::to_string(n) +
                         ", 1/eps=" + std::to_string(1.0 / epsilon) + ")");
  }
  const double L = std::log(1.0 / epsilon);
  const double r = std::log(nb) / L;
  const double c1 = 2.0 * std::log(C1) / L;
  const double c2 = 2.0 * std::log(C2) / L;

  AlphaInterval iv;
  iv.delta1 = (1.0 - r - c1) / (1.0 + r + c1);
  const double den2 = 1.0 + r - c2;
  iv.delta2 = (1.0 - r + c2) / den2;
  if (!(den2 > 0.0) || !(iv.delta2 > 0.0)) {
    throw SelectionError("inadmissible C2: Delta_2 must be strictly positive");
  }
  iv.hat_alpha = hat_alpha(epsilon);
  iv.threshold = std::min(iv.hat_alpha, 0.1);
  iv.small_branch = iv.delta2 <= iv.threshold;
  if (iv.small_branch) {
    iv.lo = std::max(0.0, iv.delta1);
    iv.hi = iv.delta2;
  } else {
    iv.lo = std::max(iv.threshold, iv.delta1);
    iv.hi = std::min(1.0, iv.delta2);
  }
  return iv;
}

AlphaSelection select_alpha(std::size_t n, double epsilon, double C1, double C2) {
  AlphaSelection s;
  s.interval = delta_interval(n, epsilon, C1, C2);
  s.alpha = 0.5 * (s.interval.lo + s.interval.hi);
  const double a = s.alpha;
  const double nb = static_cast<double>(n);
  const double root = std::sqrt(nb) / std::sqrt(epsilon);
  s.iter_lhs = std::pow(epsilon, -1.0 / (a + 1.0));
  s.iter_rhs = C1 * root;
  s.ckpt_lhs = nb * std::pow(epsilon, -a / (a + 1.0));
  s.ckpt_rhs = C2 * root;
  // C = 1 makes the interval a single point where both sides agree up to rounding
  constexpr double rel = 1e-12;
  if (!(s.iter_lhs <= s.iter_rhs * (1 + rel)) || !(s.ckpt_lhs <= s.ckpt_rhs * (1 + rel))) {
    throw std::logic_error("select_alpha: selected alpha fails the target inequalities");
  }
  return s;
}

ParameterPair corollary2_config(std::size_t n) {
  if (n == 0) throw std::domain_error("corollary2_config: n must be positive");
  auto b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (b * b < n) ++b;
  while (b > 1 && (b - 1) * (b - 1) >= n) --b;
  return {1.0, b};
}

double tilde_a(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("tilde_a: alpha must lie in (0, 1]");
  if (alpha == 1.0) return 1.0 / 16.0;
  return growth_coefficient(alpha) / (2.0 * alpha + 2.0);
}

double q1_sum(double alpha, std::uint64_t upper) {
  double s = 0.0;
  for (std::uint64_t t = 17; t <= upper; ++t) s += std::pow(static_cast<double>(t), alpha - 1.0);
  return s;
}

double q1_integral_bound(double alpha, double upper) {
  if (upper <= 16.0) return 0.0;
  if (alpha == 0.0) return std::log(upper / 16.0);
  return (std::pow(upper, alpha) - std::pow(16.0, alpha)) / alpha;
}

double q2_sum(std::uint64_t upper) {
  double s = 0.0;
  for (std::uint64_t t = 17; t <= upper; ++t) s += 1.0 / static_cast<double>(t);
  return s;
}

double q2_integral_bound(double upper) { return upper <= 16.0 ? 0.0 : std::log(upper / 16.0); }

}  // namespace kh
