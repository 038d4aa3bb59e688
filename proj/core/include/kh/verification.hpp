#ifndef KH_VERIFICATION_HPP
#define KH_VERIFICATION_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kh/estimator.hpp"
#include "kh/optimizers.hpp"
#include "kh/problems.hpp"
#include "kh/schedule.hpp"

namespace kh {

inline constexpr double kSlackTolerance = 1e-9;
inline constexpr double kIdentityTolerance = 1e-12;

/// One certified claim. Slack is (rhs - lhs) / max(1, |lhs|, |rhs|) for
/// inequalities and -|difference| / scale for identities; the claim fails
/// iff min_slack < -tolerance (or <= 0 for strict claims).
struct ClaimResult {
  std::string id;
  std::string range;
  double min_slack = std::numeric_limits<double>::infinity();
  double tolerance = kSlackTolerance;
  bool strict = false;
  bool skipped = false;
  std::uint64_t checks = 0;
  double worst_alpha = 0.0;
  std::size_t worst_b = 0;
  std::uint64_t worst_t = 0;

  bool pass() const noexcept;
  void record(double slack, double alpha, std::size_t b, std::uint64_t t);
  void merge(const ClaimResult& other);
};

struct CertificateReport {
  std::vector<ClaimResult> claims;

  bool passed() const noexcept;
  const ClaimResult* find(const std::string& id) const;
  /// Claim with the smallest slack relative to its tolerance.
  const ClaimResult* worst() const;
  /// One line per claim: id, range, min slack, worst location, verdict.
  std::string to_text() const;
  void append(const CertificateReport& other);
};

/// 101 uniform points on [0, 1], the bucket edges {0, 1/2, 3/4, 1} and
/// probes 1e-6 on either side of each interior edge, sorted and deduplicated.
std::vector<double> default_alpha_grid();

struct ScanOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  std::vector<std::size_t> batch_sizes{1, 2, 10};
  std::uint64_t t_max = 100000;
  std::optional<double> xi_override;  ///< fault injection; alpha~_0 follows as 36 xi
  unsigned threads = 1;
};

/// Exhaustive scan of the schedule inequalities over grid x batch sizes x [1, t_max].
/// Throws std::domain_error when t_max < 18 or the grid is empty.
CertificateReport scan_schedule(const ScanOptions& options);

/// D_t >= a~_alpha t^{alpha+1} for 17 <= t <= t_max plus min D_t / t^{alpha+1}
/// over t < 17. alpha = 0 yields a skipped claim.
CertificateReport scan_denominator_growth(double alpha, std::uint64_t t_max,
                                          std::size_t batch_size = 1);

struct DescentCheck {
  double expected_next = 0.0;  ///< E[L_{t+1} | state]
  double current = 0.0;        ///< L_t
  std::size_t subsets = 0;

  bool holds(double rel_tol = 1e-10) const noexcept;
};

/// Exact E[L_{t+1} | state] over every b-subset crossed with both checkpoint
/// outcomes. Needs a reference solution; throws EnumerationCapExceeded above cap.
DescentCheck exact_conditional_lyapunov_descent(const SolverState& state,
                                                const FiniteSumProblem& problem,
                                                const ScheduleParams& params,
                                                double cap = kDefaultEnumerationCap);

/// Variance bound, subset-sum identity and unbiasedness at every (x, w, b).
CertificateReport verify_lemma2(const FiniteSumProblem& problem,
                                std::span<const std::pair<Vector, Vector>> points,
                                std::span<const std::size_t> b_values,
                                double cap = kDefaultEnumerationCap);

}  // namespace kh

#endif  // KH_VERIFICATION_HPP
