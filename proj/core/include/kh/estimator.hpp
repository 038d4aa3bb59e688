#ifndef KH_ESTIMATOR_HPP
#define KH_ESTIMATOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kh/problems.hpp"
#include "kh/rng.hpp"
#include "kh/types.hpp"

namespace kh {

/// Component-gradient evaluation counts.
///
/// minibatch_calls charges every evaluation made by the estimator (2b per
/// iteration by default: grad f_j at x and at w); checkpoint_calls charges n
/// per full-gradient recompute. sampled_components counts b per iteration,
/// i.e. the cost under the convention where grad f_j(w) is not re-charged.
struct IfoLedger {
  std::uint64_t minibatch_calls = 0;
  std::uint64_t checkpoint_calls = 0;
  std::uint64_t sampled_components = 0;

  std::uint64_t total() const noexcept { return minibatch_calls + checkpoint_calls; }
  /// Cost when checkpoint-side component gradients are treated as free.
  std::uint64_t total_single_eval() const noexcept {
    return sampled_components + checkpoint_calls;
  }

  friend bool operator==(const IfoLedger&, const IfoLedger&) = default;
};

/// Full-gradient anchor w and grad f(w).
struct Checkpoint {
  Vector w;
  Vector full_grad;
  std::uint64_t version = 0;  ///< number of recomputes
  /// Optional per-component slopes at w (memory n); enables b-cost estimates.
  std::optional<Vector> slopes;
};

/// Builds a checkpoint at w, charging n to the ledger.
Checkpoint make_checkpoint(const FiniteSumProblem& problem, const Vector& w, IfoLedger& ledger,
                           bool cache_slopes = false);

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// C(n, k) as a double (exact below 2^53).
double binomial(std::size_t n, std::size_t k);

/// Calls fn once per k-subset of {0, ..., n-1}, in lexicographic order.
/// Throws EnumerationCapExceeded if C(n, k) > cap.
void for_each_subset(std::size_t n, std::size_t k, double cap,
                     const std::function<void(std::span<const std::uint32_t>)>& fn);

/// Uniform b-subsets of [n] by partial Fisher-Yates over a persistent
/// permutation buffer: O(b) per draw after O(n) setup. Indices are 0-based.
class SubsetSampler {
 public:
  explicit SubsetSampler(std::size_t n);
  std::span<const std::uint32_t> draw(std::size_t b, SplitMix64& rng);
  std::size_t n() const noexcept { return perm_.size(); }

 private:
  std::vector<std::uint32_t> perm_;
};

/// One-shot draw of b distinct 0-based indices. Throws std::domain_error unless 1 <= b <= n.
std::vector<std::uint32_t> sample_subset(std::size_t n, std::size_t b, SplitMix64& rng);

/// Mini-batch SVRG estimate
///   g = (1/b) sum_{j in J} (grad f_j(x) - grad f_j(w)) + grad f(w).
/// When J covers all n components the sums telescope and g is computed as
/// grad f(x) directly. Charges 2b (b with cached slopes) to the ledger.
void svrg_estimate_into(const Vector& x, const Checkpoint& ckpt, std::span<const std::uint32_t> J,
                        const FiniteSumProblem& problem, IfoLedger& ledger, Vector& out);
Vector svrg_estimate(const Vector& x, const Checkpoint& ckpt, std::span<const std::uint32_t> J,
                     const FiniteSumProblem& problem, IfoLedger& ledger);

struct CheckpointOutcome {
  bool drawn = false;       ///< the Bernoulli(p) draw succeeded
  bool recomputed = false;  ///< a full gradient was computed and charged
};

/// With probability p, moves the checkpoint to `candidate`. When the caller
/// flags the candidate as an untouched copy of the current w the recompute is
/// skipped and nothing is charged. Always consumes exactly one draw.
CheckpointOutcome maybe_update_checkpoint(Checkpoint& ckpt, const Vector& candidate,
                                          bool candidate_is_current_copy, double p,
                                          SplitMix64& rng, const FiniteSumProblem& problem,
                                          IfoLedger& ledger);

/// (2L / b) (f(w) - f(x) - <grad f(x), w - x>), clamped at 0.
double variance_bound_rhs(const Vector& x, const Vector& w, std::size_t b,
                          const FiniteSumProblem& problem);

inline constexpr double kDefaultEnumerationCap = 1e5;

/// E_J ||g - grad f(x)||^2 by summing over every b-subset.
double exact_variance(const Vector& x, const Checkpoint& ckpt, std::size_t b,
                      const FiniteSumProblem& problem, double cap = kDefaultEnumerationCap);

/// E_J g by enumeration; equals grad f(x) by unbiasedness.
Vector enumerated_mean_estimate(const Vector& x, const Checkpoint& ckpt, std::size_t b,
                                const FiniteSumProblem& problem,
                                double cap = kDefaultEnumerationCap);

}  // namespace kh

#endif  // KH_ESTIMATOR_HPP
