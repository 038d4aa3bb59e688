#include "kh/estimator.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace kh {

Checkpoint make_checkpoint(const FiniteSumProblem& problem, const Vector& w, IfoLedger& ledger,
                           bool cache_slopes) {
  Checkpoint c;
  c.w = w;
  Vector s = problem.slopes(w);
  c.full_grad = problem.rows().transpose() * s;
  c.full_grad /= static_cast<double>(problem.n());
  if (cache_slopes) c.slopes = std::move(s);
  ledger.checkpoint_calls += problem.n();
  return c;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

void for_each_subset(std::size_t n, std::size_t k, double cap,
                     const std::function<void(std::span<const std::uint32_t>)>& fn) {
  if (k == 0 || k > n) throw std::domain_error("for_each_subset: need 1 <= k <= n");
  const double count = binomial(n, k);
  if (count > cap) {
    throw EnumerationCapExceeded("enumeration of C(" + std::to_string(n) + "," +
                                 std::to_string(k) + ") subsets exceeds the cap");
  }
  std::vector<std::uint32_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0u);
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

SubsetSampler::SubsetSampler(std::size_t n) : perm_(n) {
  std::iota(perm_.begin(), perm_.end(), 0u);
}

std::span<const std::uint32_t> SubsetSampler::draw(std::size_t b, SplitMix64& rng) {
  const std::size_t n = perm_.size();
  if (b == 0 || b > n) throw std::domain_error("sample_subset: need 1 <= b <= n");
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    std::swap(perm_[i], perm_[j]);
  }
  return {perm_.data(), b};
}

std::vector<std::uint32_t> sample_subset(std::size_t n, std::size_t b, SplitMix64& rng) {
  if (b == 0 || b > n) throw std::domain_error("sample_subset: need 1 <= b <= n");
  SubsetSampler s(n);
  const auto J = s.draw(b, rng);
  return {J.begin(), J.end()};
}

void svrg_estimate_into(const Vector& x, const Checkpoint& ckpt, std::span<const std::uint32_t> J,
                        const FiniteSumProblem& problem, IfoLedger& ledger, Vector& out) {
  const std::size_t b = J.size();
  ledger.sampled_components += b;
  ledger.minibatch_calls += ckpt.slopes ? b : 2 * b;
  if (b == problem.n()) {
    out = problem.full_gradient(x);
    return;
  }
  out = ckpt.full_grad;
  const double inv_b = 1.0 / static_cast<double>(b);
  const auto& A = problem.rows();
  for (const std::uint32_t j : J) {
    const auto row = A.row(static_cast<Eigen::Index>(j));
    const double sx = problem.loss_slope(j, row.dot(x));
    const double sw = ckpt.slopes ? (*ckpt.slopes)[static_cast<Eigen::Index>(j)]
                                  : problem.loss_slope(j, row.dot(ckpt.w));
    out.noalias() += (inv_b * (sx - sw)) * row.transpose();
  }
}

Vector svrg_estimate(const Vector& x, const Checkpoint& ckpt, std::span<const std::uint32_t> J,
                     const FiniteSumProblem& problem, IfoLedger& ledger) {
  Vector g;
  svrg_estimate_into(x, ckpt, J, problem, ledger, g);
  return g;
}

CheckpointOutcome maybe_update_checkpoint(Checkpoint& ckpt, const Vector& candidate,
                                          bool candidate_is_current_copy, double p,
                                          SplitMix64& rng, const FiniteSumProblem& problem,
                                          IfoLedger& ledger) {
  CheckpointOutcome out;
  out.drawn = rng.bernoulli(p);
  if (!out.drawn) return out;
  if (candidate_is_current_copy) return out;
  const std::uint64_t version = ckpt.version + 1;
  ckpt = make_checkpoint(problem, candidate, ledger, ckpt.slopes.has_value());
  ckpt.version = version;
  out.recomputed = true;
  return out;
}

double variance_bound_rhs(const Vector& x, const Vector& w, std::size_t b,
                          const FiniteSumProblem& problem) {
  if (b == 0) throw std::domain_error("variance_bound_rhs: b must be positive");
  const double bregman = problem.smooth_value(w) - problem.smooth_value(x) -
                         problem.full_gradient(x).dot(w - x);
  return std::max(0.0, 2.0 * problem.smoothness() / static_cast<double>(b) * bregman);
}

double exact_variance(const Vector& x, const Checkpoint& ckpt, std::size_t b,
                      const FiniteSumProblem& problem, double cap) {
  const Vector grad = problem.full_gradient(x);
  const double count = binomial(problem.n(), b);
  IfoLedger scratch;
  Vector g;
  double acc = 0.0;
  for_each_subset(problem.n(), b, cap, [&](std::span<const std::uint32_t> J) {
    svrg_estimate_into(x, ckpt, J, problem, scratch, g);
    acc += (g - grad).squaredNorm();
  });
  return acc / count;
}

Vector enumerated_mean_estimate(const Vector& x, const Checkpoint& ckpt, std::size_t b,
                                const FiniteSumProblem& problem, double cap) {
  const double count = binomial(problem.n(), b);
  IfoLedger scratch;
  Vector g;
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  for_each_subset(problem.n(), b, cap, [&](std::span<const std::uint32_t> J) {
    svrg_estimate_into(x, ckpt, J, problem, scratch, g);
    acc += g;
  });
  return acc / count;
}

}  // namespace kh
