#include "kh/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kh/analysis.hpp"

namespace kh {

bool ClaimResult::pass() const noexcept {
  if (skipped) return true;
  if (checks == 0) return false;
  return strict ? min_slack > 0.0 : min_slack >= -tolerance;
}

void ClaimResult::record(double slack, double alpha, std::size_t b, std::uint64_t t) {
  ++checks;
  // NaN slack is a failure
  if (std::isnan(slack)) slack = -std::numeric_limits<double>::infinity();
  if (slack < min_slack) {
    min_slack = slack;
    worst_alpha = alpha;
    worst_b = b;
    worst_t = t;
  }
}

void ClaimResult::merge(const ClaimResult& o) {
  checks += o.checks;
  skipped = skipped && o.skipped;
  if (o.min_slack < min_slack) {
    min_slack = o.min_slack;
    worst_alpha = o.worst_alpha;
    worst_b = o.worst_b;
    worst_t = o.worst_t;
  }
}

bool CertificateReport::passed() const noexcept {
  return std::all_of(claims.begin(), claims.end(), [](const ClaimResult& c) { return c.pass(); });
}

const ClaimResult* CertificateReport::find(const std::string& id) const {
  for (const auto& c : claims)
    if (c.id == id) return &c;
  return nullptr;
}

const ClaimResult* CertificateReport::worst() const {
  const ClaimResult* w = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : claims) {
    if (c.skipped || c.checks == 0) continue;
    const double margin = c.min_slack + (c.strict ? 0.0 : c.tolerance);
    if (!w || margin < best) {
      w = &c;
      best = margin;
    }
  }
  return w;
}

std::string CertificateReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  for (const auto& c : claims) {
    os << "claim=" << c.id << " range=\"" << c.range << "\"";
    if (c.skipped) {
      os << " min_slack=na worst=na verdict=SKIP\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.6e", c.min_slack);
    os << " min_slack=" << buf;
    std::snprintf(buf, sizeof buf, "%.9g", c.worst_alpha);
    os << " worst=(alpha=" << buf << ",b=" << c.worst_b << ",t=" << c.worst_t << ")";
    os << " checks=" << c.checks << " verdict=" << (c.pass() ? "PASS" : "FAIL") << "\n";
  }
  os << "overall=" << (passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

void CertificateReport::append(const CertificateReport& other) {
  claims.insert(claims.end(), other.claims.begin(), other.claims.end());
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
  for (const double e : {0.5, 0.75}) {
    g.push_back(e - 1e-6);
    g.push_back(e);
    g.push_back(e + 1e-6);
  }
  g.push_back(1e-6);
  g.push_back(1.0 - 1e-6);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

namespace {

double rel_slack(double lhs, double rhs) {
  return (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double identity_slack(double a, double b) {
  return 0.0 - std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

enum ClaimIndex {
  kKey, kNumerator, kDenDominates, kMomentumNonneg, kReform, kPRange, kTau, kXi, kCoupling,
  kCBound, kAlphaGtOne, kMonotone, kP1, kClaimCount
};

CertificateReport make_schedule_report(const ScanOptions& opt) {
  std::ostringstream bs;
  bs << "{";
  for (std::size_t i = 0; i < opt.batch_sizes.size(); ++i) bs << (i ? "," : "") << opt.batch_sizes[i];
  bs << "}";
  const std::string grid = "alpha in grid(" + std::to_string(opt.alpha_grid.size()) + "), b in " + bs.str();
  const std::string all_t = grid + ", t in [1," + std::to_string(opt.t_max) + "]";

  struct Spec {
    const char* id;
    std::string range;
    double tol;
    bool strict;
  };
  const Spec specs[kClaimCount] = {
      {"key_inequality", all_t, kSlackTolerance, false},
      {"numerator_nonneg", all_t, kSlackTolerance, false},
      {"denominator_dominates", all_t, kSlackTolerance, false},
      {"momentum_nonneg", all_t, kSlackTolerance, false},
      {"p_reformulation", all_t, kIdentityTolerance, false},
      {"p_range", all_t, kSlackTolerance, false},
      {"tau_range", all_t, 0.0, true},
      {"xi_range", grid, 0.0, true},
      {"coupling_range", all_t, 0.0, true},
      {"c_bound", grid, kSlackTolerance, false},
      {"alpha_gt_one", all_t, 0.0, true},
      {"alpha_monotone", grid + ", t in [17," + std::to_string(opt.t_max) + "]", kSlackTolerance, false},
      {"p1_forced", grid + ", t = 1", kIdentityTolerance, false},
  };
  CertificateReport r;
  for (const auto& s : specs) {
    ClaimResult c;
    c.id = s.id;
    c.range = s.range;
    c.tolerance = s.tol;
    c.strict = s.strict;
    r.claims.push_back(std::move(c));
  }
  return r;
}

void scan_point(double alpha, std::size_t b, const ScanOptions& opt,
                std::vector<ClaimResult>& out) {
  ScheduleParams params = derive_constants({alpha, b, b});
  if (opt.xi_override) {
    params.xi = *opt.xi_override;
    params.alpha_tilde_0 = params.xi * ScheduleParams::kAlpha0 * ScheduleParams::kAlpha0;
  }
  const double xi = params.xi;
  constexpr double a0sq = ScheduleParams::kAlpha0 * ScheduleParams::kAlpha0;

  out[kCBound].record(rel_slack(params.c, ScheduleParams::kUniformCBound), alpha, b, 0);
  out[kXi].record(std::min(xi, 1.0 - xi), alpha, b, 0);

  ScheduleCursor cur = initial_cursor(params);
  double plain_sum = 0.0;  // sum_{j<t} alpha_j, independent of the cursor's compensated sum
  for (std::uint64_t t = 1; t <= opt.t_max; ++t) {
    advance(cur, params);
    const double at = cur.alpha_t;
    const double ap = cur.alpha_prev;
    const double an = alpha_at(t + 1, params);
    const double at2 = at * at;
    const double num = ap * ap - at2 + at;

    out[kKey].record(rel_slack(xi * (an * an - at2), num), alpha, b, t);
    out[kNumerator].record(rel_slack(0.0, num), alpha, b, t);
    const double dprev = previous_denominator(cur, params);
    out[kDenDominates].record(rel_slack(xi * at2, dprev), alpha, b, t);
    out[kMomentumNonneg].record(rel_slack(0.0, xi * at2), alpha, b, t);

    const double p = p_at(cur, params);
    const double reform = (num + xi * at2) /
                          (num + params.alpha_tilde_0 + a0sq - ap * ap + plain_sum);
    out[kReform].record(identity_slack(p, reform), alpha, b, t);
    out[kPRange].record(std::min(p, 1.0 - p), alpha, b, t);

    const double tau = tau_at(cur);
    out[kTau].record(std::min(tau, 1.0 - tau), alpha, b, t);
    const double rest = 1.0 - xi - tau;
    out[kCoupling].record(std::min(rest, 1.0 - rest), alpha, b, t);
    out[kAlphaGtOne].record(at - 1.0, alpha, b, t);
    if (t >= 17) out[kMonotone].record(rel_slack(at, an), alpha, b, t);
    if (t == 1) out[kP1].record(identity_slack(p, 1.0), alpha, b, t);
    plain_sum += at;
  }
}

}  // namespace

CertificateReport scan_schedule(const ScanOptions& opt) {
  if (opt.t_max < 18) throw std::domain_error("scan_schedule: t_max must be at least 18");
  if (opt.alpha_grid.empty() || opt.batch_sizes.empty()) {
    throw std::domain_error("scan_schedule: empty alpha grid or batch-size list");
  }
  for (const double a : opt.alpha_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("scan_schedule: grid point outside [0, 1]");
  for (const auto b : opt.batch_sizes)
    if (b == 0) throw std::domain_error("scan_schedule: batch size must be positive");

  CertificateReport report = make_schedule_report(opt);
  const std::size_t points = opt.alpha_grid.size();
  std::vector<std::vector<ClaimResult>> partial(points, report.claims);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(points, opt.threads == 0 ? hw : opt.threads));
  auto work = [&](unsigned id) {
    for (std::size_t i = id; i < points; i += workers)
      for (const auto b : opt.batch_sizes) scan_point(opt.alpha_grid[i], b, opt, partial[i]);
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  // merge in grid order so the report does not depend on scheduling
  for (auto& c : report.claims) c.checks = 0;
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t k = 0; k < report.claims.size(); ++k) report.claims[k].merge(partial[i][k]);
  return report;
}

CertificateReport scan_denominator_growth(double alpha, std::uint64_t t_max, std::size_t b) {
  CertificateReport r;
  ClaimResult growth;
  growth.id = "denominator_growth";
  growth.range = "t in [17," + std::to_string(t_max) + "]";
  ClaimResult early;
  early.id = "denominator_early_ratio";
  early.range = "t in [1,16]";
  early.strict = true;
  if (alpha == 0.0) {
    growth.skipped = early.skipped = true;
    r.claims = {growth, early};
    return r;
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("scan_denominator_growth: alpha must lie in (0, 1]");
  const ScheduleParams params = compute_constants({alpha, b, b});
  const double ta = tilde_a(alpha);
  ScheduleCursor cur = initial_cursor(params);
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    advance(cur, params);
    const double D = denominator_at(cur, params);
    const double tp = std::pow(static_cast<double>(t), alpha + 1.0);
    if (t < 17) {
      early.record(D / tp, alpha, b, t);
    } else {
      growth.record(rel_slack(ta * tp, D), alpha, b, t);
    }
  }
  r.claims = {growth, early};
  return r;
}

bool DescentCheck::holds(double rel_tol) const noexcept {
  return expected_next <= current + rel_tol * std::max(1.0, std::abs(current));
}

DescentCheck exact_conditional_lyapunov_descent(const SolverState& state,
                                                const FiniteSumProblem& problem,
                                                const ScheduleParams& params, double cap) {
  if (!problem.reference()) {
    throw std::invalid_argument("exact_conditional_lyapunov_descent: problem has no reference solution");
  }
  const auto& ref = *problem.reference();
  const ScheduleCursor& cur = state.cursor;
  if (cur.t < 1) throw std::invalid_argument("exact_conditional_lyapunov_descent: cursor must be at t >= 1");

  const double gap_y = problem.objective(state.y) - ref.F_star;
  const double gap_w = problem.objective(state.ckpt.w) - ref.F_star;
  DescentCheck out;
  out.current = lyapunov_value(cur.alpha_prev * cur.alpha_prev, previous_denominator(cur, params),
                               gap_y, gap_w, (state.z - ref.x_star).squaredNorm(), state.eta);

  const double p = p_at(cur, params);
  const double D = denominator_at(cur, params);
  const double at2 = cur.alpha_t * cur.alpha_t;
  const double w_term = D * (p * gap_y + (1.0 - p) * gap_w);

  Transition tr;
  IfoLedger scratch;
  double acc = 0.0;
  std::size_t count = 0;
  for_each_subset(problem.n(), params.batch_size, cap, [&](std::span<const std::uint32_t> J) {
    katyusha_h_transition(state, J, problem, params, tr, scratch);
    const double gy = problem.objective(tr.y_next) - ref.F_star;
    acc += at2 * gy + w_term + (tr.z_next - ref.x_star).squaredNorm() / (2.0 * state.eta);
    ++count;
  });
  out.subsets = count;
  out.expected_next = acc / static_cast<double>(count);
  return out;
}

CertificateReport verify_lemma2(const FiniteSumProblem& problem,
                                std::span<const std::pair<Vector, Vector>> points,
                                std::span<const std::size_t> b_values, double cap) {
  const std::size_t n = problem.n();
  ClaimResult bound{"variance_bound", std::to_string(points.size()) + " (x,w) pairs"};
  ClaimResult ident{"subset_sum_identity", bound.range};
  ident.tolerance = kIdentityTolerance;
  ClaimResult unbiased{"unbiasedness", bound.range};
  unbiased.tolerance = kIdentityTolerance;

  IfoLedger scratch;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& [x, w] = points[k];
    const Checkpoint ckpt = make_checkpoint(problem, w, scratch);
    // X_j = grad f_j(x) - grad f_j(w), stored as slope differences times a_j
    Vector diff_slopes = problem.slopes(x) - problem.slopes(w);
    for (const auto b : b_values) {
      const double var = exact_variance(x, ckpt, b, problem, cap);
      const double rhs = variance_bound_rhs(x, w, b, problem);
      bound.record(rel_slack(var, rhs), 0.0, b, k);

      Vector lhs = Vector::Zero(problem.dim());
      std::size_t count = 0;
      for_each_subset(n, b, cap, [&](std::span<const std::uint32_t> J) {
        for (const auto j : J) lhs += diff_slopes[j] * problem.rows().row(j).transpose();
        ++count;
      });
      lhs /= static_cast<double>(count);
      Vector total = Vector::Zero(problem.dim());
      for (std::size_t j = 0; j < n; ++j) total += diff_slopes[j] * problem.rows().row(j).transpose();
      total *= static_cast<double>(b) / static_cast<double>(n);
      const double scale = std::max(1.0, total.lpNorm<Eigen::Infinity>());
      ident.record(-(lhs - total).lpNorm<Eigen::Infinity>() / scale, 0.0, b, k);

      const Vector mean = enumerated_mean_estimate(x, ckpt, b, problem, cap);
      const Vector g = problem.full_gradient(x);
      const double gs = std::max(1.0, g.lpNorm<Eigen::Infinity>());
      unbiased.record(-(mean - g).lpNorm<Eigen::Infinity>() / gs, 0.0, b, k);
    }
  }
  CertificateReport r;
  r.claims = {bound, ident, unbiased};
  return r;
}

}  // namespace kh
