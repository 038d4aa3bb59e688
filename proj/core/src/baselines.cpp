#include <cmath>
#include <limits>
#include <stdexcept>

#include "kh/optimizers.hpp"
#include "kh/proximal.hpp"

namespace kh {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector initial_point(const FiniteSumProblem& problem, const BaselineConfig& config) {
  Vector x0 = config.x0.value_or(Vector::Zero(static_cast<Eigen::Index>(problem.dim())));
  if (static_cast<std::size_t>(x0.size()) != problem.dim()) {
    throw std::invalid_argument("baseline: x0 has the wrong dimension");
  }
  return x0;
}

double default_step(const FiniteSumProblem& problem, const BaselineConfig& config) {
  const double step = config.step.value_or(1.0 / problem.smoothness());
  if (!(step > 0.0)) throw std::domain_error("baseline: step must be positive");
  return step;
}

void check_target(const FiniteSumProblem& problem, const BaselineConfig& config) {
  if (config.target_gap && !problem.reference()) {
    throw std::invalid_argument("baseline: a target gap needs a reference solution");
  }
}

struct Recorder {
  const FiniteSumProblem& problem;
  const BaselineConfig& config;
  BaselineResult& result;

  void record(std::uint64_t k, double F) {
    TraceRecord r;
    r.t = k;
    r.F_y = F;
    r.F_w = result.F_best;
    r.p_t = kNaN;
    r.ifo_total = result.ledger.total();
    r.ifo_single = result.ledger.total_single_eval();
    result.trace.push_back(r);
  }
  bool due(std::uint64_t k) const {
    return (config.trace_stride > 0 && k % config.trace_stride == 0) || k == config.max_iterations;
  }
  bool reached() const {
    return config.target_gap && result.F_best - problem.reference()->F_star <= *config.target_gap;
  }
};

void charge_full_pass(IfoLedger& ledger, std::size_t n) {
  ledger.minibatch_calls += n;
  ledger.sampled_components += n;
}

}  // namespace

BaselineResult fista_run(const FiniteSumProblem& problem, const BaselineConfig& config) {
  check_target(problem, config);
  const double step = default_step(problem, config);
  const Regularizer& reg = problem.regularizer();

  BaselineResult result;
  Recorder rec{problem, config, result};
  Vector x = initial_point(problem, config);
  Vector y = x;
  Vector x_new(x.size());
  double F_x = problem.objective(x);
  double theta = 1.0;
  result.x_best = x;
  result.F_best = F_x;
  rec.record(0, F_x);

  double mapping_at_y = std::numeric_limits<double>::infinity();
  std::uint64_t k = 0;
  while (k < config.max_iterations && !rec.reached()) {
    ++k;
    const Vector g = problem.full_gradient(y);
    charge_full_pass(result.ledger, problem.n());
    prox_into(reg, y - step * g, step, x_new);
    mapping_at_y = (y - x_new).norm() / step;
    const double F_new = problem.objective(x_new);

    // gradient restart: drop momentum when the step opposes the last move
    const bool restart = config.adaptive_restart && (y - x_new).dot(x_new - x) > 0.0;
    if (restart) {
      theta = 1.0;
      y = x_new;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = x_new + ((theta - 1.0) / theta_next) * (x_new - x);
      theta = theta_next;
    }
    x.swap(x_new);
    F_x = F_new;
    if (F_x < result.F_best) {
      result.F_best = F_x;
      result.x_best = x;
    }
    if (rec.due(k) || rec.reached()) rec.record(k, F_x);
    if (config.mapping_tol && mapping_at_y <= *config.mapping_tol) break;
  }
  result.iterations = k;
  result.x_final = x;
  result.reached_target = rec.reached();
  if (config.mapping_tol) {
    const Vector G = problem.gradient_mapping(result.x_best);
    result.mapping_norm = G.norm();
  }
  if (result.trace.back().t != k) rec.record(k, F_x);
  return result;
}

BaselineResult pgd_run(const FiniteSumProblem& problem, const BaselineConfig& config) {
  check_target(problem, config);
  const double step = default_step(problem, config);
  BaselineResult result;
  Recorder rec{problem, config, result};
  Vector x = initial_point(problem, config);
  double F_x = problem.objective(x);
  result.x_best = x;
  result.F_best = F_x;
  rec.record(0, F_x);

  std::uint64_t k = 0;
  while (k < config.max_iterations && !rec.reached()) {
    ++k;
    const Vector g = problem.full_gradient(x);
    charge_full_pass(result.ledger, problem.n());
    prox_into(problem.regularizer(), x - step * g, step, x);
    F_x = problem.objective(x);
    if (F_x < result.F_best) {
      result.F_best = F_x;
      result.x_best = x;
    }
    if (rec.due(k) || rec.reached()) rec.record(k, F_x);
  }
  result.iterations = k;
  result.x_final = x;
  result.reached_target = rec.reached();
  if (result.trace.back().t != k) rec.record(k, F_x);
  return result;
}

BaselineResult psgd_run(const FiniteSumProblem& problem, const BaselineConfig& config) {
  check_target(problem, config);
  const double eta0 = default_step(problem, config);
  BaselineResult result;
  Recorder rec{problem, config, result};
  SplitMix64 rng(config.seed);
  Vector x = initial_point(problem, config);
  double F_x = problem.objective(x);
  result.x_best = x;
  result.F_best = F_x;
  rec.record(0, F_x);

  std::uint64_t k = 0;
  while (k < config.max_iterations) {
    ++k;
    const auto i = static_cast<std::size_t>(rng.uniform_below(problem.n()));
    const double eta = eta0 / std::sqrt(static_cast<double>(k));
    const double s = problem.component_slope(i, x);
    ++result.ledger.minibatch_calls;
    ++result.ledger.sampled_components;
    Vector v = x - (eta * s) * problem.rows().row(static_cast<Eigen::Index>(i)).transpose();
    prox_into(problem.regularizer(), v, eta, x);
    if (rec.due(k)) {
      F_x = problem.objective(x);
      if (F_x < result.F_best) {
        result.F_best = F_x;
        result.x_best = x;
      }
      rec.record(k, F_x);
      if (rec.reached()) break;
    }
  }
  result.iterations = k;
  result.x_final = x;
  result.reached_target = rec.reached();
  if (result.trace.back().t != k) {
    F_x = problem.objective(x);
    if (F_x < result.F_best) {
      result.F_best = F_x;
      result.x_best = x;
    }
    rec.record(k, F_x);
  }
  return result;
}

}  // namespace kh
