#include "kh/optimizers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kh/analysis.hpp"
#include "kh/proximal.hpp"

namespace kh {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void katyusha_h_transition(const SolverState& s, std::span<const std::uint32_t> J,
                           const FiniteSumProblem& problem, const ScheduleParams& params,
                           Transition& out, IfoLedger& ledger) {
  const double tau = tau_at(s.cursor);
  const double xi = params.xi;
  out.x_next = tau * s.z + xi * s.ckpt.w + (1.0 - xi - tau) * s.y;
  svrg_estimate_into(out.x_next, s.ckpt, J, problem, ledger, out.g);
  const double step = s.cursor.alpha_t * s.eta;
  out.z_next = s.z - step * out.g;
  prox_into(problem.regularizer(), out.z_next, step, out.z_next);
  out.y_next = out.x_next + tau * (out.z_next - s.z);
}

KatyushaH::KatyushaH(const FiniteSumProblem& problem, const KatyushaConfig& config)
    : problem_(problem), config_(config), sampler_(problem.n()) {
  ScheduleConfig sc{config.alpha, config.batch_size, problem.n()};
  params_ = compute_constants(sc);

  const double eta_max = max_step_size(problem.smoothness(), params_);
  state_.eta = config.eta.value_or(eta_max);
  if (!(state_.eta > 0.0) || state_.eta > eta_max * (1.0 + 1e-12)) {
    throw std::domain_error("katyusha_h: eta must lie in (0, 1/((c+1)L)]");
  }
  if ((config.track_lyapunov || config.target_gap) && !problem.reference()) {
    throw std::invalid_argument(
        "katyusha_h: Lyapunov tracking and target gaps need a reference solution");
  }

  const Vector x0 = config.x0.value_or(Vector::Zero(static_cast<Eigen::Index>(problem.dim())));
  if (static_cast<std::size_t>(x0.size()) != problem.dim()) {
    throw std::invalid_argument("katyusha_h: x0 has the wrong dimension");
  }
  state_.x = x0;
  state_.y = x0;
  state_.z = x0;
  state_.ckpt = make_checkpoint(problem, x0, state_.ledger, config.cache_checkpoint_slopes);
  state_.cursor = cursor_at(1, params_);
  state_.rng = SplitMix64(config.seed);
  state_.y_is_checkpoint_copy = true;
  F_w_ = problem.objective(state_.ckpt.w);
}

StepOutcome KatyushaH::step() {
  StepOutcome out;
  out.t = state_.cursor.t;
  out.p = p_at(state_.cursor, params_);

  const auto J = sampler_.draw(config_.batch_size, state_.rng);
  katyusha_h_transition(state_, J, problem_, params_, scratch_, state_.ledger);

  // The checkpoint candidate is y_t, the value before this iteration's update.
  y_prev_.swap(state_.y);
  state_.x.swap(scratch_.x_next);
  state_.z.swap(scratch_.z_next);
  state_.y.swap(scratch_.y_next);

  out.checkpoint = maybe_update_checkpoint(state_.ckpt, y_prev_, state_.y_is_checkpoint_copy,
                                           out.p, state_.rng, problem_, state_.ledger);
  if (out.checkpoint.recomputed) F_w_ = problem_.objective(state_.ckpt.w);
  state_.y_is_checkpoint_copy = false;
  advance(state_.cursor, params_);
  return out;
}

TraceRecord KatyushaH::observe(const StepOutcome* last) const {
  TraceRecord r;
  r.t = iterations();
  r.F_y = problem_.objective(state_.y);
  r.F_w = F_w_;
  r.p_t = last ? last->p : kNaN;
  r.checkpoint_updated = last ? last->checkpoint.drawn : false;
  r.ifo_total = state_.ledger.total();
  r.ifo_single = state_.ledger.total_single_eval();
  if (config_.track_lyapunov) {
    const auto& ref = *problem_.reference();
    const double a_prev = state_.cursor.alpha_prev;
    r.lyapunov = lyapunov_value(a_prev * a_prev, previous_denominator(state_.cursor, params_),
                                r.F_y - ref.F_star, r.F_w - ref.F_star,
                                (state_.z - ref.x_star).squaredNorm(), state_.eta);
  }
  return r;
}

RunResult run(const FiniteSumProblem& problem, const KatyushaConfig& config) {
  KatyushaH solver(problem, config);
  RunResult result;
  result.params = solver.params();

  const auto target_met = [&] {
    return config.target_gap &&
           solver.checkpoint_objective() - problem.reference()->F_star <= *config.target_gap;
  };

  result.trace.push_back(solver.observe(nullptr));
  if (target_met()) {
    result.reached_target = true;
  } else {
    for (std::uint64_t k = 1; k <= config.max_iterations; ++k) {
      const StepOutcome out = solver.step();
      const bool reached = target_met();
      const bool stride_hit = config.trace_stride > 0 && k % config.trace_stride == 0;
      if (stride_hit || reached || k == config.max_iterations) {
        result.trace.push_back(solver.observe(&out));
      }
      if (reached) {
        result.reached_target = true;
        break;
      }
    }
  }
  result.iterations = solver.iterations();
  result.ledger = solver.state().ledger;
  result.ifo_at_stop = result.ledger.total();
  result.final_state = solver.state();
  return result;
}

}  // namespace kh
