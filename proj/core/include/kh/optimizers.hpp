#ifndef KH_OPTIMIZERS_HPP
#define KH_OPTIMIZERS_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kh/estimator.hpp"
#include "kh/problems.hpp"
#include "kh/rng.hpp"
#include "kh/schedule.hpp"
#include "kh/types.hpp"

namespace kh {

/// Raw per-iteration observables. Objective values are F, not gaps; traces
/// subtract F_star on output.
struct TraceRecord {
  std::uint64_t t = 0;                   ///< iterations completed
  double F_y = 0.0;                      ///< F(y_{t+1})
  double F_w = 0.0;                      ///< F(w_{t+1})
  double p_t = 0.0;                      ///< probability used at iteration t (NaN at t = 0)
  bool checkpoint_updated = false;
  std::uint64_t ifo_total = 0;
  std::uint64_t ifo_single = 0;          ///< ledger total under the b-per-iteration convention
  std::optional<double> lyapunov;        ///< L_{t+1}

  /// Field-wise identity; NaN entries compare equal to themselves so traces of
  /// repeated runs compare equal.
  friend bool operator==(const TraceRecord& a, const TraceRecord& b) noexcept {
    const auto same = [](double u, double v) { return std::bit_cast<std::uint64_t>(u) == std::bit_cast<std::uint64_t>(v); };
    const bool lyap = a.lyapunov.has_value() == b.lyapunov.has_value() &&
                      (!a.lyapunov || same(*a.lyapunov, *b.lyapunov));
    return a.t == b.t && same(a.F_y, b.F_y) && same(a.F_w, b.F_w) && same(a.p_t, b.p_t) &&
           a.checkpoint_updated == b.checkpoint_updated && a.ifo_total == b.ifo_total &&
           a.ifo_single == b.ifo_single && lyap;
  }
};

struct KatyushaConfig {
  double alpha = 1.0;
  std::size_t batch_size = 1;
  std::optional<double> eta;             ///< defaults to max_step_size(L)
  std::uint64_t max_iterations = 1000;
  std::optional<double> target_gap;      ///< stop once F(w_{t+1}) - F* <= target
  std::uint64_t seed = 0;
  std::uint64_t trace_stride = 1;        ///< 0 keeps only the first and last records
  bool track_lyapunov = false;
  bool cache_checkpoint_slopes = false;
  std::optional<Vector> x0;              ///< defaults to the origin
};

/// The four coupled iterates plus everything a step needs.
struct SolverState {
  Vector x, y, z;
  Checkpoint ckpt;
  ScheduleCursor cursor;  ///< at t: the iteration about to run
  SplitMix64 rng;
  IfoLedger ledger;
  double eta = 0.0;
  bool y_is_checkpoint_copy = true;  ///< y was never modified since w was copied from it
};

/// Iterates produced by one deterministic transition given the subset J.
struct Transition {
  Vector x_next, g, z_next, y_next;
};

/// Lines 1, 3, 4, 5 of the iteration for a fixed subset: coupling, estimate,
/// proximal z-step, y-step. Pure apart from the ledger charge.
void katyusha_h_transition(const SolverState& state, std::span<const std::uint32_t> J,
                           const FiniteSumProblem& problem, const ScheduleParams& params,
                           Transition& out, IfoLedger& ledger);

struct StepOutcome {
  std::uint64_t t = 0;  ///< iteration index just executed
  double p = 0.0;
  CheckpointOutcome checkpoint;
};

/// Single-loop accelerated variance-reduced method with checkpoint update
/// probabilities tied to the momentum schedule.
class KatyushaH {
 public:
  /// Throws std::invalid_argument / std::domain_error on invalid configuration
  /// (bad alpha or b, eta above the admissible cap, tracking without a reference).
  KatyushaH(const FiniteSumProblem& problem, const KatyushaConfig& config);

  StepOutcome step();

  /// Observables of the current state; evaluates F(y) and, if enabled, the Lyapunov value.
  TraceRecord observe(const StepOutcome* last) const;

  /// F(w_{t+1}), cached across steps that leave the checkpoint unchanged.
  double checkpoint_objective() const noexcept { return F_w_; }

  const SolverState& state() const noexcept { return state_; }
  SolverState& mutable_state() noexcept { return state_; }
  const ScheduleParams& params() const noexcept { return params_; }
  const FiniteSumProblem& problem() const noexcept { return problem_; }
  std::uint64_t iterations() const noexcept { return state_.cursor.t - 1; }

 private:
  const FiniteSumProblem& problem_;
  KatyushaConfig config_;
  ScheduleParams params_;
  SolverState state_;
  SubsetSampler sampler_;
  Transition scratch_;
  Vector y_prev_;
  double F_w_ = 0.0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  std::uint64_t iterations = 0;
  bool reached_target = false;
  std::uint64_t ifo_at_stop = 0;
  IfoLedger ledger;
  ScheduleParams params;
  SolverState final_state;
};

/// Runs until max_iterations or until the target gap is met. Deterministic in the seed.
RunResult run(const FiniteSumProblem& problem, const KatyushaConfig& config);

// ---------------------------------------------------------------------------
// Baselines.

struct BaselineConfig {
  std::uint64_t max_iterations = 1000;
  std::optional<double> step;            ///< 1/L by default (PSGD: eta0 = 1/L)
  std::optional<double> target_gap;
  std::optional<double> mapping_tol;     ///< stop when ||gradient mapping|| <= tol
  std::uint64_t trace_stride = 1;
  std::uint64_t seed = 0;
  bool adaptive_restart = false;         ///< FISTA gradient-based momentum restart
  std::optional<Vector> x0;
};

struct BaselineResult {
  std::vector<TraceRecord> trace;        ///< F_y = F(x_k), F_w = best F so far
  Vector x_final;
  Vector x_best;
  double F_best = 0.0;
  std::uint64_t iterations = 0;
  bool reached_target = false;
  double mapping_norm = 0.0;             ///< at x_best (FISTA with mapping_tol only)
  IfoLedger ledger;
};

/// Accelerated proximal gradient (FISTA), n IFO per iteration.
BaselineResult fista_run(const FiniteSumProblem& problem, const BaselineConfig& config);
/// Proximal gradient descent, n IFO per iteration.
BaselineResult pgd_run(const FiniteSumProblem& problem, const BaselineConfig& config);
/// Single-sample proximal SGD with step eta0 / sqrt(k), 1 IFO per iteration.
BaselineResult psgd_run(const FiniteSumProblem& problem, const BaselineConfig& config);

}  // namespace kh

#endif  // KH_OPTIMIZERS_HPP
