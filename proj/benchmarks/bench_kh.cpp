#include <benchmark/benchmark.h>

#include "kh/estimator.hpp"
#include "kh/optimizers.hpp"
#include "kh/problems.hpp"
#include "kh/proximal.hpp"
#include "kh/schedule.hpp"
#include "kh/verification.hpp"

using namespace kh;

namespace {

const FiniteSumProblem& lasso_problem() {
  static const FiniteSumProblem p = [] {
    auto q = synthesize({.n = 2000, .d = 200, .seed = 11, .column_decay = 1.0, .normalize_rows = true}).problem;
    q.set_regularizer(Regularizer::lasso(1e-3));
    return q;
  }();
  return p;
}

}  // namespace

// Full certificate scan at a reduced horizon; linear in t_max.
static void BM_ScheduleScan(benchmark::State& state) {
  ScanOptions opt;
  opt.t_max = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scan_schedule(opt).passed());
  state.SetItemsProcessed(state.iterations() * state.range(0) * opt.alpha_grid.size() * opt.batch_sizes.size());
}
BENCHMARK(BM_ScheduleScan)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ScheduleAdvance(benchmark::State& state) {
  const auto p = compute_constants({0.5, 1, 1});
  auto c = initial_cursor(p);
  for (auto _ : state) {
    advance(c, p);
    benchmark::DoNotOptimize(p_at(c, p));
  }
}
BENCHMARK(BM_ScheduleAdvance);

static void BM_SvrgEstimate(benchmark::State& state) {
  const auto& P = lasso_problem();
  const auto b = static_cast<std::size_t>(state.range(0));
  IfoLedger ledger;
  const Checkpoint ck = make_checkpoint(P, Vector::Zero(P.dim()), ledger);
  const Vector x = Vector::Constant(P.dim(), 0.01);
  SubsetSampler sampler(P.n());
  SplitMix64 rng(1);
  Vector out(P.dim());
  for (auto _ : state) {
    svrg_estimate_into(x, ck, sampler.draw(b, rng), P, ledger, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SvrgEstimate)->Arg(1)->Arg(10)->Arg(45);

static void BM_KatyushaStep(benchmark::State& state) {
  const auto& P = lasso_problem();
  KatyushaConfig cfg;
  cfg.alpha = state.range(0) / 100.0;
  cfg.batch_size = static_cast<std::size_t>(state.range(1));
  KatyushaH solver(P, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step());
}
BENCHMARK(BM_KatyushaStep)->Args({0, 1})->Args({50, 1})->Args({100, 1})->Args({100, 10});

static void BM_ProxLasso(benchmark::State& state) {
  const Vector v = Vector::LinSpaced(static_cast<Eigen::Index>(state.range(0)), -1.0, 1.0);
  Vector out(v.size());
  const auto reg = Regularizer::lasso(0.1);
  for (auto _ : state) {
    prox_into(reg, v, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ProxLasso)->Arg(200)->Arg(10000);
BENCHMARK_MAIN();
