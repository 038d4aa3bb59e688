#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "kh/libsvm.hpp"
#include "kh/optimizers.hpp"
#include "kh/reference.hpp"
#include "kh/schedule.hpp"

using namespace kh;

namespace {

FiniteSumProblem two_point() { return make_least_squares(parse_libsvm("1 1:1\n-1 1:1\n")); }

FiniteSumProblem lasso_instance(std::size_t n, std::size_t d, std::uint64_t seed, double lam) {
  auto p = synthesize({.n = n, .d = d, .seed = seed, .normalize_rows = true}).problem;
  p.set_regularizer(Regularizer::lasso(lam));
  p.set_reference(solve_reference(p, 1e-12).solution);
  return p;
}

}  // namespace

TEST_CASE("hand trace of the first iteration, 1-D quadratic, b = n, alpha = 1") {
  auto p = two_point();
  const Vector x0 = Vector::Constant(1, 1.0);
  KatyushaConfig cfg;
  cfg.alpha = 1.0;
  cfg.batch_size = 2;
  cfg.eta = 0.25;
  cfg.x0 = x0;
  KatyushaH solver(p, cfg);
  solver.step();
  const auto& st = solver.state();
  // x2 = x1 = 1; g = grad f(1) = 1; z2 = 1 - 6 * 0.25 * 1 = -0.5;
  // y2 = x2 + (1/6)(z2 - z1) = 1 - 0.25 = 0.75; p1 = 1 so w2 = y1 = 1
  CHECK(std::abs(st.x[0] - 1.0) < 1e-14);
  CHECK(std::abs(st.z[0] + 0.5) < 1e-14);
  CHECK(std::abs(st.y[0] - 0.75) < 1e-14);
  CHECK(std::abs(st.ckpt.w[0] - 1.0) < 1e-14);
  // second iteration: x3 = tau z2 + xi w2 + (1 - xi - tau) y2
  solver.step();
  // b = 2: c = 3 and xi = 1/(b c) = 1/6
  const double xi = 1.0 / 6.0, tau = 1.0 / 6.0;
  const double x3 = tau * -0.5 + xi * 1.0 + (1 - xi - tau) * 0.75;
  CHECK(std::abs(solver.state().x[0] - x3) < 1e-14);
  const double z3 = -0.5 - 6 * 0.25 * x3;
  CHECK(std::abs(solver.state().z[0] - z3) < 1e-14);
  CHECK(std::abs(solver.state().y[0] - (x3 + tau * (z3 + 0.5))) < 1e-14);
}

TEST_CASE("first step from equal iterates keeps x") {
  auto p = synthesize({.n = 10, .d = 3, .seed = 1}).problem;
  KatyushaConfig cfg;
  cfg.batch_size = 3;
  cfg.x0 = Vector::Constant(3, 0.4);
  KatyushaH s(p, cfg);
  s.step();
  CHECK((s.state().x - *cfg.x0).norm() == 0.0);
}

TEST_CASE("zero regularizer gives the plain z step") {
  auto p = synthesize({.n = 10, .d = 3, .seed = 2}).problem;
  KatyushaConfig cfg;
  cfg.alpha = 0.5;
  cfg.batch_size = 2;
  KatyushaH s(p, cfg);
  for (int k = 0; k < 30; ++k) s.step();
  Transition tr;
  IfoLedger led;
  const std::uint32_t J[] = {1, 4};
  katyusha_h_transition(s.state(), J, p, s.params(), tr, led);
  const double step = s.state().cursor.alpha_t * s.state().eta;
  CHECK((tr.z_next - (s.state().z - step * tr.g)).norm() < 1e-15);
}

TEST_CASE("per-step identities") {
  auto p = lasso_instance(20, 5, 3, 0.01);
  for (double a : {0.0, 0.5, 1.0}) {
    KatyushaConfig cfg;
    cfg.alpha = a;
    cfg.batch_size = 4;
    KatyushaH s(p, cfg);
    for (int k = 0; k < 200; ++k) {
      const auto& st = s.state();
      Transition tr;
      IfoLedger led;
      const std::uint32_t J[] = {0, 3, 7, 19};
      katyusha_h_transition(st, J, p, s.params(), tr, led);
      const double tau = 1.0 / st.cursor.alpha_t;
      CHECK((tr.y_next - tr.x_next - tau * (tr.z_next - st.z)).norm() <=
            1e-15 * std::max(1.0, tr.y_next.norm()));
      const double rest = 1.0 - s.params().xi - tau;
      CHECK(rest > 0.0);
      CHECK(rest < 1.0);
      CHECK(tau + s.params().xi + rest == doctest::Approx(1.0).epsilon(1e-15));
      s.step();
    }
  }
}

TEST_CASE("b = n estimate equals the full gradient in the step") {
  auto p = synthesize({.n = 6, .d = 3, .seed = 5}).problem;
  KatyushaConfig cfg;
  cfg.batch_size = 6;
  KatyushaH s(p, cfg);
  for (int k = 0; k < 5; ++k) s.step();
  Transition tr;
  IfoLedger led;
  const std::uint32_t J[] = {0, 1, 2, 3, 4, 5};
  katyusha_h_transition(s.state(), J, p, s.params(), tr, led);
  CHECK(tr.g == p.full_gradient(tr.x_next));
}

TEST_CASE("run contracts") {
  auto p = lasso_instance(30, 6, 4, 0.02);
  KatyushaConfig cfg;
  cfg.alpha = 0.5;
  cfg.batch_size = 3;
  cfg.max_iterations = 0;
  auto r = run(p, cfg);
  CHECK(r.trace.size() == 1);
  CHECK(r.trace[0].t == 0);
  CHECK(std::isnan(r.trace[0].p_t));
  CHECK(r.trace[0].ifo_total == 30);

  cfg.max_iterations = 500;
  cfg.seed = 9;
  const auto a = run(p, cfg), b = run(p, cfg);
  CHECK(a.trace == b.trace);
  CHECK(a.trace.size() == 501);
  cfg.seed = 10;
  CHECK_FALSE(run(p, cfg).trace == a.trace);

  for (std::size_t i = 1; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].ifo_total >= a.trace[i - 1].ifo_total);
    CHECK(a.trace[i].t == i);
  }
  CHECK(a.ledger.minibatch_calls == 2 * 3 * 500);
  std::uint64_t updates = 0;
  for (const auto& rec : a.trace) updates += rec.checkpoint_updated && rec.t > 1;
  // the forced update at t = 1 reuses the initial gradient
  CHECK(a.ledger.checkpoint_calls == 30 * (1 + updates));
  CHECK(a.trace[1].p_t == doctest::Approx(1.0));
  CHECK(a.trace.back().ifo_single == a.ledger.total_single_eval());
}

TEST_CASE("trace stride and target stop") {
  auto p = lasso_instance(30, 6, 4, 0.02);
  KatyushaConfig cfg;
  cfg.alpha = 1.0;
  cfg.batch_size = 2;
  cfg.max_iterations = 1000;
  cfg.trace_stride = 100;
  auto r = run(p, cfg);
  CHECK(r.trace.size() == 11);
  cfg.trace_stride = 1;
  cfg.target_gap = 1e-6;
  cfg.max_iterations = 1000000;
  r = run(p, cfg);
  CHECK(r.reached_target);
  CHECK(r.trace.back().F_w - p.reference()->F_star <= 1e-6);
  CHECK(r.trace[r.trace.size() - 2].F_w - p.reference()->F_star > 1e-6);
  CHECK(r.ifo_at_stop == r.trace.back().ifo_total);
}

TEST_CASE("configuration errors") {
  auto p = synthesize({.n = 10, .d = 3, .seed = 1}).problem;
  KatyushaConfig cfg;
  cfg.target_gap = 1e-3;
  CHECK_THROWS_AS(run(p, cfg), std::invalid_argument);
  cfg.target_gap.reset();
  cfg.track_lyapunov = true;
  CHECK_THROWS_AS(run(p, cfg), std::invalid_argument);
  cfg.track_lyapunov = false;
  cfg.batch_size = 11;
  CHECK_THROWS_AS(run(p, cfg), std::domain_error);
  cfg.batch_size = 1;
  const auto params = compute_constants({1.0, 1, 10});
  cfg.eta = 1.01 * max_step_size(p.smoothness(), params);
  CHECK_THROWS(run(p, cfg));
}

TEST_CASE("lasso converges toward the reference") {
  auto p = lasso_instance(100, 20, 7, 0.01);
  KatyushaConfig cfg;
  cfg.alpha = 1.0;
  cfg.batch_size = 10;
  cfg.max_iterations = 3000;
  cfg.trace_stride = 0;
  const auto r = run(p, cfg);
  const double g0 = r.trace.front().F_w - p.reference()->F_star;
  const double g1 = r.trace.back().F_w - p.reference()->F_star;
  CHECK(g1 >= -p.reference()->gap_tolerance);
  CHECK(g1 < 1e-3 * g0);
}

TEST_CASE("fista baseline") {
  auto p = synthesize({.n = 20, .d = 4, .seed = 3}).problem;
  BaselineConfig cfg;
  cfg.max_iterations = 1;
  const auto one = fista_run(p, cfg);
  const Vector expect = -p.full_gradient(Vector::Zero(4)) / p.smoothness();
  CHECK((one.x_final - expect).norm() < 1e-15);
  CHECK(one.ledger.total() == 20);

  cfg.max_iterations = 300;
  const auto r = fista_run(p, cfg);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].F_w <= r.trace[i - 1].F_w);
}

TEST_CASE("fista sublinear decay on a lasso instance") {
  SynthSpec spec{.n = 50, .d = 100, .seed = 17, .column_decay = 1.0, .normalize_rows = true};
  auto p = synthesize(spec).problem;
  p.set_regularizer(Regularizer::lasso(1e-4));
  p.set_reference(solve_reference(p, 1e-12, 5'000'000).solution);
  BaselineConfig cfg;
  cfg.max_iterations = 1000;
  cfg.trace_stride = 100;
  const auto r = fista_run(p, cfg);
  const double F = p.reference()->F_star;
  const double g100 = r.trace[1].F_y - F, g1000 = r.trace.back().F_y - F;
  REQUIRE(r.trace[1].t == 100);
  CHECK(g100 >= 20.0 * g1000);
}

TEST_CASE("pgd converges linearly on a strongly convex quadratic") {
  // f(x) = mean of (x - b_i)^2 / 2 over scaled unit rows: Hessian diag(mean a_k^2)
  const auto p = make_least_squares(parse_libsvm("1 1:1\n2 2:0.5\n-1 1:1\n0.5 2:0.5\n"));
  // Hessian diag(1/2, 1/8), L = 1 so the contraction is 1 - mu/L = 7/8
  const auto ref = solve_reference(p, 1e-14);
  BaselineConfig cfg;
  cfg.max_iterations = 60;
  cfg.x0 = Vector::Constant(2, 5.0);
  const auto r = pgd_run(p, cfg);
  CHECK(r.ledger.total() == 4 * 60);
  const Vector e0 = *cfg.x0 - ref.solution.x_star;
  const Vector e60 = r.x_final - ref.solution.x_star;
  CHECK(e60.norm() <= std::pow(7.0 / 8.0, 60) * e0.norm() * (1 + 1e-9));
  CHECK(std::abs(e60[1]) == doctest::Approx(std::pow(7.0 / 8.0, 60) * std::abs(e0[1])).epsilon(1e-6));
}

TEST_CASE("psgd costs one IFO per iteration") {
  auto p = synthesize({.n = 20, .d = 4, .seed = 3}).problem;
  BaselineConfig cfg;
  cfg.max_iterations = 777;
  cfg.trace_stride = 0;
  const auto r = psgd_run(p, cfg);
  CHECK(r.ledger.total() == 777);
  CHECK(r.iterations == 777);
  CHECK(std::isfinite(r.trace.back().F_y));
}
