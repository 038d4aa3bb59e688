#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "kh/analysis.hpp"
#include "kh/reference.hpp"
#include "kh/verification.hpp"

using namespace kh;

namespace {

ScanOptions small_scan(std::uint64_t t_max) {
  ScanOptions o;
  o.t_max = t_max;
  return o;
}

FiniteSumProblem small_lasso(std::uint64_t seed) {
  auto p = synthesize({.n = 6, .d = 4, .seed = seed}).problem;
  p.set_regularizer(Regularizer::lasso(0.05));
  p.set_reference(solve_reference(p, 1e-13).solution);
  return p;
}

}  // namespace

TEST_CASE("default grid contents") {
  const auto g = default_alpha_grid();
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(std::is_sorted(g.begin(), g.end()));
  for (double probe : {0.5 - 1e-6, 0.5 + 1e-6, 0.75 - 1e-6, 0.75 + 1e-6, 0.5, 0.75})
    CHECK(std::find(g.begin(), g.end(), probe) != g.end());
  CHECK(g.size() >= 101);
}

TEST_CASE("schedule scan passes on the default grid") {
  const auto r = scan_schedule(small_scan(3000));
  CHECK(r.passed());
  for (const auto& c : r.claims) {
    INFO(c.id);
    CHECK(c.checks > 0);
    CHECK(c.pass());
  }
  CHECK(r.find("p1_forced")->min_slack >= -1e-12);
  CHECK(r.find("key_inequality") != nullptr);
  CHECK(r.find("nope") == nullptr);
}

TEST_CASE("alpha = 0 passes trivially") {
  ScanOptions o = small_scan(500);
  o.alpha_grid = {0.0};
  CHECK(scan_schedule(o).passed());
}

TEST_CASE("fault injection is detected") {
  ScanOptions o = small_scan(100);
  o.alpha_grid = {1.0};
  o.batch_sizes = {1};
  o.xi_override = 2.0;
  const auto r = scan_schedule(o);
  CHECK_FALSE(r.passed());
  CHECK_FALSE(r.find("key_inequality")->pass());
  // both sides at t = 100 with alpha_t = t / 4
  const auto p = compute_constants({1.0, 1, 1});
  const double at = alpha_at(100, p), an = alpha_at(101, p), ap = alpha_at(99, p);
  CHECK(2.0 * (an * an - at * at) == doctest::Approx(201.0 / 8.0));
  CHECK(ap * ap - at * at + at == doctest::Approx(201.0 / 16.0));
}

TEST_CASE("scan argument checks") {
  CHECK_THROWS_AS(scan_schedule(small_scan(17)), std::domain_error);
  ScanOptions o = small_scan(100);
  o.alpha_grid.clear();
  CHECK_THROWS_AS(scan_schedule(o), std::domain_error);
  o.alpha_grid = {1.2};
  CHECK_THROWS_AS(scan_schedule(o), std::domain_error);
}

TEST_CASE("report text is deterministic and independent of threads") {
  ScanOptions o = small_scan(1000);
  o.threads = 1;
  const auto a = scan_schedule(o).to_text();
  o.threads = 3;
  const auto b = scan_schedule(o).to_text();
  CHECK(a == b);
  std::istringstream is(a);
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    if (line.rfind("claim=", 0) == 0) {
      CHECK(line.find(" range=") != std::string::npos);
      CHECK(line.find(" min_slack=") != std::string::npos);
      CHECK(line.find(" verdict=PASS") != std::string::npos);
    } else {
      CHECK(line == "overall=PASS");
    }
  }
  CHECK(lines == static_cast<int>(scan_schedule(o).claims.size()) + 1);
}

TEST_CASE("worst claim points at the minimum margin") {
  ScanOptions o = small_scan(200);
  o.alpha_grid = {1.0};
  o.batch_sizes = {1};
  o.xi_override = 2.0;
  const auto r = scan_schedule(o);
  const auto* w = r.worst();
  REQUIRE(w != nullptr);
  for (const auto& c : r.claims) CHECK(w->min_slack + (w->strict ? 0 : w->tolerance) <= c.min_slack + (c.strict ? 0 : c.tolerance));
}

TEST_CASE("denominator growth") {
  auto r = scan_denominator_growth(1.0, 1000);
  CHECK(r.passed());
  const auto p = compute_constants({1.0, 1, 1});
  CHECK(denominator_at(cursor_at(1000, p), p) >= 62500.0);
  r = scan_denominator_growth(0.5, 100000);
  CHECK(r.passed());
  CHECK(r.find("denominator_early_ratio")->min_slack > 0.0);
  r = scan_denominator_growth(0.0, 1000);
  CHECK(r.claims[0].skipped);
  CHECK(r.passed());
  CHECK(r.to_text().find("verdict=SKIP") != std::string::npos);
}

TEST_CASE("descent check at the optimum is zero") {
  auto p = small_lasso(3);
  KatyushaConfig cfg;
  cfg.batch_size = 2;
  cfg.x0 = p.reference()->x_star;
  KatyushaH s(p, cfg);
  const auto d = exact_conditional_lyapunov_descent(s.state(), p, s.params());
  CHECK(std::abs(d.current) < 1e-20);
  CHECK(std::abs(d.expected_next) < 1e-12);
  CHECK(d.subsets == 15);
}

TEST_CASE("descent with b = n uses a single subset") {
  auto p = small_lasso(4);
  KatyushaConfig cfg;
  cfg.batch_size = 6;
  cfg.alpha = 0.5;
  KatyushaH s(p, cfg);
  for (int k = 0; k < 40; ++k) {
    const auto d = exact_conditional_lyapunov_descent(s.state(), p, s.params());
    CHECK(d.subsets == 1);
    CHECK(d.holds());
    s.step();
  }
}

TEST_CASE("descent along a run, n = 6, b = 2") {
  auto p = small_lasso(5);
  for (double a : {0.0, 0.5, 1.0}) {
    KatyushaConfig cfg;
    cfg.batch_size = 2;
    cfg.alpha = a;
    cfg.seed = 11;
    KatyushaH s(p, cfg);
    for (int k = 0; k < 60; ++k) {
      const auto d = exact_conditional_lyapunov_descent(s.state(), p, s.params());
      INFO("alpha=" << a << " t=" << s.state().cursor.t);
      CHECK(d.holds());
      s.step();
    }
  }
}

TEST_CASE("descent needs a reference and respects the cap") {
  auto p = synthesize({.n = 6, .d = 4, .seed = 1}).problem;
  KatyushaConfig cfg;
  cfg.batch_size = 2;
  KatyushaH s(p, cfg);
  CHECK_THROWS_AS(exact_conditional_lyapunov_descent(s.state(), p, s.params()), std::invalid_argument);
  auto q = small_lasso(2);
  KatyushaH s2(q, cfg);
  CHECK_THROWS_AS(exact_conditional_lyapunov_descent(s2.state(), q, s2.params(), 10.0), EnumerationCapExceeded);
}

TEST_CASE("variance certificate") {
  for (Loss loss : {Loss::LeastSquares, Loss::Logistic}) {
    const auto s = synthesize({.n = 6, .d = 3, .family = loss, .seed = 8});
    SplitMix64 r(9);
    std::vector<std::pair<Vector, Vector>> pts;
    for (int k = 0; k < 20; ++k) {
      Vector x(3), w(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = r.normal();
        w[i] = r.normal();
      }
      pts.emplace_back(x, w);
    }
    pts.emplace_back(pts[0].first, pts[0].first);
    const std::size_t bs[] = {1, 2, 3, 6};
    const auto rep = verify_lemma2(s.problem, pts, bs);
    CHECK(rep.passed());
    CHECK(rep.find("variance_bound")->checks == pts.size() * 4);
  }
}
