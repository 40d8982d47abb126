#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heavytail/optimizer.hpp"
#include "heavytail/problem.hpp"
#include "heavytail/schedule.hpp"

using namespace heavytail;

namespace {

NoiseModel make_noise(NoiseKind kind, double shape = 3.0, double scale = 1.0,
                      double alpha = 2.0) {
  NoiseModel n;
  n.kind = kind;
  n.tail_shape = shape;
  n.scale = scale;
  n.moment = MomentBound{alpha, 0.0};
  return n;
}

Problem noisy_problem(std::uint64_t seed = 3, int d = 3, int n = 16) {
  return Problem::robust_regression(d, n, seed,
                                    make_noise(NoiseKind::pareto_additive, 3.0, 1.0), 0.1);
}

}  // namespace

TEST_CASE("clipped sgd hand example on the 1-d quadratic") {
  Problem p = Problem::quadratic(1, 1.0, make_noise(NoiseKind::none));
  SgdState s{Vec{1.0}, 1};
  RngStream rng(1, 1);
  auto res = sgd_clipped_step(s, p, 0.1, 0.5, rng);
  // g = grad F = 1, clipped to 0.5: w' = 1 - 0.1 * 0.5
  CHECK(res.state.w[0] == doctest::Approx(0.95));
  CHECK(res.state.t == 2);
  CHECK(res.clip_active);
}

TEST_CASE("stationary point is a fixed point") {
  Problem p = Problem::quadratic(2, 1.0, make_noise(NoiseKind::none));
  SgdState s{Vec{0.0, 0.0}, 1};
  RngStream rng(1, 1);
  auto res = sgd_clipped_step(s, p, 0.1, 1.0, rng);
  CHECK(res.state.w == Vec{0.0, 0.0});
}

TEST_CASE("inactive clip reproduces plain sgd exactly") {
  Problem p = noisy_problem();
  SgdState a{Vec(3, 0.0), 1};
  SgdState b{Vec(3, 0.0), 1};
  RngStream r1(9, 5), r2(9, 5);
  for (int t = 0; t < 50; ++t) {
    a = sgd_clipped_step(a, p, 0.05, 1e9, r1).state;
    b = sgd_step(b, p, 0.05, r2).state;
    REQUIRE(a.w == b.w);
  }
}

TEST_CASE("sgdm hand example") {
  // gamma=0.5, m=[1,0], incoming gradient [0,1] below tau1, tau2 large
  Problem p = Problem::quadratic(2, 1.0, make_noise(NoiseKind::none));
  SgdmState s{Vec{0.0, -1.0}, Vec{1.0, 0.0}, 1};  // grad F = lambda w = [0,-1] -> g=[0,-1]
  RngStream rng(1, 1);
  auto res = sgdm_clipped_step(s, p, 0.1, 10.0, 10.0, 0.5, rng);
  // m' = 0.5 [1,0] + 0.5 [0,-1] = [0.5,-0.5]
  CHECK(res.state.m[0] == doctest::Approx(0.5));
  CHECK(res.state.m[1] == doctest::Approx(-0.5));
  CHECK(res.state.w[0] == doctest::Approx(0.0 - 0.1 * 0.5));
  CHECK(res.state.w[1] == doctest::Approx(-1.0 + 0.1 * 0.5));
}

TEST_CASE("first sgdm step from m0 = 0 scales the clipped gradient by 1-gamma") {
  Problem p = noisy_problem();
  RngStream r1(5, 2), r2(5, 2);
  SgdmState s{Vec(3, 0.0), Vec(3, 0.0), 1};
  auto res = sgdm_clipped_step(s, p, 0.1, 0.7, 10.0, 0.9, r1);
  Vec g = p.stochastic_grad(Vec(3, 0.0), r2);
  Vec gbar = clip(g, 0.7);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(res.state.m[i] == doctest::Approx(0.1 * gbar[i]).epsilon(1e-15));
}

TEST_CASE("reduction: sgdm with gamma=0 and tau2 >= tau1 equals clipped sgd bitwise") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Problem p = noisy_problem(seed + 100);
    RngStream r1(seed, 1), r2(seed, 1);
    SgdState a{Vec(3, 0.0), 1};
    SgdmState b{Vec(3, 0.0), Vec(3, 0.0), 1};
    for (int t = 0; t < 40; ++t) {
      a = sgd_clipped_step(a, p, 0.03, 0.8, r1).state;
      b = sgdm_clipped_step(b, p, 0.03, 0.8, 1.6, 0.0, r2).state;
      REQUIRE(a.w == b.w);
    }
  }
}

TEST_CASE("adagrad stepsize formula and monotonicity") {
  // G0=1, first clipped gradient norm^2 = 1 -> eta_1 = 1/sqrt(2)
  Problem p = Problem::quadratic(1, 1.0, make_noise(NoiseKind::none));
  AdagradState s{Vec{1.0}, 1.0, 1};  // grad = 1
  RngStream rng(1, 1);
  auto r1 = adagrad_clipped_step(s, p, 10.0, rng);
  CHECK(r1.stepsize == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(r1.state.accum == doctest::Approx(2.0));
  // feed a gradient with norm^2 = 3 next: eta = 1/sqrt(5) < 1/sqrt(2)
  AdagradState s2{Vec{std::sqrt(3.0)}, 2.0, 2};
  auto r2 = adagrad_clipped_step(s2, p, 10.0, rng);
  CHECK(r2.stepsize == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(r2.stepsize < r1.stepsize);
}

TEST_CASE("adagrad at a stationary point never moves and eta sticks at 1/G0") {
  Problem p = Problem::quadratic(2, 1.0, make_noise(NoiseKind::none));
  AdagradState s{Vec{0.0, 0.0}, 4.0, 1};  // G0 = 2
  RngStream rng(1, 1);
  for (int t = 0; t < 10; ++t) {
    auto res = adagrad_clipped_step(s, p, 1.0, rng);
    CHECK(res.state.w == Vec{0.0, 0.0});
    CHECK(res.stepsize == doctest::Approx(0.5));
    s = res.state;
  }
}

TEST_CASE("adagrad stepsizes are non-increasing along a noisy run") {
  Problem p = noisy_problem(7);
  AdagradState s{Vec(3, 0.0), 1.0, 1};
  RngStream rng(7, 7);
  double prev = 1e9;
  for (int t = 0; t < 200; ++t) {
    auto res = adagrad_clipped_step(s, p, 2.0, rng);
    CHECK(res.stepsize <= prev);
    CHECK(res.state.accum >= s.accum);
    prev = res.stepsize;
    s = res.state;
  }
}

TEST_CASE("accel rsag interpolation weights") {
  Problem p = Problem::quadratic(2, 1.0, make_noise(NoiseKind::none));
  // t=1: alpha_1 = 1, w_bar = w exactly
  AccelState s{Vec{0.4, -0.2}, Vec{9.9, 9.9}, 1.0, 1};
  RngStream rng(1, 1);
  auto res = accel_clipped_step(s, p, 10.0, AccelMode::rsag, rng);
  CHECK(res.eval_point == Vec{0.4, -0.2});
  // t=2: alpha_2 = 2/3, w_bar = (2 w + w_tilde)/3
  AccelState s2{Vec{1.0, 0.0}, Vec{0.0, 3.0}, 1.0, 2};
  auto res2 = accel_clipped_step(s2, p, 10.0, AccelMode::rsag, rng);
  CHECK(res2.eval_point[0] == doctest::Approx(2.0 / 3.0));
  CHECK(res2.eval_point[1] == doctest::Approx(1.0));
}

TEST_CASE("reduction: accel adagrad-mode equals clipped adagrad bitwise") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Problem p = noisy_problem(seed + 300);
    RngStream r1(seed, 2), r2(seed, 2);
    AdagradState a{Vec(3, 0.0), 1.0, 1};
    AccelState b{Vec(3, 0.0), Vec(3, 0.0), 1.0, 1};
    for (int t = 0; t < 40; ++t) {
      a = adagrad_clipped_step(a, p, 2.5, r1).state;
      auto rb = accel_clipped_step(b, p, 2.5, AccelMode::adagrad, r2);
      b = rb.state;
      REQUIRE(a.w == b.w);
      REQUIRE(b.w == b.w_tilde);
      REQUIRE(a.accum == b.accum);
    }
  }
}

TEST_CASE("momentum-norm bound: the applied vector never exceeds tau2") {
  Problem p = noisy_problem(17);
  SgdmState s{Vec(3, 0.0), Vec(3, 0.0), 1};
  RngStream rng(17, 3);
  const double eta = 0.05, tau1 = 2.0, tau2 = 0.4, gamma = 0.9;
  for (int t = 0; t < 300; ++t) {
    auto res = sgdm_clipped_step(s, p, eta, tau1, tau2, gamma, rng);
    // recover the applied vector from the state delta
    Vec applied = scale(1.0 / eta, sub(s.w, res.state.w));
    CHECK(norm(applied) <= tau2 * (1 + 1e-12));
    s = res.state;
  }
}

TEST_CASE("run: deterministic, metric structure, and descent on the quadratic") {
  Problem p = Problem::quadratic(2, 4.0, make_noise(NoiseKind::none));
  Schedule sch = schedule_sgd_plain(64, 2.0, 0.1);
  RunOptions ro;
  ro.record_every = 16;
  TrialRecord a = run(p, sch, 64, 5, 9, ro);
  TrialRecord b = run(p, sch, 64, 5, 9, ro);
  CHECK(a.avg_sq == b.avg_sq);
  CHECK(a.avg_norm == b.avg_norm);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].grad_norm_sq == b.samples[i].grad_norm_sq);
    CHECK(a.samples[i].loss == b.samples[i].loss);
  }
  // deterministic descent: recorded gradient norms decrease
  for (std::size_t i = 1; i < a.samples.size(); ++i)
    CHECK(a.samples[i].grad_norm_sq <= a.samples[i - 1].grad_norm_sq);
  // Jensen: avg_norm^2 <= avg_sq
  CHECK(a.avg_norm * a.avg_norm <= a.avg_sq * (1 + 1e-12));

  // the quadratic starts at its own minimizer, so repeat the monotone-descent
  // check on a problem that starts away from stationarity
  NoiseModel none = make_noise(NoiseKind::none);
  Problem rr = Problem::robust_regression(3, 24, 31, none, 0.05);
  Schedule plain = schedule_sgd_plain(128, 2.0, 0.2);
  RunOptions ro2;
  ro2.record_every = 1;
  TrialRecord rec = run(rr, plain, 128, 1, 1, ro2);
  CHECK(rec.samples.front().grad_norm_sq > 0.0);
  for (std::size_t i = 1; i < rec.samples.size(); ++i)
    CHECK(rec.samples[i].grad_norm_sq <= rec.samples[i - 1].grad_norm_sq * (1 + 1e-9));
}

TEST_CASE("run with T=1 records the initial point plus one step") {
  Problem p = Problem::quadratic(1, 1.0, make_noise(NoiseKind::none));
  Schedule sch = schedule_sgd_plain(1, 2.0, 0.1);
  TrialRecord rec = run(p, sch, 1, 1, 1, RunOptions{});
  REQUIRE(rec.samples.size() == 1);
  CHECK(rec.samples[0].t == 1);
  CHECK(rec.samples[0].grad_norm_sq == doctest::Approx(0.0));  // w1 = 0 is the minimum
  CHECK(rec.avg_sq == doctest::Approx(0.0));
}

TEST_CASE("clip inactivity: each clipped algorithm equals its baseline on a run") {
  Problem p = noisy_problem(23);
  const long long T = 60;
  // sgd
  Schedule clipped = schedule_sgd(T, 2.0, 0.02, 1.0, p.smoothness_L());
  clipped.tau = 1e12;  // push the threshold above any drawn norm
  Schedule plain = schedule_sgd_plain(T, 2.0, clipped.eta);
  TrialRecord rc = run(p, clipped, T, 3, 4, RunOptions{});
  TrialRecord rp = run(p, plain, T, 3, 4, RunOptions{});
  CHECK(rc.avg_sq == rp.avg_sq);
  // adagrad
  Schedule ac = schedule_adaptive(T, 2.0, 1.0, 1.0, Algorithm::adagrad_clipped);
  ac.tau = 1e12;
  Schedule ap = schedule_adagrad_plain(T, 2.0, 1.0);
  TrialRecord ra = run(p, ac, T, 3, 4, RunOptions{});
  TrialRecord rb = run(p, ap, T, 3, 4, RunOptions{});
  CHECK(ra.avg_sq == rb.avg_sq);
}

TEST_CASE("divergence is flagged and the averages go to +inf") {
  // unclipped sgd on a quadratic with eta far above 2/L blows up
  Problem p = Problem::quadratic(1, 1.0, make_noise(NoiseKind::gaussian_additive, 3.0, 1.0));
  Schedule sch = schedule_sgd_plain(2000, 2.0, 3.0);
  TrialRecord rec = run(p, sch, 2000, 1, 1, RunOptions{});
  CHECK(rec.diverged);
  CHECK(std::isinf(rec.avg_sq));
  CHECK(std::isinf(rec.avg_norm));
}

TEST_CASE("record stride keeps t=1, multiples, and t=T") {
  Problem p = noisy_problem(37);
  Schedule sch = schedule_sgd(100, 2.0, 0.02, 1.0, p.smoothness_L());
  RunOptions ro;
  ro.record_every = 30;
  TrialRecord rec = run(p, sch, 100, 9, 9, ro);
  std::vector<long long> ts;
  for (const auto& s : rec.samples) ts.push_back(s.t);
  CHECK(ts == std::vector<long long>{1, 30, 60, 90, 100});
}

TEST_CASE("moment audit along the recorded interpolation points of accel runs") {
  Problem p = noisy_problem(61, 4, 24);
  Schedule sch = schedule_adaptive(200, 2.0, 1.0, 1.0, Algorithm::accel_rsag);
  RunOptions ro;
  ro.record_every = 20;
  ro.keep_points = true;
  TrialRecord rec = run(p, sch, 200, 6, 6, ro);
  REQUIRE(!rec.recorded_points.empty());
  RngStream rg(61, 77);
  double g = estimate_g(p, 2.0, 10, 5000, rg);
  double audited = audit_alpha_moment(p, 2.0, rec.recorded_points, 5000, rg);
  CHECK(audited <= std::pow(g, 2.0) * 1.2);
}

TEST_CASE("initialization: w1 = 0 metric recorded at the first step") {
  Problem p = noisy_problem(29);
  Schedule sch = schedule_sgd(32, 2.0, 0.02, 1.0, p.smoothness_L());
  TrialRecord rec = run(p, sch, 32, 2, 2, RunOptions{});
  double at_zero = norm_sq(p.empirical_grad(Vec(3, 0.0)));
  CHECK(rec.samples.front().t == 1);
  CHECK(rec.samples.front().grad_norm_sq == doctest::Approx(at_zero));
}
