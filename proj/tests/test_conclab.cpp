#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heavytail/conclab.hpp"
#include "oracles.hpp"

using namespace heavytail;

namespace {

NoiseModel radial_pareto(double shape, double alpha) {
  NoiseModel n;
  n.kind = NoiseKind::pareto_additive;
  n.tail_shape = shape;
  n.scale = 1.0;
  n.moment = MomentBound{alpha, 0.0};
  return n;
}

}  // namespace

TEST_CASE("clip bias: symmetric noise around zero has near-zero bias") {
  Vec mean(3, 0.0);
  auto rep = check_clip_bias(radial_pareto(3.0, 2.0), mean, {1.0, 4.0}, 2.0, 2.0, 20000,
                             RngStream(1, 1));
  CHECK(rep.pass);
  for (const auto& pt : rep.points) CHECK(pt.estimate <= 3.0 * pt.se);
}

TEST_CASE("clip bias: threshold above the support leaves no bias") {
  // Gaussian with tiny scale: tau far above the essential support
  NoiseModel noise;
  noise.kind = NoiseKind::gaussian_additive;
  noise.scale = 0.01;
  noise.moment = MomentBound{2.0, 0.0};
  Vec mean{0.5, 0.0};
  auto rep = check_clip_bias(noise, mean, {50.0}, 2.0, 1.0, 20000, RngStream(2, 1));
  CHECK(rep.points[0].estimate <= 3.0 * rep.points[0].se + 1e-12);
  CHECK(rep.pass);
}

TEST_CASE("clip bias: mean-shifted pareto stays under the bound on a tau grid") {
  // G^2 = ||mu||^2 + E r^2 = 1 + 3 = 4 exactly for shape 3, scale 1
  Vec mean{1.0, 0.0, 0.0};
  auto rep = check_clip_bias(radial_pareto(3.0, 2.0), mean, {1.0, 2.0, 4.0, 8.0}, 2.0,
                             2.0, 200000, RngStream(3, 1));
  CHECK(rep.pass);
  for (const auto& pt : rep.points) {
    CHECK(pt.bound == doctest::Approx(4.0 / pt.tau));
    CHECK(pt.ratio < 1.0);
  }
}

TEST_CASE("clip second moment: point mass has zero centered moment") {
  NoiseModel noise;
  noise.kind = NoiseKind::gaussian_additive;
  noise.scale = 1e-12;  // effectively a point mass at the mean
  noise.moment = MomentBound{2.0, 0.0};
  Vec mean{0.3, 0.4};
  auto rep = check_clip_second_moment(noise, mean, {1.0}, 2.0, 0.5, 20000,
                                      RngStream(4, 1));
  CHECK(rep.points[0].estimate == doctest::Approx(0.0));
  CHECK(rep.pass);
}

TEST_CASE("clip second moment: alpha=2 bound is G^2 independent of tau") {
  Vec mean{1.0, 0.0, 0.0};
  auto rep = check_clip_second_moment(radial_pareto(3.0, 2.0), mean, {0.5, 2.0, 8.0},
                                      2.0, 2.0, 100000, RngStream(5, 1));
  CHECK(rep.pass);
  for (const auto& pt : rep.points) CHECK(pt.bound == doctest::Approx(4.0));
}

TEST_CASE("clip second moment: alpha=1.5 grid against G^1.5 tau^0.5") {
  // G frozen from quadrature of E||e1 + r u||^1.5 (= 6.4857) rounded up
  const double g = 3.4790;
  Vec mean{1.0, 0.0, 0.0};
  auto rep = check_clip_second_moment(radial_pareto(1.8, 1.5), mean, {1.0, 2.0, 4.0},
                                      1.5, g, 100000, RngStream(6, 1));
  CHECK(rep.pass);
  for (const auto& pt : rep.points)
    CHECK(pt.bound == doctest::Approx(std::pow(g, 1.5) * std::sqrt(pt.tau)));
}

TEST_CASE("bernstein scalar coverage: bernoulli increments at several deltas") {
  ScalarMdsSpec spec;
  spec.kind = MdsKind::bernoulli;
  spec.b = 1.0;
  for (double delta : {0.1, 0.05}) {
    auto rep = check_bernstein_scalar(spec, -1.0, delta, 1000, 4000, 11, 4);
    CHECK(rep.pass);
    CHECK(rep.violation_rate <= delta + 3.0 * rep.se);
  }
}

TEST_CASE("bernstein scalar coverage: deterministic increments give full coverage") {
  // clipped pareto with clip at the scale: xi = scale a.s., variance 0
  ScalarMdsSpec spec;
  spec.kind = MdsKind::clipped_pareto;
  spec.shape = 2.0;
  spec.scale = 1.0;
  spec.clip_c = 1.0;
  CHECK(spec.variance() == doctest::Approx(0.0));
  auto rep = check_bernstein_scalar(spec, 1.0, 0.05, 100, 500, 13, 2);
  CHECK(rep.n_violations == 0);
}

TEST_CASE("bernstein bound rhs formula: rho=1, b=1, sigma^2=0, delta=e^-1 gives 1") {
  // with deterministic increments the threshold reduces to b log(1/delta)/rho
  ScalarMdsSpec spec;
  spec.kind = MdsKind::bernoulli;
  spec.b = 1.0;
  double rho = 1.0, delta = std::exp(-1.0);
  double rhs = rho * 0.0 / spec.b + spec.b * std::log(1.0 / delta) / rho;
  CHECK(rhs == doctest::Approx(1.0));
}

TEST_CASE("clipped pareto closed-form moments match simulation") {
  ScalarMdsSpec spec;
  spec.kind = MdsKind::clipped_pareto;
  spec.shape = 1.8;
  spec.scale = 1.0;
  spec.clip_c = 4.0;
  CHECK(spec.mean() == doctest::Approx(oracles::clipped_pareto_mean(1.8, 1.0, 4.0)));
  RngStream rng(17, 1);
  double s = 0, s2 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    double x = spec.draw(rng);
    CHECK(x <= 4.0);
    CHECK(x >= 1.0);
    s += x;
    s2 += x * x;
  }
  CHECK(oracles::relative_error(s / n, spec.mean()) < 0.01);
  double want_second = oracles::clipped_pareto_second_moment(1.8, 1.0, 4.0);
  CHECK(oracles::relative_error(s2 / n, want_second) < 0.01);
  CHECK(spec.variance() == doctest::Approx(want_second - spec.mean() * spec.mean()));
  // increments are bounded by construction
  CHECK(spec.increment_bound() >= 4.0 - spec.mean());
}

TEST_CASE("martingale specs with inconsistent bounds are rejected") {
  ScalarMdsSpec spec;
  spec.kind = MdsKind::clipped_pareto;
  spec.clip_c = 0.5;  // below the scale: support would exceed the claimed bound
  CHECK_THROWS_AS(check_bernstein_scalar(spec, 1.0, 0.1, 10, 10, 1), std::invalid_argument);
  ScalarMdsSpec bad;
  bad.b = -1.0;
  CHECK_THROWS_AS(check_bernstein_scalar(bad, 1.0, 0.1, 10, 10, 1), std::invalid_argument);
}

TEST_CASE("pinelis vector coverage: rademacher and clipped radial pareto") {
  VectorMdsSpec rad;
  rad.kind = VecMdsKind::rademacher;
  rad.dim = 2;
  CHECK(rad.norm_bound() == doctest::Approx(std::sqrt(2.0)));
  auto rep = check_pinelis_vector(rad, 0.05, 500, 4000, 19, 4);
  CHECK(rep.pass);

  VectorMdsSpec par;
  par.kind = VecMdsKind::clipped_pareto_radial;
  par.dim = 3;
  par.shape = 1.8;
  par.scale = 1.0;
  par.clip_c = 4.0;
  auto rep2 = check_pinelis_vector(par, 0.05, 300, 2000, 23, 4);
  CHECK(rep2.pass);
}

TEST_CASE("pinelis vector coverage: single step reduces to one partial sum") {
  VectorMdsSpec rad;
  rad.kind = VecMdsKind::rademacher;
  rad.dim = 2;
  // t=1: ||xi_1|| = sqrt(2) <= 2 (sqrt(2)/3 + sqrt(2)) log(2/delta) always
  auto rep = check_pinelis_vector(rad, 0.1, 1, 200, 29, 1);
  CHECK(rep.n_violations == 0);
}

TEST_CASE("pinelis vector coverage: all-zero increments trivially covered") {
  VectorMdsSpec par;
  par.kind = VecMdsKind::clipped_pareto_radial;
  par.dim = 2;
  par.shape = 2.5;
  par.scale = 1e-9;
  par.clip_c = 1e-9;  // radius pinned to 1e-9: essentially zero increments
  auto rep = check_pinelis_vector(par, 0.1, 50, 100, 31, 1);
  CHECK(rep.n_violations == 0);
}

TEST_CASE("uniform-convergence bound value and structure") {
  UniformConvBound base{1.0, 1.0, 1.0, 100, 2, 0.05};
  // frozen from an independent high-precision evaluation
  CHECK(eval_uniform_conv_bound(base) == doctest::Approx(12.905448865349689).epsilon(1e-12));
  // 1/sqrt(n) scaling: value(n=400) = value(n=100)/2 exactly
  UniformConvBound n400 = base;
  n400.n = 400;
  CHECK(eval_uniform_conv_bound(n400) == doctest::Approx(eval_uniform_conv_bound(base) / 2.0));
  // affine in R: differences at equal spacing match
  UniformConvBound r2 = base, r3 = base;
  r2.R = 2.0;
  r3.R = 3.0;
  double d1 = eval_uniform_conv_bound(r2) - eval_uniform_conv_bound(base);
  double d2 = eval_uniform_conv_bound(r3) - eval_uniform_conv_bound(r2);
  CHECK(d1 == doctest::Approx(d2));
}

TEST_CASE("uniform-convergence sampled ball check passes on a robust regression instance") {
  NoiseModel noise;
  noise.kind = NoiseKind::sampling;
  noise.tail_shape = 3.0;
  noise.moment = MomentBound{2.0, 0.0};
  Problem p = Problem::robust_regression(3, 100, 37, noise, 0.1);
  auto chk = check_uniform_convergence(p, 1.0, 0.05, 50, 20000, RngStream(37, 5));
  CHECK(chk.pass);
  CHECK(chk.max_observed < chk.bound);
}

TEST_CASE("adagrad summation worked example a = [1,1,1,1]") {
  auto res = check_adagrad_sums({1.0, 1.0, 1.0, 1.0});
  CHECK(res.pass);
  // direct evaluation: 1 + 1/sqrt(2) + 1/sqrt(3) + 1/2
  CHECK(res.middle == doctest::Approx(2.7844570503761734));
  CHECK(res.lower == doctest::Approx(2.0));
  CHECK(res.upper == doctest::Approx(4.0));
  CHECK(res.harmonic == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0 + 0.25));
  CHECK(res.harmonic_guarded ==
        doctest::Approx(0.5 + 1.0 / 3.0 + 0.25 + 0.2));
  CHECK(res.harmonic_bound == doctest::Approx(1.0 + std::log(5.0)));
  CHECK(res.harmonic <= res.harmonic_bound);  // literal chain holds here too
}

TEST_CASE("harmonic chain with bare prefixes is false; guarded form holds") {
  // a = [0.1, 0.1]: literal sum a_i/prefix_i = 1.5 exceeds 1 + log(1.2)
  auto res = check_adagrad_sums({0.1, 0.1});
  CHECK(res.harmonic == doctest::Approx(1.5));
  CHECK(res.harmonic_bound == doctest::Approx(1.0 + std::log(1.2)));
  CHECK(res.harmonic > res.harmonic_bound);
  CHECK(res.harmonic_slack < 0.0);  // the literal violation stays visible
  CHECK(res.harmonic_guarded == doctest::Approx(0.1 / 1.1 + 0.1 / 1.2));
  CHECK(res.harmonic_guarded_slack > 0.0);
  CHECK(res.pass);  // sqrt chain and guarded harmonic chain both hold
}

TEST_CASE("summation check single element is tight at the lower bound") {
  for (double c : {1e-6, 0.5, 1.0, 3.0, 1e6}) {
    auto res = check_adagrad_sums({c});
    CHECK(res.pass);
    CHECK(res.middle == doctest::Approx(std::sqrt(c)));
  }
}

TEST_CASE("summation check zero-prefix handling and input validation") {
  auto res = check_adagrad_sums({0.0, 0.0, 4.0});
  CHECK(res.pass);
  CHECK(res.middle == doctest::Approx(2.0));
  CHECK_THROWS_AS(check_adagrad_sums({1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(check_adagrad_sums({}), std::invalid_argument);
}

TEST_CASE("summation inequalities hold on random sequences across scales") {
  RngStream rng(41, 0);
  for (int it = 0; it < 1000; ++it) {
    auto len = static_cast<std::size_t>(1 + rng.next_below(100));
    std::vector<double> seq(len);
    for (auto& a : seq) {
      a = rng.next_unit() < 0.05 ? 0.0 : std::pow(10.0, -6.0 + 12.0 * rng.next_unit());
    }
    bool all_zero = true;
    for (double a : seq) all_zero = all_zero && a == 0.0;
    if (all_zero) seq[0] = 1.0;
    auto res = check_adagrad_sums(seq);
    REQUIRE(res.pass);
  }
}
