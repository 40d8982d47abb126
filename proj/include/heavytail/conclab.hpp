#ifndef HEAVYTAIL_CONCLAB_HPP
#define HEAVYTAIL_CONCLAB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "heavytail/problem.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/vec.hpp"

namespace heavytail {

// One tau grid node of a clipping-bound check. `ratio` = estimate/bound so a
// report reveals slack, not just pass/fail.
struct GridPointReport {
  double tau = 0.0;
  double estimate = 0.0;
  double bound = 0.0;
  double se = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct ClipCheckReport {
  std::string name;
  double alpha = 0.0;
  double g = 0.0;
  long long n_mc = 0;
  std::vector<GridPointReport> points;
  bool pass = false;
};

// || E[clip(mean + xi, tau)] - mean || <= G^alpha tau^(1-alpha) + 3 SE per tau.
// The noise must be an additive (zero-mean) kind so E[g] = mean exactly.
ClipCheckReport check_clip_bias(const NoiseModel& noise, const Vec& mean,
                                const std::vector<double>& tau_grid, double alpha,
                                double g, long long n_mc, RngStream rng);

// E||clip(g,tau) - E clip(g,tau)||^2 <= G^alpha tau^(2-alpha) + 3 SE per tau.
ClipCheckReport check_clip_second_moment(const NoiseModel& noise, const Vec& mean,
                                         const std::vector<double>& tau_grid,
                                         double alpha, double g, long long n_mc,
                                         RngStream rng);

struct CoverageReport {
  std::string bound_desc;
  long long n_trials = 0;
  long long n_violations = 0;
  double delta = 0.0;
  double violation_rate = 0.0;
  double se = 0.0;  // binomial sqrt(delta (1-delta) / n_trials)
  bool pass = false;
};

enum class MdsKind { bernoulli, clipped_pareto };

// Scalar bounded-increment spec for the Bernstein-type inequality. Bernoulli
// means xi = +/- b with equal probability; clipped Pareto means
// xi = min(pareto(shape, scale), clip_c) (bounded by construction; the mean
// and variance have closed forms).
struct ScalarMdsSpec {
  MdsKind kind = MdsKind::bernoulli;
  double b = 1.0;         // bernoulli magnitude
  double shape = 3.0;     // pareto shape
  double scale = 1.0;     // pareto scale
  double clip_c = 4.0;    // clip level, >= scale

  double mean() const;
  double variance() const;
  double increment_bound() const;  // sup |xi - E xi|
  double draw(RngStream& rng) const;
  void validate() const;
};

// Coverage of: sum xi_k - sum E[xi_k] <= rho sigma_n^2 / b + b log(1/delta)/rho,
// with probability >= 1 - delta over n-step sequences. rho <= 0 selects the
// variance-optimal rho = min(1, b sqrt(log(1/delta)) / sigma_n).
CoverageReport check_bernstein_scalar(const ScalarMdsSpec& spec, double rho,
                                      double delta, long long n, long long n_trials,
                                      std::uint64_t seed, int threads = 1);

enum class VecMdsKind { rademacher, clipped_pareto_radial };

// Vector martingale-difference spec: Rademacher coordinates (||xi|| = sqrt(d))
// or a clipped radial Pareto (min(r, clip_c) times a uniform direction).
struct VectorMdsSpec {
  VecMdsKind kind = VecMdsKind::rademacher;
  int dim = 2;
  double shape = 3.0;
  double scale = 1.0;
  double clip_c = 4.0;

  double norm_bound() const;          // D with ||xi|| <= D a.s.
  double second_moment() const;       // E ||xi||^2
  void draw(Vec& out, RngStream& rng) const;
  void validate() const;
};

// Coverage of: max_{j<=t} || sum_{k<=j} xi_k || <= 2 (D/3 + sigma_t) log(2/delta).
CoverageReport check_pinelis_vector(const VectorMdsSpec& spec, double delta,
                                    long long t, long long n_trials,
                                    std::uint64_t seed, int threads = 1);

struct UniformConvBound {
  double L = 1.0;
  double R = 1.0;
  double b = 1.0;
  long long n = 1;
  long long d = 1;
  double delta = 0.05;
};

// ((L R + b)/sqrt(n)) (2 + 2 sqrt(48 e sqrt(2) (log 2 + d log(3e))) + sqrt(2 log(1/delta)))
double eval_uniform_conv_bound(const UniformConvBound& params);

struct UniformConvCheck {
  double bound = 0.0;
  double max_observed = 0.0;
  long long n_probes = 0;
  bool pass = false;
};

// Sampled (not sup) check: at n_probes random w in the radius-R ball,
// || grad F(w) - grad F_S(w) || <= bound, with grad F estimated on n_fresh
// fresh samples.
UniformConvCheck check_uniform_convergence(const Problem& problem, double R,
                                           double delta, int n_probes,
                                           long long n_fresh, RngStream rng);

struct SumCheckResult {
  bool pass = false;
  double total = 0.0;           // sum a_i
  double middle = 0.0;          // sum a_i / sqrt(prefix)
  double lower = 0.0;           // sqrt(sum)
  double upper = 0.0;           // 2 sqrt(sum)
  double harmonic = 0.0;        // literal: sum a_i / prefix
  double harmonic_guarded = 0.0;  // sum a_i / (1 + prefix)
  double harmonic_bound = 0.0;    // 1 + log(1 + sum)
  double lower_slack = 0.0;       // middle - lower
  double upper_slack = 0.0;       // upper - middle
  double harmonic_slack = 0.0;    // bound - literal (negative slack possible)
  double harmonic_guarded_slack = 0.0;  // bound - guarded (asserted)
};

// Summation inequalities on a nonnegative sequence; zero-prefix terms are
// skipped (0/0 treated as 0, the limit of the expression).
//
// The harmonic chain with bare prefixes is false in general (a = [0.1, 0.1]
// already violates it); the adaptive-stepsize proofs only use it with the
// accumulator seed inside the denominator. `pass` therefore gates on the
// sqrt chain plus the guarded form sum a_i/(1 + prefix) <= 1 + log(1 + sum);
// the literal harmonic value and its (possibly negative) slack are reported
// alongside.
SumCheckResult check_adagrad_sums(const std::vector<double>& seq);

}  // namespace heavytail

#endif
