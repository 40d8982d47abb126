#ifndef HEAVYTAIL_PROBLEM_HPP
#define HEAVYTAIL_PROBLEM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/rng.hpp"
#include "heavytail/vec.hpp"

namespace heavytail {

enum class NoiseKind { none, sampling, pareto_additive, gaussian_additive };

std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

struct MomentBound {
  double alpha = 2.0;    // in (1, 2]
  double g_value = 0.0;  // the constant G; 0 means not yet determined
};

// Heavy-tailed gradient-noise specification. For the additive kinds the
// stochastic gradient is the full empirical gradient plus an isotropic
// perturbation: radial Pareto(tail_shape, scale) for pareto_additive
// (finite alpha-th moment when tail_shape > alpha, infinite variance when
// tail_shape <= 2), or a standard normal scaled by `scale`.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double tail_shape = 3.0;
  double scale = 1.0;
  MomentBound moment;

  void validate() const;
};

// The additive perturbation alone (zero-mean by construction).
Vec noise_draw(const NoiseModel& noise, int dim, RngStream& rng);

struct Sample {
  Vec x;       // feature, ||x|| <= 1 by construction
  double y;    // target
};

enum class ProblemFamily { robust_regression, quadratic };

std::string to_string(ProblemFamily f);
ProblemFamily family_from_string(const std::string& s);

// A synthetic smooth objective with exact gradients: an empirical risk over a
// finite training set, a population sampler for fresh data, and a stochastic
// gradient oracle driven by the attached NoiseModel.
class Problem {
 public:
  // Per-sample loss u^2/(1+u^2) with u = <w,x> - y; gradient phi'(u) x with
  // phi'(u) = 2u/(1+u^2)^2. Features uniform on the unit sphere, targets
  // <w*, x> plus label noise whose law follows the noise model (symmetrized
  // Pareto with the same tail index for the Pareto kinds, so population-side
  // gradients are heavy-tailed too). Loss lies in [0,1), sup|phi''| = 2, so
  // bound_M = 1 and smoothness_L = 2.
  //
  // `seed` fixes the population (the target weights); `data_seed` fixes the
  // training-set draw, so the same population can be paired with fresh data.
  static Problem robust_regression(int d, int n, std::uint64_t seed, NoiseModel noise,
                                   double label_noise_scale = 0.1,
                                   std::uint64_t data_seed = 0);

  // Diagonal quadratic (1/2) sum lambda_i w_i^2 with lambda_i in [1, condition];
  // convex sanity baseline with known minimizer w = 0 and L = condition.
  static Problem quadratic(int d, double condition, NoiseModel noise);

  ProblemFamily family() const { return family_; }
  int dim() const { return dim_; }
  long long data_size() const { return static_cast<long long>(dataset_.size()); }
  double smoothness_L() const { return smoothness_L_; }
  std::optional<double> bound_M() const { return bound_M_; }
  const NoiseModel& noise() const { return noise_; }
  const std::vector<Sample>& dataset() const { return dataset_; }
  const Vec& w_star() const { return w_star_; }
  double label_noise_scale() const { return label_noise_scale_; }

  double sample_loss(const Vec& w, const Sample& z) const;
  Vec sample_grad(const Vec& w, const Sample& z) const;

  double empirical_loss(const Vec& w) const;   // F_S
  Vec empirical_grad(const Vec& w) const;      // grad F_S

  // Fresh z ~ P.
  Sample draw_sample(RngStream& rng) const;

  // One stochastic gradient per the noise model: uniform per-sample gradient
  // for `sampling`, empirical gradient plus perturbation for the additive
  // kinds, exact empirical gradient for `none`.
  Vec stochastic_grad(const Vec& w, RngStream& rng) const;

  struct PopGradEstimate {
    Vec mean;
    double se;  // aggregate standard error sqrt(sum_j var_j / n)
  };
  PopGradEstimate population_grad_estimate(const Vec& w, long long n_fresh,
                                           RngStream& rng) const;

  // sup over the dataset of ||grad f(0; z)||; finite and computable.
  double b_constant() const;

  // Global bound on ||grad f(0; z)|| over the population support (for the
  // uniform-convergence formula): 3*sqrt(3)/8 for robust regression, 0 for
  // the quadratic.
  double b_population() const;

 private:
  Problem() = default;

  double label_noise(RngStream& rng) const;

  ProblemFamily family_ = ProblemFamily::robust_regression;
  int dim_ = 0;
  double smoothness_L_ = 0.0;
  std::optional<double> bound_M_;
  std::vector<Sample> dataset_;
  Vec w_star_;       // robust regression target weights
  Vec lambda_;       // quadratic eigenvalues
  NoiseModel noise_;
  double label_noise_scale_ = 0.0;
};

// Flat fresh-sample set for repeated population-gradient evaluations.
struct SampleSet {
  int dim = 0;
  long long size = 0;
  std::vector<double> xs;  // row-major size x dim
  std::vector<double> ys;
};

SampleSet draw_population_set(const Problem& problem, long long count, RngStream& rng);
Vec grad_on_set(const Problem& problem, const SampleSet& set, const Vec& w);

// Empirical G per the moment-audit procedure: max over probe points (origin
// plus random points in a radius-2 ball) of the alpha-th-moment estimate of
// stochastic gradients, raised to 1/alpha, times a 1.1 safety factor.
double estimate_g(const Problem& problem, double alpha, int n_probes,
                  long long draws_per_probe, RngStream& rng);

// Max alpha-th-moment estimate of stochastic gradients over the given probe
// points (used to audit the assumption along recorded trajectories).
double audit_alpha_moment(const Problem& problem, double alpha,
                          const std::vector<Vec>& probes, long long draws_per_probe,
                          RngStream& rng);

}  // namespace heavytail

#endif
