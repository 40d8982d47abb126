#ifndef HEAVYTAIL_HARNESS_HPP
#define HEAVYTAIL_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "heavytail/optimizer.hpp"
#include "heavytail/problem.hpp"
#include "heavytail/schedule.hpp"

namespace heavytail {

// (1-delta) empirical quantile across seed-level metrics: the order statistic
// at 1-based index ceil((1-delta) N). +inf entries sort last, so diverged
// trials land in the top quantiles.
double quantile_upper(std::vector<double> values, double delta);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double target_exponent = 0.0;
  double tolerance = 0.0;
  bool valid = false;  // false when any metric is non-finite or non-positive
  bool pass = false;   // valid and |slope - (-target)| <= tolerance
};

// OLS of log(metric) on log(T). Non-finite or non-positive metrics mark the
// fit invalid rather than being dropped.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double target_exponent, double tolerance);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct SweepPoint {
  long long T = 0;
  Schedule schedule;
  double quantile = 0.0;
  long long n_diverged = 0;
  std::vector<double> seed_metrics;  // ordered by seed index
};

struct SweepResult {
  Measure measure = Measure::sq_norm;
  double delta = 0.1;
  double resolved_g = 0.0;  // G used by the schedule builder (0 if unused)
  std::vector<SweepPoint> points;
  RateFit fit;
  RateFit fit_log_corrected;  // metric / log T; meaningful for the norm measure
  bool has_log_corrected = false;
  bool all_diverged_somewhere = false;
};

// Builds the schedule for one horizon, resolving defaults (D14's p for
// clipped SGD, the supplied constants otherwise).
struct ScheduleSpec {
  Algorithm algorithm = Algorithm::sgd_clipped;
  double alpha = 2.0;
  // negative means "use default": p -> default_sgd_p for clipped SGD, 1.0 else
  double p = -1.0;
  double q = 1.0;
  double s = 1.0;
  double r = 1.0;
  double g0 = 1.0;
  double eta = -1.0;  // plain SGD only; negative -> mirror of the clipped default
  double G = 0.0;     // required by SGDM; resolved empirically when 0
};

Schedule build_schedule(const ScheduleSpec& spec, long long T, double L);

struct SweepOptions {
  std::vector<long long> T_grid;
  int n_seeds = 32;
  double delta = 0.1;
  double slope_tolerance = 0.15;
  std::uint64_t seed = 0;
  int threads = 1;
  long long record_every = 0;  // 0 -> max(1, T/64)
};

// For each T: rebuild the schedule, run n_seeds independent trials, extract
// the (1-delta) quantile of the guarantee's measure, then fit the
// log-log slope against the rate exponent for (algorithm, alpha).
SweepResult sweep(const Problem& problem, const ScheduleSpec& spec,
                  const SweepOptions& options,
                  std::vector<TrialRecord>* trial_records = nullptr);

struct ContrastArm {
  std::string name;
  double quantile = 0.0;
  double diverged_fraction = 0.0;
  std::vector<double> seed_metrics;
};

struct ContrastResult {
  long long T = 0;
  double delta = 0.1;
  ContrastArm clipped;
  ContrastArm unclipped;
  bool clipped_below = false;  // clipped quantile strictly below unclipped
};

// Clipped SGD vs plain SGD under identical seeds and identical eta.
ContrastResult contrast_clipped_vs_unclipped(const Problem& problem,
                                             const ScheduleSpec& spec, long long T,
                                             int n_seeds, double delta,
                                             std::uint64_t seed, int threads);

struct GenGapPoint {
  long long n = 0;
  long long T = 0;
  double pop_quantile = 0.0;       // (1-delta) quantile of the population metric
  double emp_quantile = 0.0;       // same quantile, empirical metric at recorded iterates
  double emp_full_quantile = 0.0;  // same quantile, full (1/T)-average empirical metric
  double max_gap_sq_quantile = 0.0;
  std::vector<double> seed_pop_metrics;
};

struct GenGapResult {
  std::vector<GenGapPoint> points;
  double spearman = 0.0;  // rank correlation of n vs pop quantile
};

struct GenGapOptions {
  int d = 4;
  double alpha = 2.0;
  std::vector<long long> n_grid;
  int n_seeds = 32;
  double delta = 0.1;
  long long n_fresh = 1000000;
  std::uint64_t seed = 0;
  int threads = 1;
  NoiseModel noise;
  double label_noise_scale = 0.1;
  ScheduleSpec schedule;
};

// Per n: draw a fresh training set per seed, couple T to (n, d), run the
// trial, and measure the population stationarity metric at the recorded
// iterates against one shared fresh evaluation set.
GenGapResult gen_gap_experiment(const GenGapOptions& options);

}  // namespace heavytail

#endif
