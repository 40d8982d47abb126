#include "heavytail/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "heavytail/parallel.hpp"

namespace heavytail {

namespace {

constexpr std::uint64_t kStreamEstimateG = 0x6573746780000001ULL;
constexpr std::uint64_t kStreamEvalSet = 0x6576616c80000002ULL;
constexpr std::uint64_t kStreamTrialBase = 0x7472690000000000ULL;

void check_geometric(const std::vector<long long>& grid, const char* what) {
  if (grid.size() < 4)
    throw std::invalid_argument(std::string(what) + " needs at least 4 nodes");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i + 1] <= grid[i])
      throw std::invalid_argument(std::string(what) + " must be increasing");
  }
  double ratio0 = static_cast<double>(grid[1]) / static_cast<double>(grid[0]);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    double ratio = static_cast<double>(grid[i + 1]) / static_cast<double>(grid[i]);
    if (std::abs(ratio / ratio0 - 1.0) > 0.05)
      throw std::invalid_argument(std::string(what) + " must be geometric");
  }
}

}  // namespace

double quantile_upper(std::vector<double> values, double delta) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta in (0,1)");
  std::sort(values.begin(), values.end());
  auto n = static_cast<double>(values.size());
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - delta) * n));
  idx = std::max<std::size_t>(1, std::min(values.size(), idx));
  return values[idx - 1];
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double target_exponent, double tolerance) {
  RateFit fit;
  fit.target_exponent = target_exponent;
  fit.tolerance = tolerance;
  if (points.size() < 2) return fit;
  for (const auto& [t, metric] : points) {
    if (!(t > 0.0) || !std::isfinite(metric) || !(metric > 0.0)) return fit;
  }
  double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [t, metric] : points) {
    mx += std::log(t);
    my += std::log(metric);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, metric] : points) {
    double dx = std::log(t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(metric) - my);
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [t, metric] : points) {
    double resid = std::log(metric) - (fit.intercept + fit.slope * std::log(t));
    ss += resid * resid;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.valid = std::isfinite(fit.slope);
  fit.pass = fit.valid && std::abs(fit.slope - (-target_exponent)) <= tolerance;
  return fit;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman needs two equal-length samples, size >= 2");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double n = static_cast<double>(x.size());
  double mx = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - mx);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - mx) * (ry[i] - mx);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Schedule build_schedule(const ScheduleSpec& spec, long long T, double L) {
  switch (spec.algorithm) {
    case Algorithm::sgd_clipped: {
      double p = spec.p > 0.0 ? spec.p : default_sgd_p(T, spec.alpha, L);
      return schedule_sgd(T, spec.alpha, p, spec.q, L);
    }
    case Algorithm::sgd: {
      double eta = spec.eta;
      if (!(eta > 0.0)) {
        double p = spec.p > 0.0 ? spec.p : default_sgd_p(T, spec.alpha, L);
        eta = p * std::pow(static_cast<double>(T),
                           -spec.alpha / (3.0 * spec.alpha - 2.0));
      }
      return schedule_sgd_plain(T, spec.alpha, eta);
    }
    case Algorithm::sgdm_clipped: {
      if (!(spec.G > 0.0))
        throw ScheduleError("sgdm schedule requires a resolved moment constant G");
      double p = spec.p > 0.0 ? spec.p : 1.0;
      return schedule_sgdm(T, spec.alpha, p, spec.s, spec.q, spec.r, spec.G);
    }
    case Algorithm::adagrad_norm:
      return schedule_adagrad_plain(T, spec.alpha, spec.g0);
    case Algorithm::adagrad_clipped:
    case Algorithm::accel_adagrad:
    case Algorithm::accel_rsag: {
      double p = spec.p > 0.0 ? spec.p : 1.0;
      return schedule_adaptive(T, spec.alpha, p, spec.g0, spec.algorithm);
    }
  }
  throw ScheduleError("unknown algorithm");
}

SweepResult sweep(const Problem& problem, const ScheduleSpec& spec,
                  const SweepOptions& options, std::vector<TrialRecord>* trial_records) {
  check_geometric(options.T_grid, "T grid");
  if (options.n_seeds < 16) throw std::invalid_argument("sweep needs n_seeds >= 16");
  if (!(options.delta > 0.0) || !(options.delta < 1.0))
    throw std::invalid_argument("delta in (0,1)");

  ScheduleSpec resolved = spec;
  SweepResult result;
  result.measure = measure_for(spec.algorithm);
  result.delta = options.delta;
  if (spec.algorithm == Algorithm::sgdm_clipped && !(resolved.G > 0.0)) {
    RngStream rg(options.seed, kStreamEstimateG);
    resolved.G = estimate_g(problem, spec.alpha, 10, 10000, rg);
  }
  result.resolved_g = resolved.G;

  // schedules first, so a constraint violation aborts before any trial runs
  std::vector<Schedule> schedules;
  schedules.reserve(options.T_grid.size());
  for (long long T : options.T_grid)
    schedules.push_back(build_schedule(resolved, T, problem.smoothness_L()));

  const auto n_nodes = static_cast<long long>(options.T_grid.size());
  const long long total = n_nodes * options.n_seeds;
  std::vector<TrialRecord> records(static_cast<std::size_t>(total));
  parallel_for(total, options.threads, [&](long long idx) {
    long long ti = idx / options.n_seeds;
    long long T = options.T_grid[static_cast<std::size_t>(ti)];
    RunOptions ro;
    ro.record_every = options.record_every > 0 ? options.record_every
                                               : std::max<long long>(1, T / 64);
    records[static_cast<std::size_t>(idx)] =
        run(problem, schedules[static_cast<std::size_t>(ti)], T, options.seed,
            kStreamTrialBase + static_cast<std::uint64_t>(idx), ro);
  });

  std::vector<std::pair<double, double>> fit_points;
  std::vector<std::pair<double, double>> fit_points_log;
  for (long long ti = 0; ti < n_nodes; ++ti) {
    SweepPoint pt;
    pt.T = options.T_grid[static_cast<std::size_t>(ti)];
    pt.schedule = schedules[static_cast<std::size_t>(ti)];
    for (long long k = 0; k < options.n_seeds; ++k) {
      const auto& rec = records[static_cast<std::size_t>(ti * options.n_seeds + k)];
      double metric = result.measure == Measure::sq_norm ? rec.avg_sq : rec.avg_norm;
      pt.seed_metrics.push_back(metric);
      if (rec.diverged) ++pt.n_diverged;
    }
    pt.quantile = quantile_upper(pt.seed_metrics, options.delta);
    if (pt.n_diverged == options.n_seeds) result.all_diverged_somewhere = true;
    fit_points.emplace_back(static_cast<double>(pt.T), pt.quantile);
    fit_points_log.emplace_back(static_cast<double>(pt.T),
                                pt.quantile / std::log(static_cast<double>(pt.T)));
    result.points.push_back(std::move(pt));
  }

  double target = rate_exponent(spec.alpha, result.measure);
  result.fit = fit_rate(fit_points, target, options.slope_tolerance);
  if (result.measure == Measure::norm) {
    result.fit_log_corrected = fit_rate(fit_points_log, target, options.slope_tolerance);
    result.has_log_corrected = true;
  }
  if (trial_records) *trial_records = std::move(records);
  return result;
}

ContrastResult contrast_clipped_vs_unclipped(const Problem& problem,
                                             const ScheduleSpec& spec, long long T,
                                             int n_seeds, double delta,
                                             std::uint64_t seed, int threads) {
  if (n_seeds < 1) throw std::invalid_argument("need at least one seed");
  ScheduleSpec clipped_spec = spec;
  clipped_spec.algorithm = Algorithm::sgd_clipped;
  Schedule clipped = build_schedule(clipped_spec, T, problem.smoothness_L());
  Schedule unclipped = schedule_sgd_plain(T, spec.alpha, clipped.eta);

  ContrastResult result;
  result.T = T;
  result.delta = delta;
  result.clipped.name = "sgd-clipped";
  result.unclipped.name = "sgd";
  result.clipped.seed_metrics.resize(static_cast<std::size_t>(n_seeds));
  result.unclipped.seed_metrics.resize(static_cast<std::size_t>(n_seeds));

  std::vector<long long> diverged(2, 0);
  std::vector<char> clipped_div(static_cast<std::size_t>(n_seeds), 0);
  std::vector<char> unclipped_div(static_cast<std::size_t>(n_seeds), 0);
  parallel_for(2LL * n_seeds, threads, [&](long long idx) {
    long long arm = idx / n_seeds;
    long long k = idx % n_seeds;
    RunOptions ro;
    ro.record_every = std::max<long long>(1, T / 64);
    // identical stream for both arms: same seeds, same noise draws
    std::uint64_t stream = kStreamTrialBase + static_cast<std::uint64_t>(k);
    const Schedule& sch = arm == 0 ? clipped : unclipped;
    TrialRecord rec = run(problem, sch, T, seed, stream, ro);
    if (arm == 0) {
      result.clipped.seed_metrics[static_cast<std::size_t>(k)] = rec.avg_sq;
      clipped_div[static_cast<std::size_t>(k)] = rec.diverged ? 1 : 0;
    } else {
      result.unclipped.seed_metrics[static_cast<std::size_t>(k)] = rec.avg_sq;
      unclipped_div[static_cast<std::size_t>(k)] = rec.diverged ? 1 : 0;
    }
  });
  for (int k = 0; k < n_seeds; ++k) {
    diverged[0] += clipped_div[static_cast<std::size_t>(k)];
    diverged[1] += unclipped_div[static_cast<std::size_t>(k)];
  }
  result.clipped.quantile = quantile_upper(result.clipped.seed_metrics, delta);
  result.unclipped.quantile = quantile_upper(result.unclipped.seed_metrics, delta);
  result.clipped.diverged_fraction =
      static_cast<double>(diverged[0]) / static_cast<double>(n_seeds);
  result.unclipped.diverged_fraction =
      static_cast<double>(diverged[1]) / static_cast<double>(n_seeds);
  result.clipped_below = result.clipped.quantile < result.unclipped.quantile;
  return result;
}

GenGapResult gen_gap_experiment(const GenGapOptions& options) {
  check_geometric(options.n_grid, "n grid");
  if (options.n_seeds < 1) throw std::invalid_argument("need at least one seed");
  if (options.n_fresh < 1) throw std::invalid_argument("n_fresh must be >= 1");
  for (long long n : options.n_grid) {
    if (n <= options.d) throw std::invalid_argument("n grid requires n > d");
  }

  CouplingTarget target = is_adaptive(options.schedule.algorithm)
                              ? CouplingTarget::adagrad_like
                              : CouplingTarget::sgd_like;

  // one template problem fixes the population (target weights, noise law);
  // per-trial problems share it and redraw only the training set
  Problem population_template = Problem::robust_regression(
      options.d, 1, options.seed, options.noise, options.label_noise_scale);
  RngStream eval_rng(options.seed, kStreamEvalSet);
  SampleSet eval_set = draw_population_set(population_template, options.n_fresh, eval_rng);

  const auto n_nodes = static_cast<long long>(options.n_grid.size());
  const long long total = n_nodes * options.n_seeds;
  struct TrialOut {
    double pop = 0.0;
    double emp = 0.0;
    double emp_full = 0.0;
    double max_gap_sq = 0.0;
  };
  std::vector<TrialOut> outs(static_cast<std::size_t>(total));

  parallel_for(total, options.threads, [&](long long idx) {
    long long ni = idx / options.n_seeds;
    long long n = options.n_grid[static_cast<std::size_t>(ni)];
    long long T = couple_T_to_n(n, options.d, options.alpha, target);
    Problem problem = Problem::robust_regression(
        options.d, static_cast<int>(n), options.seed, options.noise,
        options.label_noise_scale,
        options.seed + 0x6767617000000000ULL + static_cast<std::uint64_t>(idx));
    ScheduleSpec spec = options.schedule;
    spec.alpha = options.alpha;
    if (spec.algorithm == Algorithm::sgdm_clipped && !(spec.G > 0.0)) {
      RngStream rg(options.seed, kStreamEstimateG + static_cast<std::uint64_t>(idx));
      spec.G = estimate_g(problem, options.alpha, 10, 10000, rg);
    }
    Schedule sch = build_schedule(spec, T, problem.smoothness_L());
    RunOptions ro;
    ro.record_every = std::max<long long>(1, T / 32);
    ro.keep_points = true;
    TrialRecord rec = run(problem, sch, T, options.seed,
                          kStreamTrialBase + static_cast<std::uint64_t>(idx), ro);
    TrialOut& out = outs[static_cast<std::size_t>(idx)];
    if (rec.diverged) {
      out.pop = out.emp = out.emp_full = out.max_gap_sq =
          std::numeric_limits<double>::infinity();
      return;
    }
    out.emp_full = rec.avg_sq;
    double pop_sum = 0.0, emp_sum = 0.0, max_gap = 0.0;
    for (std::size_t i = 0; i < rec.recorded_points.size(); ++i) {
      const Vec& w = rec.recorded_points[i];
      Vec pop_g = grad_on_set(problem, eval_set, w);
      Vec emp_g = problem.empirical_grad(w);
      pop_sum += norm_sq(pop_g);
      emp_sum += rec.samples[i].grad_norm_sq;
      max_gap = std::max(max_gap, norm_sq(sub(pop_g, emp_g)));
    }
    auto count = static_cast<double>(rec.recorded_points.size());
    out.pop = pop_sum / count;
    out.emp = emp_sum / count;
    out.max_gap_sq = max_gap;
  });

  GenGapResult result;
  std::vector<double> ns, qs;
  for (long long ni = 0; ni < n_nodes; ++ni) {
    GenGapPoint pt;
    pt.n = options.n_grid[static_cast<std::size_t>(ni)];
    pt.T = couple_T_to_n(pt.n, options.d, options.alpha, target);
    std::vector<double> emp, emp_full, gap;
    for (long long k = 0; k < options.n_seeds; ++k) {
      const TrialOut& out = outs[static_cast<std::size_t>(ni * options.n_seeds + k)];
      pt.seed_pop_metrics.push_back(out.pop);
      emp.push_back(out.emp);
      emp_full.push_back(out.emp_full);
      gap.push_back(out.max_gap_sq);
    }
    pt.pop_quantile = quantile_upper(pt.seed_pop_metrics, options.delta);
    pt.emp_quantile = quantile_upper(emp, options.delta);
    pt.emp_full_quantile = quantile_upper(emp_full, options.delta);
    pt.max_gap_sq_quantile = quantile_upper(gap, options.delta);
    ns.push_back(static_cast<double>(pt.n));
    qs.push_back(pt.pop_quantile);
    result.points.push_back(std::move(pt));
  }
  result.spearman = spearman_rho(ns, qs);
  return result;
}

}  // namespace heavytail
