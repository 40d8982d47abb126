#include "heavytail/conclab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heavytail/parallel.hpp"

namespace heavytail {

namespace {

void require_additive(const NoiseModel& noise) {
  if (noise.kind != NoiseKind::pareto_additive &&
      noise.kind != NoiseKind::gaussian_additive)
    throw std::invalid_argument("clipping checks require an additive noise kind");
}

RngStream derived(const RngStream& base, std::uint64_t tag) {
  return RngStream(base.seed(), base.stream_id() * 0x100000001b3ULL + tag);
}

}  // namespace

ClipCheckReport check_clip_bias(const NoiseModel& noise, const Vec& mean,
                                const std::vector<double>& tau_grid, double alpha,
                                double g, long long n_mc, RngStream rng) {
  require_additive(noise);
  if (n_mc < 10000) throw std::invalid_argument("bias check needs n_mc >= 10^4");
  const int d = static_cast<int>(mean.size());
  ClipCheckReport report;
  report.name = "clip-bias";
  report.alpha = alpha;
  report.g = g;
  report.n_mc = n_mc;
  report.pass = true;

  for (std::size_t ti = 0; ti < tau_grid.size(); ++ti) {
    const double tau = tau_grid[ti];
    if (!(tau > 0.0)) throw std::invalid_argument("tau grid must be positive");
    RngStream stream = derived(rng, ti + 1);
    Vec sum(mean.size(), 0.0);
    Vec m2(mean.size(), 0.0);
    Vec cmean(mean.size(), 0.0);
    for (long long k = 1; k <= n_mc; ++k) {
      Vec gvec = noise_draw(noise, d, stream);
      for (std::size_t i = 0; i < gvec.size(); ++i) gvec[i] += mean[i];
      Vec c = clip(gvec, tau);
      for (std::size_t i = 0; i < c.size(); ++i) {
        double delta = c[i] - cmean[i];
        cmean[i] += delta / static_cast<double>(k);
        m2[i] += delta * (c[i] - cmean[i]);
      }
    }
    double var_sum = 0.0;
    for (double v : m2) var_sum += v / static_cast<double>(n_mc - 1);
    GridPointReport pt;
    pt.tau = tau;
    pt.estimate = norm(sub(cmean, mean));
    pt.bound = std::pow(g, alpha) * std::pow(tau, 1.0 - alpha);
    pt.se = std::sqrt(var_sum / static_cast<double>(n_mc));
    pt.ratio = pt.estimate / pt.bound;
    pt.pass = pt.estimate <= pt.bound + 3.0 * pt.se;
    report.pass = report.pass && pt.pass;
    report.points.push_back(pt);
  }
  return report;
}

ClipCheckReport check_clip_second_moment(const NoiseModel& noise, const Vec& mean,
                                         const std::vector<double>& tau_grid,
                                         double alpha, double g, long long n_mc,
                                         RngStream rng) {
  require_additive(noise);
  if (n_mc < 10000) throw std::invalid_argument("second-moment check needs n_mc >= 10^4");
  const int d = static_cast<int>(mean.size());
  ClipCheckReport report;
  report.name = "clip-second-moment";
  report.alpha = alpha;
  report.g = g;
  report.n_mc = n_mc;
  report.pass = true;

  for (std::size_t ti = 0; ti < tau_grid.size(); ++ti) {
    const double tau = tau_grid[ti];
    if (!(tau > 0.0)) throw std::invalid_argument("tau grid must be positive");
    // pass 1: mean of the clipped vector; pass 2 replays the stream for the
    // centered second moment and its sampling variance
    RngStream pass1 = derived(rng, ti + 1);
    Vec cmean(mean.size(), 0.0);
    for (long long k = 1; k <= n_mc; ++k) {
      Vec gvec = noise_draw(noise, d, pass1);
      for (std::size_t i = 0; i < gvec.size(); ++i) gvec[i] += mean[i];
      Vec c = clip(gvec, tau);
      for (std::size_t i = 0; i < c.size(); ++i)
        cmean[i] += (c[i] - cmean[i]) / static_cast<double>(k);
    }
    RngStream pass2 = derived(rng, ti + 1);
    double sum = 0.0, sum_sq = 0.0;
    for (long long k = 0; k < n_mc; ++k) {
      Vec gvec = noise_draw(noise, d, pass2);
      for (std::size_t i = 0; i < gvec.size(); ++i) gvec[i] += mean[i];
      Vec c = clip(gvec, tau);
      double nsq = norm_sq(sub(c, cmean));
      sum += nsq;
      sum_sq += nsq * nsq;
    }
    double m2 = sum / static_cast<double>(n_mc);
    double var = std::max(0.0, sum_sq / static_cast<double>(n_mc) - m2 * m2);
    GridPointReport pt;
    pt.tau = tau;
    pt.estimate = m2;
    pt.bound = std::pow(g, alpha) * std::pow(tau, 2.0 - alpha);
    pt.se = std::sqrt(var / static_cast<double>(n_mc));
    pt.ratio = pt.estimate / pt.bound;
    pt.pass = pt.estimate <= pt.bound + 3.0 * pt.se;
    report.pass = report.pass && pt.pass;
    report.points.push_back(pt);
  }
  return report;
}

void ScalarMdsSpec::validate() const {
  if (kind == MdsKind::bernoulli) {
    if (!(b > 0.0)) throw std::invalid_argument("bernoulli magnitude must be positive");
    return;
  }
  if (!(shape > 1.0) || !(scale > 0.0))
    throw std::invalid_argument("clipped pareto needs shape > 1 and scale > 0");
  if (!(clip_c >= scale))
    throw std::invalid_argument("clip level must be >= the pareto scale");
}

double ScalarMdsSpec::mean() const {
  if (kind == MdsKind::bernoulli) return 0.0;
  // E[min(X,c)] = xm + xm^a (c^(1-a) - xm^(1-a)) / (1-a)
  return scale + std::pow(scale, shape) *
                     (std::pow(clip_c, 1.0 - shape) - std::pow(scale, 1.0 - shape)) /
                     (1.0 - shape);
}

double ScalarMdsSpec::variance() const {
  if (kind == MdsKind::bernoulli) return b * b;
  // E[min(X,c)^2] = xm^2 + 2 xm^a (c^(2-a) - xm^(2-a)) / (2-a), a != 2
  double second;
  if (shape == 2.0) {
    second = scale * scale + 2.0 * scale * scale * std::log(clip_c / scale);
  } else {
    second = scale * scale +
             2.0 * std::pow(scale, shape) *
                 (std::pow(clip_c, 2.0 - shape) - std::pow(scale, 2.0 - shape)) /
                 (2.0 - shape);
  }
  double m = mean();
  return second - m * m;
}

double ScalarMdsSpec::increment_bound() const {
  if (kind == MdsKind::bernoulli) return b;
  double m = mean();
  return std::max(clip_c - m, m - scale);
}

double ScalarMdsSpec::draw(RngStream& rng) const {
  if (kind == MdsKind::bernoulli) return (rng.next_u64() & 1u) ? b : -b;
  return std::min(rng.next_pareto(shape, scale), clip_c);
}

CoverageReport check_bernstein_scalar(const ScalarMdsSpec& spec, double rho,
                                      double delta, long long n, long long n_trials,
                                      std::uint64_t seed, int threads) {
  spec.validate();
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta in (0,1)");
  if (n < 1 || n_trials < 1) throw std::invalid_argument("n and n_trials must be >= 1");
  const double b = spec.increment_bound();
  const double sigma_sq = static_cast<double>(n) * spec.variance();
  const double log_term = std::log(1.0 / delta);
  if (rho <= 0.0) {
    // variance-optimal choice, capped at the inequality's rho <= 1
    rho = sigma_sq > 0.0 ? std::min(1.0, b * std::sqrt(log_term) / std::sqrt(sigma_sq))
                         : 1.0;
  }
  if (rho > 1.0) throw std::invalid_argument("rho must lie in (0,1]");
  const double rhs = rho * sigma_sq / b + b * log_term / rho;
  const double mean = spec.mean();

  std::vector<char> violated(static_cast<std::size_t>(n_trials), 0);
  parallel_for(n_trials, threads, [&](long long trial) {
    RngStream rng(seed, 0x19b5a000000ULL + static_cast<std::uint64_t>(trial));
    double lhs = 0.0;
    for (long long k = 0; k < n; ++k) lhs += spec.draw(rng) - mean;
    violated[static_cast<std::size_t>(trial)] = lhs > rhs ? 1 : 0;
  });

  CoverageReport rep;
  rep.bound_desc = "sum xi - sum E xi <= rho sigma^2/b + b log(1/delta)/rho";
  rep.n_trials = n_trials;
  for (char v : violated) rep.n_violations += v;
  rep.delta = delta;
  rep.violation_rate =
      static_cast<double>(rep.n_violations) / static_cast<double>(n_trials);
  rep.se = std::sqrt(delta * (1.0 - delta) / static_cast<double>(n_trials));
  rep.pass = rep.violation_rate <= delta + 3.0 * rep.se;
  return rep;
}

void VectorMdsSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (kind == VecMdsKind::clipped_pareto_radial) {
    if (!(shape > 1.0) || !(scale > 0.0))
      throw std::invalid_argument("clipped pareto needs shape > 1 and scale > 0");
    if (!(clip_c >= scale))
      throw std::invalid_argument("clip level must be >= the pareto scale");
  }
}

double VectorMdsSpec::norm_bound() const {
  if (kind == VecMdsKind::rademacher) return std::sqrt(static_cast<double>(dim));
  return clip_c;
}

double VectorMdsSpec::second_moment() const {
  if (kind == VecMdsKind::rademacher) return static_cast<double>(dim);
  ScalarMdsSpec radial{MdsKind::clipped_pareto, 1.0, shape, scale, clip_c};
  double m = radial.mean();
  return radial.variance() + m * m;  // E[min(r,c)^2]
}

void VectorMdsSpec::draw(Vec& out, RngStream& rng) const {
  if (kind == VecMdsKind::rademacher) {
    for (auto& v : out) v = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    return;
  }
  double r = std::min(rng.next_pareto(shape, scale), clip_c);
  rng.fill_unit_sphere(out);
  for (auto& v : out) v *= r;
}

CoverageReport check_pinelis_vector(const VectorMdsSpec& spec, double delta,
                                    long long t, long long n_trials,
                                    std::uint64_t seed, int threads) {
  spec.validate();
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta in (0,1)");
  if (t < 1 || n_trials < 1) throw std::invalid_argument("t and n_trials must be >= 1");
  const double D = spec.norm_bound();
  const double sigma = std::sqrt(static_cast<double>(t) * spec.second_moment());
  const double rhs = 2.0 * (D / 3.0 + sigma) * std::log(2.0 / delta);

  std::vector<char> violated(static_cast<std::size_t>(n_trials), 0);
  parallel_for(n_trials, threads, [&](long long trial) {
    RngStream rng(seed, 0x20b5a000000ULL + static_cast<std::uint64_t>(trial));
    Vec increment(static_cast<std::size_t>(spec.dim), 0.0);
    Vec partial(static_cast<std::size_t>(spec.dim), 0.0);
    double running_max = 0.0;
    for (long long k = 0; k < t; ++k) {
      spec.draw(increment, rng);
      for (std::size_t i = 0; i < partial.size(); ++i) partial[i] += increment[i];
      running_max = std::max(running_max, norm(partial));
    }
    violated[static_cast<std::size_t>(trial)] = running_max > rhs ? 1 : 0;
  });

  CoverageReport rep;
  rep.bound_desc = "max_j ||sum_{k<=j} xi_k|| <= 2 (D/3 + sigma_t) log(2/delta)";
  rep.n_trials = n_trials;
  for (char v : violated) rep.n_violations += v;
  rep.delta = delta;
  rep.violation_rate =
      static_cast<double>(rep.n_violations) / static_cast<double>(n_trials);
  rep.se = std::sqrt(delta * (1.0 - delta) / static_cast<double>(n_trials));
  rep.pass = rep.violation_rate <= delta + 3.0 * rep.se;
  return rep;
}

double eval_uniform_conv_bound(const UniformConvBound& params) {
  if (!(params.L > 0.0) || !(params.R > 0.0) || !(params.b >= 0.0) || params.n < 1 ||
      params.d < 1 || !(params.delta > 0.0) || !(params.delta < 1.0))
    throw std::invalid_argument("uniform convergence bound needs positive parameters");
  const double e = 2.718281828459045235360287471352662498;
  double dim_term = 48.0 * e * std::sqrt(2.0) *
                    (std::log(2.0) + static_cast<double>(params.d) * std::log(3.0 * e));
  double paren = 2.0 + 2.0 * std::sqrt(dim_term) + std::sqrt(2.0 * std::log(1.0 / params.delta));
  return (params.L * params.R + params.b) / std::sqrt(static_cast<double>(params.n)) * paren;
}

UniformConvCheck check_uniform_convergence(const Problem& problem, double R,
                                           double delta, int n_probes,
                                           long long n_fresh, RngStream rng) {
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  if (n_probes < 1) throw std::invalid_argument("need at least one probe");
  UniformConvBound params;
  params.L = problem.smoothness_L();
  params.R = R;
  params.b = problem.b_population();
  params.n = problem.data_size();
  params.d = problem.dim();
  params.delta = delta;

  UniformConvCheck out;
  out.bound = eval_uniform_conv_bound(params);
  out.n_probes = n_probes;
  SampleSet fresh = draw_population_set(problem, n_fresh, rng);
  for (int i = 0; i < n_probes; ++i) {
    Vec w(static_cast<std::size_t>(problem.dim()), 0.0);
    rng.fill_unit_sphere(w);
    double radius = R * std::pow(rng.next_unit_open(), 1.0 / problem.dim());
    for (auto& v : w) v *= radius;
    double gap = norm(sub(grad_on_set(problem, fresh, w), problem.empirical_grad(w)));
    out.max_observed = std::max(out.max_observed, gap);
  }
  out.pass = out.max_observed <= out.bound;
  return out;
}

SumCheckResult check_adagrad_sums(const std::vector<double>& seq) {
  if (seq.empty()) throw std::invalid_argument("sequence must be non-empty");
  for (double a : seq) {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument("sequence entries must be finite and nonnegative");
  }
  SumCheckResult res;
  double prefix = 0.0;
  for (double a : seq) {
    prefix += a;
    if (prefix > 0.0) {
      res.middle += a / std::sqrt(prefix);
      res.harmonic += a / prefix;
    }
    // zero prefix means a == 0 here: 0/0 terms skipped as their limit 0
    res.harmonic_guarded += a / (1.0 + prefix);
  }
  res.total = prefix;
  res.lower = std::sqrt(res.total);
  res.upper = 2.0 * res.lower;
  res.harmonic_bound = 1.0 + std::log(1.0 + res.total);
  res.lower_slack = res.middle - res.lower;
  res.upper_slack = res.upper - res.middle;
  res.harmonic_slack = res.harmonic_bound - res.harmonic;
  res.harmonic_guarded_slack = res.harmonic_bound - res.harmonic_guarded;
  // rounding guard for the equality case (single element hits the lower
  // bound exactly; a/sqrt(a) vs sqrt(a) can disagree by an ulp)
  const double tol = 1e-12;
  res.pass = res.middle >= res.lower * (1.0 - tol) &&
             res.middle <= res.upper * (1.0 + tol) &&
             res.harmonic_guarded <= res.harmonic_bound * (1.0 + tol);
  return res;
}

}  // namespace heavytail
