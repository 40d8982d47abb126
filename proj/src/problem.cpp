#include "heavytail/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heavytail {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::sampling: return "sampling";
    case NoiseKind::pareto_additive: return "pareto-additive";
    case NoiseKind::gaussian_additive: return "gaussian-additive";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "sampling") return NoiseKind::sampling;
  if (s == "pareto-additive") return NoiseKind::pareto_additive;
  if (s == "gaussian-additive") return NoiseKind::gaussian_additive;
  throw std::invalid_argument("unknown noise kind: " + s);
}

std::string to_string(ProblemFamily f) {
  return f == ProblemFamily::robust_regression ? "robust-regression" : "quadratic";
}

ProblemFamily family_from_string(const std::string& s) {
  if (s == "robust-regression") return ProblemFamily::robust_regression;
  if (s == "quadratic") return ProblemFamily::quadratic;
  throw std::invalid_argument("unknown problem family: " + s);
}

void NoiseModel::validate() const {
  if (!(moment.alpha > 1.0) || !(moment.alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (1,2]");
  if (moment.g_value < 0.0 || !std::isfinite(moment.g_value))
    throw std::invalid_argument("moment bound G must be finite and nonnegative");
  if (kind == NoiseKind::pareto_additive || kind == NoiseKind::sampling) {
    if (!(tail_shape > moment.alpha))
      throw std::invalid_argument("pareto tail shape must exceed alpha");
  }
  if (kind == NoiseKind::pareto_additive || kind == NoiseKind::gaussian_additive) {
    if (!(scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
  }
}

Vec noise_draw(const NoiseModel& noise, int dim, RngStream& rng) {
  Vec out(static_cast<std::size_t>(dim), 0.0);
  switch (noise.kind) {
    case NoiseKind::pareto_additive: {
      double r = rng.next_pareto(noise.tail_shape, noise.scale);
      rng.fill_unit_sphere(out);
      for (auto& v : out) v *= r;
      return out;
    }
    case NoiseKind::gaussian_additive: {
      rng.fill_normal(out.data(), out.size());
      for (auto& v : out) v *= noise.scale;
      return out;
    }
    case NoiseKind::none:
    case NoiseKind::sampling:
      throw std::invalid_argument("noise_draw requires an additive noise kind");
  }
  return out;
}

namespace {

constexpr std::uint64_t kStreamWStar = 0x77737461724a9001ULL;
constexpr std::uint64_t kStreamData = 0x646174617365f002ULL;

double phi_prime(double u) {
  double denom = 1.0 + u * u;
  return 2.0 * u / (denom * denom);
}

}  // namespace

double Problem::label_noise(RngStream& rng) const {
  if (label_noise_scale_ <= 0.0) return 0.0;
  switch (noise_.kind) {
    case NoiseKind::none:
      return 0.0;
    case NoiseKind::gaussian_additive:
      return label_noise_scale_ * rng.next_normal();
    case NoiseKind::sampling:
    case NoiseKind::pareto_additive: {
      double r = rng.next_pareto(noise_.tail_shape, label_noise_scale_);
      double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
      return sign * r;
    }
  }
  return 0.0;
}

Problem Problem::robust_regression(int d, int n, std::uint64_t seed, NoiseModel noise,
                                   double label_noise_scale, std::uint64_t data_seed) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n < 1) throw std::invalid_argument("dataset size must be >= 1");
  noise.validate();

  Problem p;
  p.family_ = ProblemFamily::robust_regression;
  p.dim_ = d;
  p.smoothness_L_ = 2.0;  // sup|phi''| = 2 at u = 0, ||x|| <= 1
  p.bound_M_ = 1.0;       // per-sample loss in [0,1)
  p.noise_ = noise;
  p.label_noise_scale_ = label_noise_scale;

  RngStream rw(seed, kStreamWStar);
  p.w_star_.assign(static_cast<std::size_t>(d), 0.0);
  rw.fill_unit_sphere(p.w_star_);

  RngStream rd(data_seed == 0 ? seed : data_seed, kStreamData);
  p.dataset_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.dataset_.push_back(p.draw_sample(rd));
  return p;
}

Problem Problem::quadratic(int d, double condition, NoiseModel noise) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(condition >= 1.0)) throw std::invalid_argument("condition must be >= 1");
  noise.validate();

  Problem p;
  p.family_ = ProblemFamily::quadratic;
  p.dim_ = d;
  p.smoothness_L_ = condition;
  p.noise_ = noise;
  p.lambda_.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    p.lambda_[static_cast<std::size_t>(i)] =
        d == 1 ? condition : 1.0 + (condition - 1.0) * static_cast<double>(i) / (d - 1);
  }
  // single data-independent sample: population and empirical risks coincide
  p.dataset_.push_back(Sample{Vec(static_cast<std::size_t>(d), 0.0), 0.0});
  return p;
}

double Problem::sample_loss(const Vec& w, const Sample& z) const {
  if (family_ == ProblemFamily::quadratic) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += lambda_[i] * w[i] * w[i];
    return 0.5 * s;
  }
  double u = dot(w, z.x) - z.y;
  return u * u / (1.0 + u * u);
}

Vec Problem::sample_grad(const Vec& w, const Sample& z) const {
  if (family_ == ProblemFamily::quadratic) {
    Vec g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = lambda_[i] * w[i];
    return g;
  }
  double u = dot(w, z.x) - z.y;
  return scale(phi_prime(u), z.x);
}

double Problem::empirical_loss(const Vec& w) const {
  double s = 0.0;
  for (const Sample& z : dataset_) s += sample_loss(w, z);
  return s / static_cast<double>(dataset_.size());
}

Vec Problem::empirical_grad(const Vec& w) const {
  if (family_ == ProblemFamily::quadratic) return sample_grad(w, dataset_.front());
  Vec g(w.size(), 0.0);
  for (const Sample& z : dataset_) {
    double u = dot(w, z.x) - z.y;
    axpy_inplace(g, phi_prime(u), z.x);
  }
  double inv = 1.0 / static_cast<double>(dataset_.size());
  for (auto& v : g) v *= inv;
  return g;
}

Sample Problem::draw_sample(RngStream& rng) const {
  if (family_ == ProblemFamily::quadratic) return dataset_.front();
  Sample z;
  z.x.assign(static_cast<std::size_t>(dim_), 0.0);
  rng.fill_unit_sphere(z.x);
  z.y = dot(w_star_, z.x) + label_noise(rng);
  return z;
}

Vec Problem::stochastic_grad(const Vec& w, RngStream& rng) const {
  switch (noise_.kind) {
    case NoiseKind::none:
      return empirical_grad(w);
    case NoiseKind::sampling: {
      auto j = rng.next_below(static_cast<std::uint64_t>(dataset_.size()));
      return sample_grad(w, dataset_[static_cast<std::size_t>(j)]);
    }
    case NoiseKind::pareto_additive:
    case NoiseKind::gaussian_additive: {
      Vec g = empirical_grad(w);
      Vec eps = noise_draw(noise_, dim_, rng);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += eps[i];
      return g;
    }
  }
  return empirical_grad(w);
}

Problem::PopGradEstimate Problem::population_grad_estimate(const Vec& w, long long n_fresh,
                                                           RngStream& rng) const {
  if (n_fresh < 1) throw std::invalid_argument("n_fresh must be >= 1");
  Vec mean(w.size(), 0.0);
  Vec m2(w.size(), 0.0);
  for (long long k = 1; k <= n_fresh; ++k) {
    Sample z = draw_sample(rng);
    Vec g = sample_grad(w, z);
    for (std::size_t i = 0; i < w.size(); ++i) {
      double delta = g[i] - mean[i];
      mean[i] += delta / static_cast<double>(k);
      m2[i] += delta * (g[i] - mean[i]);
    }
  }
  double var_sum = 0.0;
  if (n_fresh > 1) {
    for (double v : m2) var_sum += v / static_cast<double>(n_fresh - 1);
  }
  return PopGradEstimate{std::move(mean),
                         std::sqrt(var_sum / static_cast<double>(n_fresh))};
}

double Problem::b_constant() const {
  Vec zero(static_cast<std::size_t>(dim_), 0.0);
  double best = 0.0;
  for (const Sample& z : dataset_) best = std::max(best, norm(sample_grad(zero, z)));
  return best;
}

double Problem::b_population() const {
  if (family_ == ProblemFamily::quadratic) return 0.0;
  return 3.0 * std::sqrt(3.0) / 8.0;  // sup_u |phi'(u)|, ||x|| <= 1
}

SampleSet draw_population_set(const Problem& problem, long long count, RngStream& rng) {
  if (count < 1) throw std::invalid_argument("population set size must be >= 1");
  SampleSet set;
  set.dim = problem.dim();
  set.size = count;
  set.xs.resize(static_cast<std::size_t>(count * problem.dim()));
  set.ys.resize(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    Sample z = problem.draw_sample(rng);
    std::copy(z.x.begin(), z.x.end(),
              set.xs.begin() + static_cast<std::ptrdiff_t>(i * problem.dim()));
    set.ys[static_cast<std::size_t>(i)] = z.y;
  }
  return set;
}

Vec grad_on_set(const Problem& problem, const SampleSet& set, const Vec& w) {
  if (problem.family() == ProblemFamily::quadratic) return problem.empirical_grad(w);
  if (set.dim != problem.dim() || set.dim != static_cast<int>(w.size()))
    throw std::invalid_argument("sample set dimension mismatch");
  Vec g(w.size(), 0.0);
  const int d = set.dim;
  for (long long i = 0; i < set.size; ++i) {
    const double* x = set.xs.data() + i * d;
    double u = -set.ys[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) u += w[static_cast<std::size_t>(j)] * x[j];
    double denom = 1.0 + u * u;
    double c = 2.0 * u / (denom * denom);
    for (int j = 0; j < d; ++j) g[static_cast<std::size_t>(j)] += c * x[j];
  }
  double inv = 1.0 / static_cast<double>(set.size);
  for (auto& v : g) v *= inv;
  return g;
}

double audit_alpha_moment(const Problem& problem, double alpha,
                          const std::vector<Vec>& probes, long long draws_per_probe,
                          RngStream& rng) {
  if (probes.empty()) throw std::invalid_argument("audit requires probe points");
  double worst = 0.0;
  for (const Vec& w : probes) {
    double s = 0.0;
    for (long long k = 0; k < draws_per_probe; ++k)
      s += std::pow(norm(problem.stochastic_grad(w, rng)), alpha);
    worst = std::max(worst, s / static_cast<double>(draws_per_probe));
  }
  return worst;
}

double estimate_g(const Problem& problem, double alpha, int n_probes,
                  long long draws_per_probe, RngStream& rng) {
  std::vector<Vec> probes;
  probes.emplace_back(static_cast<std::size_t>(problem.dim()), 0.0);
  for (int i = 1; i < n_probes; ++i) {
    Vec w(static_cast<std::size_t>(problem.dim()), 0.0);
    rng.fill_unit_sphere(w);
    double radius = 2.0 * std::pow(rng.next_unit_open(), 1.0 / problem.dim());
    for (auto& v : w) v *= radius;
    probes.push_back(std::move(w));
  }
  double worst = audit_alpha_moment(problem, alpha, probes, draws_per_probe, rng);
  return 1.1 * std::pow(worst, 1.0 / alpha);
}

}  // namespace heavytail
