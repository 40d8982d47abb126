#include "heavytail/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heavytail {

namespace {

// Shared update kernel: out = w - step * direction. Both the plain and the
// clipped/momentum paths go through here so reduction identities hold
// bit-for-bit.
Vec apply_update(const Vec& w, double step, const Vec& direction) {
  Vec out = w;
  axpy_inplace(out, -step, direction);
  return out;
}

Vec interpolate(double alpha_t, const Vec& w, const Vec& w_tilde) {
  if (alpha_t == 1.0) return w;  // no arithmetic: keeps the reduction exact
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out[i] = alpha_t * w[i] + (1.0 - alpha_t) * w_tilde[i];
  return out;
}

}  // namespace

StepResult<SgdState> sgd_step(const SgdState& s, const Problem& problem, double eta,
                              RngStream& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  Vec g = problem.stochastic_grad(s.w, rng);
  StepResult<SgdState> res;
  res.eval_point = s.w;
  res.stepsize = eta;
  res.clip_active = false;
  res.state = SgdState{apply_update(s.w, eta, g), s.t + 1};
  return res;
}

StepResult<SgdState> sgd_clipped_step(const SgdState& s, const Problem& problem,
                                      double eta, double tau, RngStream& rng) {
  if (!(eta > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("eta and tau must be positive");
  Vec g = problem.stochastic_grad(s.w, rng);
  bool active = norm(g) > tau;
  Vec gbar = clip(g, tau);
  StepResult<SgdState> res;
  res.eval_point = s.w;
  res.stepsize = eta;
  res.clip_active = active;
  res.state = SgdState{apply_update(s.w, eta, gbar), s.t + 1};
  return res;
}

StepResult<SgdmState> sgdm_clipped_step(const SgdmState& s, const Problem& problem,
                                        double eta, double tau1, double tau2,
                                        double gamma, RngStream& rng) {
  if (!(eta > 0.0) || !(tau1 > 0.0) || !(tau2 > 0.0))
    throw std::invalid_argument("eta, tau1, tau2 must be positive");
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("gamma must lie in [0,1)");
  Vec g = problem.stochastic_grad(s.w, rng);
  bool active = norm(g) > tau1;
  Vec gbar = clip(g, tau1);
  Vec m_next(s.m.size());
  for (std::size_t i = 0; i < s.m.size(); ++i)
    m_next[i] = gamma * s.m[i] + (1.0 - gamma) * gbar[i];
  bool active2 = norm(m_next) > tau2;
  Vec mbar = clip(m_next, tau2);
  StepResult<SgdmState> res;
  res.eval_point = s.w;
  res.stepsize = eta;
  res.clip_active = active || active2;
  res.state = SgdmState{apply_update(s.w, eta, mbar), std::move(m_next), s.t + 1};
  return res;
}

StepResult<AdagradState> adagrad_step(const AdagradState& s, const Problem& problem,
                                      RngStream& rng) {
  Vec g = problem.stochastic_grad(s.w, rng);
  double accum_next = s.accum + norm_sq(g);
  double eta_t = 1.0 / std::sqrt(accum_next);
  StepResult<AdagradState> res;
  res.eval_point = s.w;
  res.stepsize = eta_t;
  res.clip_active = false;
  res.state = AdagradState{apply_update(s.w, eta_t, g), accum_next, s.t + 1};
  return res;
}

StepResult<AdagradState> adagrad_clipped_step(const AdagradState& s,
                                              const Problem& problem, double tau,
                                              RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  Vec g = problem.stochastic_grad(s.w, rng);
  bool active = norm(g) > tau;
  Vec gbar = clip(g, tau);
  double accum_next = s.accum + norm_sq(gbar);
  double eta_t = 1.0 / std::sqrt(accum_next);
  StepResult<AdagradState> res;
  res.eval_point = s.w;
  res.stepsize = eta_t;
  res.clip_active = active;
  res.state = AdagradState{apply_update(s.w, eta_t, gbar), accum_next, s.t + 1};
  return res;
}

StepResult<AccelState> accel_clipped_step(const AccelState& s, const Problem& problem,
                                          double tau, AccelMode mode, RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  double alpha_t = mode == AccelMode::rsag ? 2.0 / static_cast<double>(s.t + 1) : 1.0;
  Vec w_bar = interpolate(alpha_t, s.w, s.w_tilde);
  Vec g = problem.stochastic_grad(w_bar, rng);
  bool active = norm(g) > tau;
  Vec gbar = clip(g, tau);
  double accum_next = s.accum + norm_sq(gbar);
  double lambda_t = 1.0 / std::sqrt(accum_next);
  double beta_t = mode == AccelMode::rsag ? (1.0 + alpha_t) * lambda_t : lambda_t;
  StepResult<AccelState> res;
  res.stepsize = lambda_t;
  res.clip_active = active;
  res.state = AccelState{apply_update(s.w, lambda_t, gbar),
                         apply_update(w_bar, beta_t, gbar), accum_next, s.t + 1};
  res.eval_point = std::move(w_bar);
  return res;
}

namespace {

bool is_finite_state(const SgdState& s) { return is_finite(s.w); }
bool is_finite_state(const SgdmState& s) { return is_finite(s.w) && is_finite(s.m); }
bool is_finite_state(const AdagradState& s) {
  return is_finite(s.w) && std::isfinite(s.accum);
}
bool is_finite_state(const AccelState& s) {
  return is_finite(s.w) && is_finite(s.w_tilde) && std::isfinite(s.accum);
}

template <typename State, typename StepFn>
void drive(State state, long long T, StepFn&& step_fn, TrialRecord& rec,
           const Problem& problem, const RunOptions& opt) {
  const double inf = std::numeric_limits<double>::infinity();
  double sum_sq = 0.0;
  double sum_norm = 0.0;
  for (long long t = 1; t <= T; ++t) {
    auto res = step_fn(state);
    double gsq;
    if (!is_finite(res.eval_point)) {
      gsq = inf;
    } else {
      gsq = norm_sq(problem.empirical_grad(res.eval_point));
    }
    sum_sq += gsq;
    sum_norm += std::sqrt(gsq);
    bool state_ok = std::isfinite(gsq) && is_finite_state(res.state);
    bool record = t == 1 || t == T || (opt.record_every > 0 && t % opt.record_every == 0) ||
                  !state_ok;
    if (record) {
      TrajectorySample sample;
      sample.t = t;
      sample.grad_norm_sq = gsq;
      sample.loss = std::isfinite(gsq) ? problem.empirical_loss(res.eval_point) : inf;
      sample.stepsize = res.stepsize;
      sample.clip_active = res.clip_active;
      rec.samples.push_back(sample);
      if (opt.keep_points) rec.recorded_points.push_back(res.eval_point);
    }
    if (!state_ok) {
      rec.diverged = true;
      break;
    }
    state = std::move(res.state);
  }
  if (rec.diverged) {
    rec.avg_sq = inf;
    rec.avg_norm = inf;
  } else {
    rec.avg_sq = sum_sq / static_cast<double>(T);
    rec.avg_norm = sum_norm / static_cast<double>(T);
  }
}

}  // namespace

TrialRecord run(const Problem& problem, const Schedule& schedule, long long T,
                std::uint64_t seed, std::uint64_t stream, const RunOptions& options) {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  schedule.validate();
  auto t0 = std::chrono::steady_clock::now();

  TrialRecord rec;
  rec.algorithm = schedule.algorithm;
  rec.schedule = schedule;
  rec.seed = seed;
  rec.stream = stream;
  rec.T = T;
  rec.record_every = options.record_every;

  RngStream rng(seed, stream);
  const std::size_t d = static_cast<std::size_t>(problem.dim());
  const Vec zero(d, 0.0);

  switch (schedule.algorithm) {
    case Algorithm::sgd:
      drive(SgdState{zero, 1}, T,
            [&](const SgdState& s) { return sgd_step(s, problem, schedule.eta, rng); },
            rec, problem, options);
      break;
    case Algorithm::sgd_clipped:
      drive(SgdState{zero, 1}, T,
            [&](const SgdState& s) {
              return sgd_clipped_step(s, problem, schedule.eta, schedule.tau, rng);
            },
            rec, problem, options);
      break;
    case Algorithm::sgdm_clipped:
      drive(SgdmState{zero, zero, 1}, T,
            [&](const SgdmState& s) {
              return sgdm_clipped_step(s, problem, schedule.eta, schedule.tau1,
                                       schedule.tau2, schedule.gamma, rng);
            },
            rec, problem, options);
      break;
    case Algorithm::adagrad_norm:
      drive(AdagradState{zero, schedule.g0 * schedule.g0, 1}, T,
            [&](const AdagradState& s) { return adagrad_step(s, problem, rng); }, rec,
            problem, options);
      break;
    case Algorithm::adagrad_clipped:
      drive(AdagradState{zero, schedule.g0 * schedule.g0, 1}, T,
            [&](const AdagradState& s) {
              return adagrad_clipped_step(s, problem, schedule.tau, rng);
            },
            rec, problem, options);
      break;
    case Algorithm::accel_adagrad:
    case Algorithm::accel_rsag: {
      AccelMode mode = schedule.algorithm == Algorithm::accel_rsag ? AccelMode::rsag
                                                                   : AccelMode::adagrad;
      drive(AccelState{zero, zero, schedule.g0 * schedule.g0, 1}, T,
            [&](const AccelState& s) {
              return accel_clipped_step(s, problem, schedule.tau, mode, rng);
            },
            rec, problem, options);
      break;
    }
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace heavytail
