#ifndef HEAVYTAIL_OPTIMIZER_HPP
#define HEAVYTAIL_OPTIMIZER_HPP

#include <cstdint>
#include <vector>

#include "heavytail/problem.hpp"
#include "heavytail/schedule.hpp"
#include "heavytail/vec.hpp"

namespace heavytail {

struct SgdState {
  Vec w;
  long long t = 1;
};

struct SgdmState {
  Vec w;
  Vec m;  // m_0 = 0
  long long t = 1;
};

struct AdagradState {
  Vec w;
  double accum = 1.0;  // G0^2 + running sum of squared clipped-gradient norms
  long long t = 1;
};

struct AccelState {
  Vec w;
  Vec w_tilde;
  double accum = 1.0;
  long long t = 1;
};

enum class AccelMode { adagrad, rsag };

// Every step function is pure: state in, state out. `stepsize` is the
// effective step applied to w, `clip_active` whether any clip rescaled, and
// `eval_point` the iterate the rate guarantees measure at this step (w_t for
// SGD/SGDM/AdaGrad, the interpolated point for the accelerated template).
template <typename State>
struct StepResult {
  State state;
  double stepsize = 0.0;
  bool clip_active = false;
  Vec eval_point;
};

StepResult<SgdState> sgd_step(const SgdState& s, const Problem& problem, double eta,
                              RngStream& rng);
StepResult<SgdState> sgd_clipped_step(const SgdState& s, const Problem& problem,
                                      double eta, double tau, RngStream& rng);
StepResult<SgdmState> sgdm_clipped_step(const SgdmState& s, const Problem& problem,
                                        double eta, double tau1, double tau2,
                                        double gamma, RngStream& rng);
StepResult<AdagradState> adagrad_step(const AdagradState& s, const Problem& problem,
                                      RngStream& rng);
StepResult<AdagradState> adagrad_clipped_step(const AdagradState& s,
                                              const Problem& problem, double tau,
                                              RngStream& rng);
StepResult<AccelState> accel_clipped_step(const AccelState& s, const Problem& problem,
                                          double tau, AccelMode mode, RngStream& rng);

struct TrajectorySample {
  long long t = 0;
  double grad_norm_sq = 0.0;  // exact full-batch ||grad F_S||^2 at the eval point
  double loss = 0.0;          // F_S at the eval point
  double stepsize = 0.0;
  bool clip_active = false;
};

struct TrialRecord {
  Algorithm algorithm = Algorithm::sgd_clipped;
  Schedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  long long T = 0;
  long long record_every = 1;
  std::vector<TrajectorySample> samples;
  std::vector<Vec> recorded_points;  // filled only when requested
  double avg_sq = 0.0;    // (1/T) sum ||grad F_S||^2 over all steps
  double avg_norm = 0.0;  // (1/T) sum ||grad F_S||
  bool diverged = false;
  double wall_seconds = 0.0;  // never serialized (outputs stay deterministic)
};

struct RunOptions {
  long long record_every = 1;      // trajectory sampling stride; t=1 and t=T always kept
  bool keep_points = false;        // also store the eval-point iterates
};

// Drives the schedule's algorithm for T steps from w_1 = 0 (m_0 = 0,
// w_tilde_1 = w_1), recording the exact full-batch stationarity metric at
// every step for the running averages. A non-finite iterate marks the trial
// diverged, halts it, and records the averages as +inf.
TrialRecord run(const Problem& problem, const Schedule& schedule, long long T,
                std::uint64_t seed, std::uint64_t stream, const RunOptions& options);

}  // namespace heavytail

#endif
