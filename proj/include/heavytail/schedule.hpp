#ifndef HEAVYTAIL_SCHEDULE_HPP
#define HEAVYTAIL_SCHEDULE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heavytail {

enum class Algorithm {
  sgd,             // unclipped baseline
  sgd_clipped,
  sgdm_clipped,
  adagrad_norm,    // unclipped baseline
  adagrad_clipped,
  accel_adagrad,
  accel_rsag,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
bool is_adaptive(Algorithm a);

enum class Measure { sq_norm, norm };

// Constraint violations are hard errors, never clamps: a silently shrunk
// parameter would invalidate rate-fit experiments.
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved hyperparameters for one algorithm at one horizon T.
struct Schedule {
  Algorithm algorithm = Algorithm::sgd_clipped;
  long long T = 0;
  double alpha = 2.0;
  double eta = 0.0;    // sgd / sgdm step size
  double tau = 0.0;    // single clipping threshold (sgd / adaptive)
  double tau1 = 0.0;   // sgdm gradient clip
  double tau2 = 0.0;   // sgdm momentum clip
  double gamma = 0.0;  // sgdm momentum parameter
  double g0 = 0.0;     // adaptive accumulator seed
  double p = 1.0, q = 1.0, s = 1.0, r = 1.0;

  // Re-checks every stated precondition; throws ScheduleError naming the
  // violated constraint.
  void validate() const;
};

// eta = p T^(-alpha/(3a-2)), tau = q T^(1/(3a-2)); requires
// q <= T^((2a-2)/(a(3a-2))) and eta <= 1/(12 L).
Schedule schedule_sgd(long long T, double alpha, double p, double q, double L);

// Default p = min(1, T^(alpha/(3a-2)) / (12 L)) so the step-size precondition
// binds transparently.
double default_sgd_p(long long T, double alpha, double L);

// tau1 = p G/(1-gamma)^(1/alpha), 1-gamma = s T^(-alpha/(3a-2)),
// eta = q T^(-alpha/(3a-2)), tau2 = r T^(-(alpha-1)/(3a-2)); requires 1-gamma <= 1.
Schedule schedule_sgdm(long long T, double alpha, double p, double s, double q, double r,
                       double G);

// tau = p T^(1/(3a-2)) with p <= T^((2a-2)/(a(3a-2))); accumulator seed G0.
Schedule schedule_adaptive(long long T, double alpha, double p, double g0,
                           Algorithm which);

// Plain unclipped baselines (tau unused).
Schedule schedule_sgd_plain(long long T, double alpha, double eta);
Schedule schedule_adagrad_plain(long long T, double alpha, double g0);

// sq_norm -> (2a-2)/(3a-2); norm -> (a-1)/(3a-2).
double rate_exponent(double alpha, Measure measure);

// The stationarity measure an algorithm's rate guarantee bounds.
Measure measure_for(Algorithm a);

enum class CouplingTarget { sgd_like, adagrad_like };

// T = round((n/d)^e) with e = (3a-2)/(4a-4) for SGD/SGDM and (3a-2)/(5a-4)
// for the adaptive algorithms; proportionality constant fixed at 1.
long long couple_T_to_n(long long n, long long d, double alpha, CouplingTarget target);

}  // namespace heavytail

#endif
