#include "heavytail/schedule.hpp"

#include <cmath>
#include <sstream>

namespace heavytail {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sgd: return "sgd";
    case Algorithm::sgd_clipped: return "sgd-clipped";
    case Algorithm::sgdm_clipped: return "sgdm-clipped";
    case Algorithm::adagrad_norm: return "adagrad";
    case Algorithm::adagrad_clipped: return "adagrad-clipped";
    case Algorithm::accel_adagrad: return "accel-adagrad";
    case Algorithm::accel_rsag: return "accel-rsag";
  }
  return "sgd";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sgd") return Algorithm::sgd;
  if (s == "sgd-clipped") return Algorithm::sgd_clipped;
  if (s == "sgdm-clipped") return Algorithm::sgdm_clipped;
  if (s == "adagrad") return Algorithm::adagrad_norm;
  if (s == "adagrad-clipped") return Algorithm::adagrad_clipped;
  if (s == "accel-adagrad") return Algorithm::accel_adagrad;
  if (s == "accel-rsag") return Algorithm::accel_rsag;
  throw std::invalid_argument("unknown algorithm: " + s);
}

bool is_adaptive(Algorithm a) {
  return a == Algorithm::adagrad_norm || a == Algorithm::adagrad_clipped ||
         a == Algorithm::accel_adagrad || a == Algorithm::accel_rsag;
}

Measure measure_for(Algorithm a) {
  return a == Algorithm::sgdm_clipped ? Measure::norm : Measure::sq_norm;
}

namespace {

void check_common(long long T, double alpha) {
  if (T < 1) throw ScheduleError("horizon T must be >= 1");
  if (!(alpha > 1.0) || !(alpha <= 2.0)) throw ScheduleError("alpha must lie in (1,2]");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void Schedule::validate() const {
  check_common(T, alpha);
  const double Td = static_cast<double>(T);
  switch (algorithm) {
    case Algorithm::sgd:
      if (!(eta > 0.0)) throw ScheduleError("sgd requires eta > 0");
      break;
    case Algorithm::sgd_clipped: {
      if (!(eta > 0.0) || !(tau > 0.0))
        throw ScheduleError("clipped sgd requires eta > 0 and tau > 0");
      double q_bound = std::pow(Td, (2.0 * alpha - 2.0) / (alpha * (3.0 * alpha - 2.0)));
      if (q > q_bound)
        throw ScheduleError("constraint q <= T^((2a-2)/(a(3a-2))) violated: q=" + fmt(q) +
                            ", bound=" + fmt(q_bound) + " at T=" + fmt(Td));
      break;
    }
    case Algorithm::sgdm_clipped: {
      if (!(eta > 0.0) || !(tau1 > 0.0) || !(tau2 > 0.0))
        throw ScheduleError("clipped sgdm requires eta, tau1, tau2 > 0");
      double one_minus_gamma = 1.0 - gamma;
      if (!(one_minus_gamma <= 1.0) || !(one_minus_gamma > 0.0))
        throw ScheduleError("constraint 1-gamma in (0,1] violated: 1-gamma=" +
                            fmt(one_minus_gamma));
      break;
    }
    case Algorithm::adagrad_norm:
      if (!(g0 > 0.0)) throw ScheduleError("adagrad requires G0 > 0");
      break;
    case Algorithm::adagrad_clipped:
    case Algorithm::accel_adagrad:
    case Algorithm::accel_rsag: {
      if (!(g0 > 0.0) || !(tau > 0.0))
        throw ScheduleError("clipped adaptive requires G0 > 0 and tau > 0");
      double p_bound = std::pow(Td, (2.0 * alpha - 2.0) / (alpha * (3.0 * alpha - 2.0)));
      if (p > p_bound)
        throw ScheduleError("constraint p <= T^((2a-2)/(a(3a-2))) violated: p=" + fmt(p) +
                            ", bound=" + fmt(p_bound) + " at T=" + fmt(Td));
      break;
    }
  }
}

double default_sgd_p(long long T, double alpha, double L) {
  check_common(T, alpha);
  double eta_exp = alpha / (3.0 * alpha - 2.0);
  // shaved by an ulp-scale margin so eta = p T^(-e) never rounds above 1/(12L)
  return std::min(1.0,
                  (1.0 - 1e-12) * std::pow(static_cast<double>(T), eta_exp) / (12.0 * L));
}

Schedule schedule_sgd(long long T, double alpha, double p, double q, double L) {
  check_common(T, alpha);
  if (!(p > 0.0) || !(q > 0.0)) throw ScheduleError("constants p, q must be positive");
  if (!(L > 0.0)) throw ScheduleError("smoothness constant L must be positive");
  const double Td = static_cast<double>(T);
  Schedule sch;
  sch.algorithm = Algorithm::sgd_clipped;
  sch.T = T;
  sch.alpha = alpha;
  sch.p = p;
  sch.q = q;
  sch.eta = p * std::pow(Td, -alpha / (3.0 * alpha - 2.0));
  sch.tau = q * std::pow(Td, 1.0 / (3.0 * alpha - 2.0));
  double eta_bound = 1.0 / (12.0 * L);
  if (sch.eta > eta_bound)
    throw ScheduleError("constraint eta <= 1/(12 L) violated: eta=" + fmt(sch.eta) +
                        ", bound=" + fmt(eta_bound) + " at T=" + fmt(Td));
  sch.validate();
  return sch;
}

Schedule schedule_sgdm(long long T, double alpha, double p, double s, double q, double r,
                       double G) {
  check_common(T, alpha);
  if (!(p > 0.0) || !(s > 0.0) || !(q > 0.0) || !(r > 0.0))
    throw ScheduleError("constants p, s, q, r must be positive");
  if (!(G > 0.0)) throw ScheduleError("moment constant G must be positive");
  const double Td = static_cast<double>(T);
  double decay = std::pow(Td, -alpha / (3.0 * alpha - 2.0));
  double one_minus_gamma = s * decay;
  if (one_minus_gamma > 1.0)
    throw ScheduleError("constraint 1-gamma <= 1 violated: 1-gamma=" +
                        fmt(one_minus_gamma) + " at T=" + fmt(Td));
  Schedule sch;
  sch.algorithm = Algorithm::sgdm_clipped;
  sch.T = T;
  sch.alpha = alpha;
  sch.p = p;
  sch.s = s;
  sch.q = q;
  sch.r = r;
  sch.gamma = 1.0 - one_minus_gamma;
  sch.eta = q * decay;
  sch.tau1 = p * G / std::pow(one_minus_gamma, 1.0 / alpha);
  sch.tau2 = r * std::pow(Td, -(alpha - 1.0) / (3.0 * alpha - 2.0));
  sch.validate();
  return sch;
}

Schedule schedule_adaptive(long long T, double alpha, double p, double g0,
                           Algorithm which) {
  check_common(T, alpha);
  if (!is_adaptive(which) || which == Algorithm::adagrad_norm)
    throw ScheduleError("adaptive schedule requires a clipped adaptive algorithm");
  if (!(p > 0.0)) throw ScheduleError("constant p must be positive");
  if (!(g0 > 0.0)) throw ScheduleError("G0 must be positive");
  Schedule sch;
  sch.algorithm = which;
  sch.T = T;
  sch.alpha = alpha;
  sch.p = p;
  sch.g0 = g0;
  sch.tau = p * std::pow(static_cast<double>(T), 1.0 / (3.0 * alpha - 2.0));
  sch.validate();
  return sch;
}

Schedule schedule_sgd_plain(long long T, double alpha, double eta) {
  check_common(T, alpha);
  if (!(eta > 0.0)) throw ScheduleError("sgd requires eta > 0");
  Schedule sch;
  sch.algorithm = Algorithm::sgd;
  sch.T = T;
  sch.alpha = alpha;
  sch.eta = eta;
  return sch;
}

Schedule schedule_adagrad_plain(long long T, double alpha, double g0) {
  check_common(T, alpha);
  if (!(g0 > 0.0)) throw ScheduleError("adagrad requires G0 > 0");
  Schedule sch;
  sch.algorithm = Algorithm::adagrad_norm;
  sch.T = T;
  sch.alpha = alpha;
  sch.g0 = g0;
  return sch;
}

double rate_exponent(double alpha, Measure measure) {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (1,2]");
  double denom = 3.0 * alpha - 2.0;
  return measure == Measure::sq_norm ? (2.0 * alpha - 2.0) / denom
                                     : (alpha - 1.0) / denom;
}

long long couple_T_to_n(long long n, long long d, double alpha, CouplingTarget target) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (n <= d) throw std::invalid_argument("coupling requires n > d");
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (1,2]");
  double num = 3.0 * alpha - 2.0;
  double denom = target == CouplingTarget::sgd_like ? 4.0 * alpha - 4.0
                                                    : 5.0 * alpha - 4.0;
  double ratio = static_cast<double>(n) / static_cast<double>(d);
  long long T = std::llround(std::pow(ratio, num / denom));
  return std::max<long long>(1, T);
}

}  // namespace heavytail
