#ifndef HEAVYTAIL_VEC_HPP
#define HEAVYTAIL_VEC_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace heavytail {

// Dense double-precision parameter/gradient vector. Norms use a naive sum of
// squares; dimensions stay small enough that overflow is not a concern.
using Vec = std::vector<double>;

inline bool is_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void check_same_dim(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector dimension mismatch");
}

inline double dot(const Vec& a, const Vec& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

inline Vec add(const Vec& a, const Vec& b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vec sub(const Vec& a, const Vec& b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec scale(double c, const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i];
  return out;
}

// y += a * x
inline void axpy_inplace(Vec& y, double a, const Vec& x) {
  check_same_dim(y, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Rescale v to norm min(tau, ||v||), direction preserved. The zero vector is
// a fixed point (the continuous extension of v * min(tau,||v||)/||v||).
// When ||v|| <= tau the input is returned unchanged, so repeated application
// is bit-stable; after a rescale we re-normalize until the computed norm is
// <= tau, which makes clip(clip(v)) == clip(v) exact despite rounding.
inline Vec clip(const Vec& v, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("clip requires tau > 0");
  if (!is_finite(v)) throw std::invalid_argument("clip requires finite input");
  double n = norm(v);
  if (n <= tau) return v;
  Vec out = scale(tau / n, v);
  double m = norm(out);
  while (m > tau) {
    out = scale(tau / m, out);
    m = norm(out);
  }
  return out;
}

// Monte-Carlo estimate of E||g||^alpha: (1/N) sum ||g_i||^alpha.
inline double estimate_alpha_moment(const std::vector<Vec>& samples, double alpha) {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (1,2]");
  if (samples.empty()) throw std::invalid_argument("estimate_alpha_moment: no samples");
  double s = 0.0;
  for (const Vec& g : samples) s += std::pow(norm(g), alpha);
  return s / static_cast<double>(samples.size());
}

}  // namespace heavytail

#endif
