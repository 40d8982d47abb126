#ifndef HEAVYTAIL_RNG_HPP
#define HEAVYTAIL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace heavytail {

// Counter-based stream: draw i is a pure function of (seed, stream_id, i),
// so distinct trials get independent streams regardless of worker count or
// scheduling order, and any stream can be replayed by reconstructing it.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_(stream_id),
        key_(mix64(seed + 0x9e3779b97f4a7c15ULL * mix64(stream_id + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64() { return mix64(key_ + ++counter_ * 0x9e3779b97f4a7c15ULL); }

  // [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1], for inverse-CDF draws that must avoid 0
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // unbiased up to n/2^64; widening multiply keeps it branch-free and portable
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller; pairs of slots share a uniform pair, odd tail discards the
  // sine branch. All normal consumption goes through here so draw counts are
  // identical across call sites.
  void fill_normal(double* out, std::size_t count) {
    std::size_t i = 0;
    while (i + 1 < count) {
      double u1 = next_unit_open();
      double u2 = next_unit();
      double radius = std::sqrt(-2.0 * std::log(u1));
      double angle = 2.0 * pi() * u2;
      out[i++] = radius * std::cos(angle);
      out[i++] = radius * std::sin(angle);
    }
    if (i < count) {
      double u1 = next_unit_open();
      double u2 = next_unit();
      out[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi() * u2);
    }
  }

  double next_normal() {
    double z;
    fill_normal(&z, 1);
    return z;
  }

  // inverse CDF: scale * U^(-1/shape), support [scale, inf)
  double next_pareto(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("pareto draw requires shape > 0 and scale > 0");
    return scale * std::pow(next_unit_open(), -1.0 / shape);
  }

  void fill_unit_sphere(std::vector<double>& out) {
    fill_normal(out.data(), out.size());
    double sq = 0.0;
    for (double v : out) sq += v * v;
    double n = std::sqrt(sq);
    if (n == 0.0) {  // measure-zero; pick a fixed direction
      for (auto& v : out) v = 0.0;
      if (!out.empty()) out[0] = 1.0;
      return;
    }
    for (auto& v : out) v /= n;
  }

 private:
  static constexpr double pi() { return 3.141592653589793238462643383279502884; }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace heavytail

#endif
