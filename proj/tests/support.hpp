#pragma once

// Shared helpers for the test suite. Oracles here must stay independent of
// the library code paths they are used to check.

#include <cmath>
#include <span>
#include <vector>

#include <pong/common.hpp>
#include <pong/rng.hpp>

namespace pong::testsupport {

/// Sequential draws from one CounterRng substream.
class SeqRng {
 public:
  SeqRng(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double uniform() { return rng_.uniform(k_++); }
  double normal() { return rng_.normal(k_++); }
  std::uint64_t below(std::uint64_t n) { return rng_.uniform_below(k_++, n); }

 private:
  CounterRng rng_;
  std::uint64_t k_ = 0;
};

/// Even-odd crossing test; works for any simple polygon.
inline bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
  bool inside = false;
  const std::size_t M = poly.size();
  for (std::size_t i = 0, j = M - 1; i < M; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

/// Product of one-dimensional normal CDF differences, in long double and
/// through libm's erfl: an implementation-independent rectangle mass.
inline double rectangle_mass_oracle(double ax, double bx, double ay, double by,
                                    double mx, double my, double sx, double sy) {
  const long double rt2 = 1.41421356237309504880168872420969808L;
  auto phi = [&](long double z) { return 0.5L * (1.0L + erfl(z / rt2)); };
  const long double px =
      phi((static_cast<long double>(bx) - mx) / sx) - phi((static_cast<long double>(ax) - mx) / sx);
  const long double py =
      phi((static_cast<long double>(by) - my) / sy) - phi((static_cast<long double>(ay) - my) / sy);
  return static_cast<double>(px * py);
}

/// Random star-shaped CCW polygon around the origin.
inline std::vector<Vec2> random_star_polygon(const CounterRng& rng,
                                             std::uint64_t& k, int n_vertices,
                                             double r_min, double r_max) {
  std::vector<Vec2> poly(n_vertices);
  for (int i = 0; i < n_vertices; ++i) {
    const double jitter = (rng.uniform(k++) - 0.5) * 0.8 * (2.0 * M_PI / n_vertices);
    const double ang = 2.0 * M_PI * i / n_vertices + jitter;
    const double rad = r_min + (r_max - r_min) * rng.uniform(k++);
    poly[i] = rad * Vec2(std::cos(ang), std::sin(ang));
  }
  return poly;
}

struct McMass {
  double p_hat;
  double std_err;
};

/// Monte Carlo mass of a diagonal Gaussian over a polygon.
inline McMass mc_polygon_mass(std::span<const Vec2> poly, const Vec2& mean,
                              double s1, double s2, long n, std::uint64_t seed) {
  CounterRng rng(seed, 17);
  long hits = 0;
  for (long i = 0; i < n; ++i) {
    const auto z = rng.normal_pair(static_cast<std::uint64_t>(i));
    const Vec2 p(mean.x() + s1 * z[0], mean.y() + s2 * z[1]);
    if (point_in_polygon(p, poly)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace pong::testsupport
