#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <pong/gausspoly.hpp>
#include <pong/rng.hpp>

#include "support.hpp"

using namespace pong;
using namespace pong::testsupport;

namespace {

std::vector<Vec2> rect_ccw(double ax, double bx, double ay, double by) {
  return {{ax, ay}, {bx, ay}, {bx, by}, {ax, by}};
}

// erf references computed with 40-digit arithmetic, frozen.
struct ErfRef {
  double x;
  double value;
};
constexpr ErfRef kErfTable[] = {
    {0.25, 0.2763263901682369329851},  {0.5, 0.5204998778130465376827},
    {1.0, 0.8427007929497148693412},   {1.5, 0.966105146475310727067},
    {2.5, 0.9995930479825550410604},   {3.0, 0.9999779095030014145586},
    {4.5, 0.9999999998033839558457},   {6.0, 0.9999999999999999784803},
};

}  // namespace

TEST_CASE("erf matches frozen references and is exactly odd") {
  for (const auto& ref : kErfTable) {
    CHECK(std::abs(pong::erf(ref.x) - ref.value) <= 1e-14);
    CHECK(pong::erf(-ref.x) == -pong::erf(ref.x));
  }
  CHECK(pong::erf(0.0) == 0.0);
  CHECK(pong::erf(6.5) == 1.0);
  CHECK(pong::erf(-12.0) == -1.0);
}

TEST_CASE("erf tracks the long-double libm implementation on a dense grid") {
  for (int i = 0; i <= 2400; ++i) {
    const double x = -6.0 + i * 0.005;
    const double want = static_cast<double>(erfl(static_cast<long double>(x)));
    CHECK(std::abs(pong::erf(x) - want) <= 1e-13);
  }
}

TEST_CASE("gauss-legendre rule integrates monomials to machine precision") {
  const auto& gl = gauss_legendre_01(20);
  REQUIRE(gl.r.size() == 20);
  double wsum = 0.0;
  for (double w : gl.w) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
  for (int k = 0; k <= 39; ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < gl.r.size(); ++q) s += gl.w[q] * std::pow(gl.r[q], k);
    CHECK(std::abs(s - 1.0 / (k + 1)) <= 1e-14);
  }
  CHECK_THROWS_AS(gauss_legendre_01(1), InputError);
}

TEST_CASE("unit square, standard normal: frozen oracle value") {
  PlanarGaussian g{Vec2::Zero(), 1.0, 1.0};
  const auto poly = rect_ccw(0.0, 1.0, 0.0, 1.0);
  const auto out = polygon_probability(g, poly);
  CHECK(std::abs(out.probability - 0.1165162356685980667545) <= 1e-12);
  CHECK(!out.degenerate);
  CHECK(!out.clamp_warning);
}

TEST_CASE("anisotropic shifted rectangle: frozen oracle value") {
  PlanarGaussian g{Vec2(0.1, -0.3), 0.8, 1.3};
  const auto poly = rect_ccw(0.3, 1.7, -0.2, 0.9);
  const auto out = polygon_probability(g, poly);
  CHECK(std::abs(out.probability - 0.1102919959380485135104) <= 1e-12);
}

TEST_CASE("right triangle with a diagonal edge: frozen oracle value") {
  PlanarGaussian g{Vec2::Zero(), 1.0, 1.0};
  const std::vector<Vec2> tri = {{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}};
  const auto out = polygon_probability(g, tri);
  CHECK(std::abs(out.probability - 0.1775361566095195525095) <= 1e-10);
}

TEST_CASE("50 random rectangles against the product-CDF oracle") {
  CounterRng rng(101u, 3u);
  std::uint64_t k = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double sx = 0.3 + 1.7 * rng.uniform(k++);
    const double sy = 0.3 + 1.7 * rng.uniform(k++);
    const double mx = 2.0 * rng.uniform(k++) - 1.0;
    const double my = 2.0 * rng.uniform(k++) - 1.0;
    const double cx = mx + sx * (2.0 * rng.uniform(k++) - 1.0);
    const double cy = my + sy * (2.0 * rng.uniform(k++) - 1.0);
    const double wx = sx * (0.5 + 2.5 * rng.uniform(k++));
    const double wy = sy * (0.5 + 2.5 * rng.uniform(k++));
    const double want = rectangle_mass_oracle(cx - wx, cx + wx, cy - wy, cy + wy,
                                              mx, my, sx, sy);
    PlanarGaussian g{Vec2(mx, my), sx, sy};
    const auto poly = rect_ccw(cx - wx, cx + wx, cy - wy, cy + wy);
    const auto out = polygon_probability(g, poly);
    CHECK(std::abs(out.probability - want) <= 1e-8 * std::max(want, 1e-12));
  }
}

TEST_CASE("monte carlo cross-check on a nonconvex polygon") {
  // An arrowhead: simple but not convex.
  const std::vector<Vec2> poly = {
      {-1.5, -1.0}, {0.0, -0.2}, {1.5, -1.0}, {0.6, 1.2}, {-0.6, 1.2}};
  PlanarGaussian g{Vec2(0.1, 0.2), 0.9, 1.1};
  const auto quad = polygon_probability(g, poly);
  const auto mc = mc_polygon_mass(poly, g.mean, g.sigma1, g.sigma2, 200000, 999);
  CHECK(std::abs(quad.probability - mc.p_hat) <= 4.0 * mc.std_err);
}

TEST_CASE("translation covariance") {
  CounterRng rng(77u, 4u);
  std::uint64_t k = 0;
  auto poly = random_star_polygon(rng, k, 7, 0.5, 2.0);
  PlanarGaussian g{Vec2(0.3, -0.2), 0.7, 1.4};
  const double base = polygon_probability(g, poly).probability;
  const Vec2 t(1.7, -0.4);
  std::vector<Vec2> shifted = poly;
  for (auto& v : shifted) v += t;
  PlanarGaussian gs{g.mean + t, g.sigma1, g.sigma2};
  const double moved = polygon_probability(gs, shifted).probability;
  CHECK(std::abs(base - moved) <= 1e-12);
}

TEST_CASE("near-total mass stays within [0,1] and close to one") {
  PlanarGaussian g{Vec2::Zero(), 1.0, 1.0};
  const auto poly = rect_ccw(-8.0, 8.0, -8.0, 8.0);
  const auto out = polygon_probability(g, poly, QuadratureConfig{40});
  CHECK(out.probability <= 1.0);
  CHECK(out.probability >= 1.0 - 1e-9);
  CHECK(!out.clamp_warning);
}

TEST_CASE("degenerate inputs") {
  PlanarGaussian g{Vec2::Zero(), 1.0, 1.0};
  const std::vector<Vec2> zeros = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  const auto out = polygon_probability(g, zeros);
  CHECK(out.degenerate);
  CHECK(out.probability == 0.0);

  const std::vector<Vec2> two = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  CHECK(polygon_probability(g, two).degenerate);

  auto cw = rect_ccw(0.0, 1.0, 0.0, 1.0);
  std::reverse(cw.begin(), cw.end());
  CHECK_THROWS_AS(polygon_probability(g, cw), DomainError);

  PlanarGaussian bad{Vec2::Zero(), 0.0, 1.0};
  CHECK_THROWS_AS(polygon_probability(bad, rect_ccw(0, 1, 0, 1)), DomainError);
}

TEST_CASE("quadrature gradient matches central differences") {
  CounterRng rng(55u, 5u);
  std::uint64_t k = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto poly = random_star_polygon(rng, k, 5 + static_cast<int>(rng.uniform_below(k++, 4)),
                                    0.4, 1.8);
    PlanarGaussian g{Vec2(0.1 * rng.normal(k++), 0.1 * rng.normal(k++)),
                     0.4 + rng.uniform(k++), 0.4 + rng.uniform(k++)};
    const auto grad = polygon_probability_grad(g, poly);
    const double h = 1e-6;
    auto value = [&](const PlanarGaussian& gg, const std::vector<Vec2>& pp) {
      return polygon_probability(gg, pp).raw;
    };
    for (std::size_t m = 0; m < poly.size(); ++m) {
      for (int c = 0; c < 2; ++c) {
        auto lo = poly, hi = poly;
        lo[m][c] -= h;
        hi[m][c] += h;
        const double fd = (value(g, hi) - value(g, lo)) / (2.0 * h);
        CHECK(std::abs(grad.d_vertices[m][c] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
    for (int c = 0; c < 2; ++c) {
      PlanarGaussian lo = g, hi = g;
      (c == 0 ? lo.sigma1 : lo.sigma2) -= h;
      (c == 0 ? hi.sigma1 : hi.sigma2) += h;
      const double fd = (value(hi, poly) - value(lo, poly)) / (2.0 * h);
      const double got = c == 0 ? grad.d_sigma1 : grad.d_sigma2;
      CHECK(std::abs(got - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
    for (int c = 0; c < 2; ++c) {
      PlanarGaussian lo = g, hi = g;
      lo.mean[c] -= h;
      hi.mean[c] += h;
      const double fd = (value(hi, poly) - value(lo, poly)) / (2.0 * h);
      CHECK(std::abs(grad.d_mean[c] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
    CHECK(grad.value.probability == polygon_probability(g, poly).probability);
  }
}
