#pragma once

#include <span>
#include <vector>

#include "pong/common.hpp"

// Exact-in-the-limit mass of an axis-aligned diagonal Gaussian over a simple
// planar polygon. Green's theorem turns the area integral into one erf-times-
// exponential line integral per edge, evaluated with fixed Gauss-Legendre
// nodes; the whole scheme is then differentiable in the vertex coordinates
// and the Gaussian parameters by differentiating under the quadrature sum.

namespace pong {

/// erf to within 1e-13 absolute for |x| <= 6, exactly odd, returning +-1
/// beyond. Series for small arguments, a continued fraction for the
/// complementary function elsewhere; no libm erf so results do not depend
/// on the platform's math library.
double erf(double x);

/// d/dx erf(x) = 2/sqrt(pi) exp(-x^2).
double erf_derivative(double x);

struct PlanarGaussian {
  Vec2 mean = Vec2::Zero();
  double sigma1 = 1.0;
  double sigma2 = 1.0;
};

struct QuadratureConfig {
  int nodes_per_edge = 20;  // >= 2
};

struct GlNodes {
  std::vector<double> r;  // nodes on [0,1]
  std::vector<double> w;  // weights summing to 1
};

/// Cached Gauss-Legendre rule of the given order on [0,1]. Thread-safe.
const GlNodes& gauss_legendre_01(int order);

struct PolygonProbability {
  double probability = 0.0;  // clamped to [0,1]
  double raw = 0.0;          // pre-clamp quadrature value
  bool degenerate = false;   // fewer than 3 distinct vertices
  bool clamp_warning = false;  // raw escaped [0,1] by more than 1e-9
};

/// Mass of `g` over the CCW polygon. Throws DomainError on CW input
/// (negative signed area beyond roundoff) or nonpositive sigmas.
PolygonProbability polygon_probability(const PlanarGaussian& g,
                                       std::span<const Vec2> vertices,
                                       const QuadratureConfig& cfg = {});

struct PolygonProbabilityGrad {
  PolygonProbability value;
  std::vector<Vec2> d_vertices;  // dP/d(vertex m)
  double d_sigma1 = 0.0;
  double d_sigma2 = 0.0;
  Vec2 d_mean = Vec2::Zero();
};

/// Same quadrature, differentiated term by term at fixed nodes.
PolygonProbabilityGrad polygon_probability_grad(const PlanarGaussian& g,
                                                std::span<const Vec2> vertices,
                                                const QuadratureConfig& cfg = {});

}  // namespace pong
