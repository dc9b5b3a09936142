#include "pong/gausspoly.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace pong {

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589;  // 2/sqrt(pi)
constexpr double kSqrtPi = 1.7724538509055160272981675;
constexpr double kSqrt2 = 1.4142135623730950488016887;
constexpr double kSqrt8Pi = 5.0132565492620005079294338;  // sqrt(8*pi)

double erf_series(double x) {
  // erf(x) = 2/sqrt(pi) * sum over n of (-1)^n x^(2n+1) / (n! (2n+1)).
  const double x2 = x * x;
  double term = x;  // x^(2n+1)/n!
  double sum = x;
  for (int n = 1; n < 80; ++n) {
    term *= -x2 / n;
    const double inc = term / (2 * n + 1);
    sum += inc;
    if (std::abs(inc) < 1e-18 * std::abs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

double erfc_cf(double x) {
  // Q(1/2, x^2) via the Legendre continued fraction (modified Lentz).
  const double a = 0.5;
  const double x2 = x * x;
  const double fpmin = 1e-300;
  double b = x2 + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 300; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-17) break;
  }
  return std::exp(-x2) * x / kSqrtPi * h;
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double v;
  if (ax <= 2.5) {
    v = erf_series(ax);
  } else if (ax <= 6.0) {
    v = 1.0 - erfc_cf(ax);
  } else {
    v = 1.0;
  }
  return x < 0.0 ? -v : v;
}

double erf_derivative(double x) { return kTwoOverSqrtPi * std::exp(-x * x); }

const GlNodes& gauss_legendre_01(int order) {
  if (order < 2) throw InputError("gauss_legendre_01: order must be >= 2");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GlNodes>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return *it->second;

  auto nodes = std::make_unique<GlNodes>();
  nodes->r.resize(order);
  nodes->w.resize(order);
  const int n = order;
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    // Map [-1,1] -> [0,1]; the symmetric partner comes along for free.
    nodes->r[k] = 0.5 * (1.0 - x);
    nodes->w[k] = 0.5 * w;
    nodes->r[n - 1 - k] = 0.5 * (1.0 + x);
    nodes->w[n - 1 - k] = 0.5 * w;
  }
  const GlNodes& ref = *nodes;
  cache[order] = std::move(nodes);
  return ref;
}

namespace {

int count_distinct(std::span<const Vec2> v) {
  int distinct = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (v[i].x() == v[j].x() && v[i].y() == v[j].y()) {
        seen = true;
        break;
      }
    }
    if (!seen) ++distinct;
  }
  return distinct;
}

void check_inputs(const PlanarGaussian& g, std::span<const Vec2> v) {
  if (!(g.sigma1 > 0.0) || !(g.sigma2 > 0.0))
    throw DomainError("polygon_probability: sigmas must be positive");
  double area2 = 0.0;
  double scale2 = 0.0;
  const std::size_t M = v.size();
  for (std::size_t m = 0; m < M; ++m) {
    const Vec2& a = v[m];
    const Vec2& b = v[(m + 1) % M];
    area2 += a.x() * b.y() - b.x() * a.y();
    scale2 = std::max(scale2, a.squaredNorm());
  }
  if (area2 < -1e-12 * std::max(scale2, 1.0))
    throw DomainError("polygon_probability: vertices must be CCW");
}

}  // namespace

PolygonProbability polygon_probability(const PlanarGaussian& g,
                                       std::span<const Vec2> vertices,
                                       const QuadratureConfig& cfg) {
  check_inputs(g, vertices);
  PolygonProbability out;
  if (count_distinct(vertices) < 3) {
    out.degenerate = true;
    return out;
  }
  const GlNodes& gl = gauss_legendre_01(cfg.nodes_per_edge);
  const std::size_t M = vertices.size();
  const double inv_s1 = 1.0 / (g.sigma1 * kSqrt2);
  const double inv_s2sq = 1.0 / (g.sigma2 * g.sigma2);
  const double C = 1.0 / (g.sigma2 * kSqrt8Pi);
  // Expressions below mirror polygon_probability_grad term for term so the
  // two entry points agree bit for bit.
  double acc = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const Vec2& a = vertices[m];
    const Vec2& b = vertices[(m + 1) % M];
    const double D = b.y() - a.y();
    if (D == 0.0) continue;
    double edge = 0.0;
    for (std::size_t q = 0; q < gl.r.size(); ++q) {
      const double r = gl.r[q];
      const double y1 = (1.0 - r) * a.x() + r * b.x();
      const double y2 = (1.0 - r) * a.y() + r * b.y();
      const double dy2 = y2 - g.mean.y();
      const double A = std::exp(-0.5 * dy2 * dy2 * inv_s2sq);
      const double B = erf((y1 - g.mean.x()) * inv_s1);
      edge += gl.w[q] * A * B;
    }
    acc += D * edge;
  }
  out.raw = C * acc;
  out.probability = std::min(1.0, std::max(0.0, out.raw));
  out.clamp_warning = out.raw < -1e-9 || out.raw > 1.0 + 1e-9;
  return out;
}

PolygonProbabilityGrad polygon_probability_grad(const PlanarGaussian& g,
                                                std::span<const Vec2> vertices,
                                                const QuadratureConfig& cfg) {
  check_inputs(g, vertices);
  PolygonProbabilityGrad out;
  out.d_vertices.assign(vertices.size(), Vec2::Zero());
  if (count_distinct(vertices) < 3) {
    out.value.degenerate = true;
    return out;
  }
  const GlNodes& gl = gauss_legendre_01(cfg.nodes_per_edge);
  const std::size_t M = vertices.size();
  const double s1 = g.sigma1;
  const double s2 = g.sigma2;
  const double inv_s1 = 1.0 / (s1 * kSqrt2);
  const double inv_s2sq = 1.0 / (s2 * s2);
  const double C = 1.0 / (s2 * kSqrt8Pi);

  double acc = 0.0;        // sum of D * I_m before the prefactor
  double acc_dsigma2 = 0.0;  // d(acc)/d(sigma2) at fixed prefactor
  double acc_dsigma1 = 0.0;

  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t mn = (m + 1) % M;
    const Vec2& a = vertices[m];
    const Vec2& b = vertices[mn];
    const double D = b.y() - a.y();
    double I = 0.0;        // integral of A*B
    double I_a1 = 0.0;     // d/d a.x of integral
    double I_b1 = 0.0;
    double I_a2 = 0.0;     // d/d a.y of integral
    double I_b2 = 0.0;
    double I_s1 = 0.0;
    double I_s2 = 0.0;
    for (std::size_t q = 0; q < gl.r.size(); ++q) {
      const double r = gl.r[q];
      const double wq = gl.w[q];
      const double om = 1.0 - r;
      const double y1 = om * a.x() + r * b.x();
      const double y2 = om * a.y() + r * b.y();
      const double dy1 = y1 - g.mean.x();
      const double dy2 = y2 - g.mean.y();
      const double u = dy1 * inv_s1;
      const double A = std::exp(-0.5 * dy2 * dy2 * inv_s2sq);
      const double B = erf(u);
      const double dB_dy1 = erf_derivative(u) * inv_s1;
      const double dA_dy2 = A * (-dy2 * inv_s2sq);
      I += wq * A * B;
      I_a1 += wq * A * dB_dy1 * om;
      I_b1 += wq * A * dB_dy1 * r;
      I_a2 += wq * dA_dy2 * B * om;
      I_b2 += wq * dA_dy2 * B * r;
      // u depends on sigma1 as -u/s1; the exponent on sigma2 as +dy2^2/s2^3.
      I_s1 += wq * A * erf_derivative(u) * (-u / s1);
      I_s2 += wq * dy2 * dy2 * inv_s2sq / s2 * A * B;
    }
    acc += D * I;
    acc_dsigma1 += D * I_s1;
    acc_dsigma2 += D * I_s2;
    out.d_vertices[m].x() += C * D * I_a1;
    out.d_vertices[mn].x() += C * D * I_b1;
    out.d_vertices[m].y() += C * (D * I_a2 - I);
    out.d_vertices[mn].y() += C * (D * I_b2 + I);
  }
  out.value.raw = C * acc;
  out.value.probability = std::min(1.0, std::max(0.0, out.value.raw));
  out.value.clamp_warning =
      out.value.raw < -1e-9 || out.value.raw > 1.0 + 1e-9;
  out.d_sigma1 = C * acc_dsigma1;
  out.d_sigma2 = C * acc_dsigma2 - out.value.raw / s2;
  // Shifting the mean is the same as shifting every vertex the other way.
  for (const Vec2& dv : out.d_vertices) out.d_mean -= dv;
  return out;
}

}  // namespace pong
