#include "pong/validate.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pong/bound.hpp"
#include "pong/gausspoly.hpp"
#include "pong/mcoracle.hpp"
#include "pong/rng.hpp"
#include "pong/synth.hpp"
#include "pong/vlp.hpp"
#include "pong/wrench.hpp"

namespace pong {

namespace {

// Every criterion draws from its own block of counter streams, so the
// checks are independent and the whole report is a pure function of the
// seed. Stream ids: criterion_id * 100000 + item (+ 50000 for a second
// consumer inside the same item).

/// Stateful convenience view over one counter stream.
class Draw {
 public:
  Draw(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double uniform() { return rng_.uniform(idx_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return rng_.uniform_below(idx_++, n); }
  double normal() {
    if (cached_) {
      cached_ = false;
      return second_;
    }
    const auto p = rng_.normal_pair(idx_++);
    second_ = p[1];
    cached_ = true;
    return p[0];
  }

 private:
  CounterRng rng_;
  std::uint64_t idx_ = 0;
  bool cached_ = false;
  double second_ = 0.0;
};

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

double normal_cdf(double x) { return 0.5 * (1.0 + pong::erf(x / std::sqrt(2.0))); }

std::vector<Vec2> rect_ccw(double ax, double bx, double ay, double by) {
  return {{ax, ay}, {bx, ay}, {bx, by}, {ax, by}};
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

Vec3 unit3(Draw& d) {
  for (;;) {
    const Vec3 v(d.normal(), d.normal(), d.normal());
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

ImplicitSurface random_surface(Draw& d, int kind) {
  switch (kind % 3) {
    case 0:
      return ImplicitSurface::make_sphere(Vec3::Zero(), d.uniform(0.5, 1.2));
    case 1:
      return ImplicitSurface::make_ellipsoid(
          Vec3::Zero(),
          Vec3(d.uniform(0.5, 1.3), d.uniform(0.5, 1.3), d.uniform(0.5, 1.3)));
    default:
      return ImplicitSurface::make_superquadric(
          Vec3::Zero(),
          Vec3(d.uniform(0.6, 1.1), d.uniform(0.6, 1.1), d.uniform(0.6, 1.1)),
          d.uniform(2.2, 4.0));
  }
}

/// Random contacts on a surface, frames from the shape operator, sigmas
/// optionally overridden with uniforms.
std::vector<ContactDistribution> surface_contacts(Draw& d, const ImplicitSurface& s,
                                                  int n_f, bool explicit_sigma,
                                                  double sigma_lo = 0.05,
                                                  double sigma_hi = 0.3) {
  std::vector<ContactDistribution> out;
  out.reserve(n_f);
  for (int i = 0; i < n_f; ++i) {
    const Vec3 x = ray_to_surface(s, unit3(d));
    ContactDistribution c = curvature_distribution(s, x, CurvatureParams{});
    if (explicit_sigma) {
      c.sigma1 = d.uniform(sigma_lo, sigma_hi);
      c.sigma2 = d.uniform(sigma_lo, sigma_hi);
    }
    out.push_back(c);
  }
  return out;
}

/// Rejection-sample a wrench model whose mean grasp is certified force
/// closure with a clear margin.
WrenchModel fc_model(Draw& d, bool explicit_sigma) {
  for (;;) {
    const ImplicitSurface s = random_surface(d, static_cast<int>(d.below(3)));
    const int n_f = 3 + static_cast<int>(d.below(2));
    const auto contacts = surface_contacts(d, s, n_f, explicit_sigma, 0.08, 0.25);
    const double mu = d.uniform(0.4, 0.8);
    WrenchModel m = build_wrench_model(contacts, mu, 4);
    const MinWeight mw = min_weight_metric(m.w_bar);
    if (mw.feasible && mw.l_bar_star > 1e-6) return m;
  }
}

/// Grasp description for the bound pipeline; want_fc selects rejection to a
/// mean-force-closure draw, otherwise the draw is kept as it came.
GraspSpec random_grasp(Draw& d, int kind, bool explicit_sigma, bool want_fc) {
  for (;;) {
    GraspSpec g;
    g.surface = random_surface(d, kind);
    g.mu = d.uniform(0.4, 0.8);
    g.n_sides = 4;
    const int n_f = 3 + static_cast<int>(d.below(2));
    const auto contacts = surface_contacts(d, *g.surface, n_f, explicit_sigma);
    for (const ContactDistribution& c : contacts) {
      ContactSpec cs;
      if (explicit_sigma) {
        cs.dist = c;
        cs.position = c.position;
      } else {
        cs.position = c.position;
      }
      g.contacts.push_back(cs);
    }
    if (!want_fc) return g;
    const MinWeight mw = min_weight_metric(build_wrench_model(g).w_bar);
    if (mw.feasible && mw.l_bar_star > 1e-6) return g;
  }
}

/// Contacts clustered in one spherical cap: every friction-compliant force
/// keeps a positive component along the cap axis, so the grasp cannot be
/// force closure for any mu <= 0.9.
GraspSpec clustered_grasp(Draw& d, std::optional<double> sigma) {
  GraspSpec g;
  g.surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  g.mu = 0.5;
  const Vec3 base = unit3(d);
  const Vec3 helper = std::abs(base.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = base.cross(helper).normalized();
  const Vec3 t2 = base.cross(t1);
  for (int i = 0; i < 3; ++i) {
    const double ang = 2.0 * M_PI * i / 3.0 + 0.3 * d.uniform();
    const Vec3 x =
        (base + 0.3 * (std::cos(ang) * t1 + std::sin(ang) * t2)).normalized();
    ContactSpec cs;
    if (sigma) {
      ContactDistribution c = curvature_distribution(*g.surface, x, CurvatureParams{});
      c.sigma1 = *sigma;
      c.sigma2 = *sigma;
      cs.dist = c;
      cs.position = c.position;
    } else {
      cs.position = x;
    }
    g.contacts.push_back(cs);
  }
  return g;
}

/// Regular tetrahedron contacts on the unit sphere: force closure with a
/// wide margin at mu = 0.5.
GraspSpec tetrahedral_grasp(double sigma) {
  GraspSpec g;
  g.surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  const double s = 1.0 / std::sqrt(3.0);
  for (const Vec3& p : {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s),
                        Vec3(-s, -s, s)}) {
    ContactDistribution c = curvature_distribution(*g.surface, p, CurvatureParams{});
    c.sigma1 = sigma;
    c.sigma2 = sigma;
    ContactSpec cs;
    cs.dist = c;
    cs.position = c.position;
    g.contacts.push_back(cs);
  }
  return g;
}

/// Uniform point strictly inside a star-shaped (about 0) CCW polygon via an
/// area-weighted fan of triangles (0, v_k, v_{k+1}).
Vec2 sample_in_polygon(Draw& d, const TangentPolygon& poly) {
  const auto& v = poly.vertices;
  const int n = static_cast<int>(v.size());
  std::vector<double> cum(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec2& a = v[k];
    const Vec2& b = v[(k + 1) % n];
    total += std::max(0.5 * (a.x() * b.y() - a.y() * b.x()), 0.0);
    cum[k] = total;
  }
  const double pick = d.uniform() * total;
  int k = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), pick) -
                           cum.begin());
  if (k >= n) k = n - 1;
  const Vec2& a = v[k];
  const Vec2& b = v[(k + 1) % n];
  const double r1 = std::sqrt(d.uniform());
  const double r2 = d.uniform();
  return 0.999 * (r1 * (1.0 - r2) * a + r1 * r2 * b);
}

/// Independent oracle for the step LP: one joint program over all edges
/// with a shared step variable, block-diagonal convex weights, and the same
/// cap row the edge-wise solver carries.
std::optional<double> joint_theta(const WrenchModel& m, int finger,
                                  const Vec2& dir, double cap) {
  const auto& c = m.contacts[finger];
  const Vec3 d3 = dir.x() * c.tangent1 + dir.y() * c.tangent2;
  const int n_w = m.n_wrenches();
  const int n_s = m.n_sides;

  LinearProgram lp;
  lp.eq_matrix = MatX::Zero(7 * n_s + 1, 2 + n_s * n_w);
  lp.eq_rhs = VecX::Zero(7 * n_s + 1);
  lp.objective = VecX::Zero(2 + n_s * n_w);
  lp.objective(0) = 1.0;
  for (int j = 0; j < n_s; ++j) {
    lp.eq_matrix.block(7 * j, 0, 6, 1) = m.t_maps[m.column(finger, j)] * d3;
    lp.eq_matrix.block(7 * j, 1 + j * n_w, 6, n_w) = m.w_bar;
    lp.eq_matrix.row(7 * j + 6).segment(1 + j * n_w, n_w).setOnes();
    lp.eq_rhs(7 * j + 6) = 1.0;
  }
  lp.eq_matrix(7 * n_s, 0) = 1.0;
  lp.eq_matrix(7 * n_s, 1 + n_s * n_w) = 1.0;
  lp.eq_rhs(7 * n_s) = cap;
  const LpSolution sol = solve(lp);
  if (sol.status != LpStatus::optimal) return std::nullopt;
  return sol.objective_value;
}

// ---------------------------------------------------------------------------

CriterionResult criterion_rectangles(std::uint64_t seed, bool quick, int) {
  CriterionResult c;
  c.id = 1;
  c.name = "rectangle mass equals the product of interval masses";
  const int n = quick ? 12 : 50;
  double max_rel = 0.0;
  int bad = 0;
  for (int t = 0; t < n; ++t) {
    Draw d(seed, 100000 + t);
    const double sx = d.uniform(0.3, 2.0);
    const double sy = d.uniform(0.3, 2.0);
    const double mx = d.uniform(-1.0, 1.0);
    const double my = d.uniform(-1.0, 1.0);
    const double cx = mx + sx * d.uniform(-1.0, 1.0);
    const double cy = my + sy * d.uniform(-1.0, 1.0);
    const double wx = sx * d.uniform(0.5, 3.0);
    const double wy = sy * d.uniform(0.5, 3.0);
    const double want = (normal_cdf((cx + wx - mx) / sx) - normal_cdf((cx - wx - mx) / sx)) *
                        (normal_cdf((cy + wy - my) / sy) - normal_cdf((cy - wy - my) / sy));
    const PlanarGaussian g{Vec2(mx, my), sx, sy};
    const auto poly = rect_ccw(cx - wx, cx + wx, cy - wy, cy + wy);
    const double got = polygon_probability(g, poly).probability;
    const double rel = std::abs(got - want) / std::max(want, 1e-12);
    max_rel = std::max(max_rel, rel);
    if (rel > 1e-8) ++bad;
  }
  c.passed = bad == 0;
  c.details = strf("%d/%d rectangles within rel 1e-8 (max rel %.3e)", n - bad, n, max_rel);
  return c;
}

CriterionResult criterion_polygon_mc(std::uint64_t seed, bool quick, int) {
  CriterionResult c;
  c.id = 2;
  c.name = "polygon mass agrees with direct sampling";
  const int n = quick ? 8 : 50;
  const std::int64_t n_samples = quick ? 50000 : 1000000;
  double worst_ratio = 0.0;
  int bad = 0;
  for (int t = 0; t < n; ++t) {
    Draw d(seed, 200000 + t);
    const int nv = 3 + static_cast<int>(d.below(10));
    const Vec2 center(d.uniform(-0.5, 0.5), d.uniform(-0.5, 0.5));
    std::vector<Vec2> poly;
    poly.reserve(nv);
    for (int k = 0; k < nv; ++k) {
      const double ang = 2.0 * M_PI * (k + 0.15 + 0.7 * d.uniform()) / nv;
      const double rad = 0.4 + 1.6 * d.uniform();
      poly.push_back(center + rad * Vec2(std::cos(ang), std::sin(ang)));
    }
    PlanarGaussian g;
    g.mean = center + Vec2(d.uniform(-0.3, 0.3), d.uniform(-0.3, 0.3));
    g.sigma1 = d.uniform(0.3, 1.2);
    g.sigma2 = d.uniform(0.3, 1.2);
    const double quad = polygon_probability(g, poly).probability;

    const CounterRng mc(seed, 250000 + t);
    std::int64_t hits = 0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
      const auto z = mc.normal_pair(static_cast<std::uint64_t>(s));
      const Vec2 p(g.mean.x() + g.sigma1 * z[0], g.mean.y() + g.sigma2 * z[1]);
      if (point_in_polygon(p, poly)) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
    const double se = std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) /
                                static_cast<double>(n_samples));
    const double se_eff = std::max(se, 3.0 / static_cast<double>(n_samples));
    const double ratio = std::abs(quad - p_hat) / se_eff;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 4.0) ++bad;
  }
  c.passed = bad == 0;
  c.details = strf("%d/%d polygons within 4 SE at N=%lld (worst dev %.2f SE)", n - bad,
                   n, static_cast<long long>(n_samples), worst_ratio);
  return c;
}

CriterionResult criterion_soundness(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 3;
  c.name = "analytic bound stays below the sampled closure probability";
  const int n = quick ? 12 : 100;
  const std::int64_t n_samples = quick ? 10000 : 100000;
  int violations = 0;
  int positive = 0;
  double max_excess = -1.0;
  EvalOptions eo;
  eo.threads = threads;
  for (int t = 0; t < n; ++t) {
    Draw d(seed, 300000 + t);
    const GraspSpec g = random_grasp(d, t % 3, (t / 3) % 2 == 0, t % 2 == 0);
    const BoundReport r = evaluate(g, {}, eo);
    McConfig mc;
    mc.n_samples = n_samples;
    mc.seed = seed ^ (0x9E3779B97F4A7C15ull * (t + 1));
    mc.threads = threads;
    const McEstimate e = estimate_pfc(g, mc);
    const double excess = r.l_fc - (e.p_hat + 4.0 * e.std_err);
    max_excess = std::max(max_excess, excess);
    if (r.l_fc > 0.0) ++positive;
    if (excess > 0.0) ++violations;
  }
  c.passed = violations == 0;
  c.details = strf("%d violations over %d grasps, %d with positive bound (max excess %.3e)",
                   violations, n, positive, max_excess);
  return c;
}

CriterionResult criterion_containment(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 4;
  c.name = "perturbations drawn inside the tangent polygons keep force closure";
  const std::int64_t wanted = quick ? 120 : 1000;
  const auto dirs = SearchDirections::uniform(8);
  std::int64_t produced = 0, hypothesis = 0, counterexamples = 0, indeterminate = 0;
  int grasps = 0;
  for (int gi = 0; produced < wanted; ++gi) {
    Draw d(seed, 400000 + gi);
    const WrenchModel m = fc_model(d, true);
    const PolygonBuild pb = build_polygons(m, dirs, 0.0, threads);
    if (!pb.all_feasible) continue;  // cannot happen for a certified fc draw
    const std::int64_t batch = std::min<std::int64_t>(25, wanted - produced);
    std::vector<MatX> sets;
    sets.reserve(batch);
    for (std::int64_t s = 0; s < batch; ++s) {
      MatX eps(2, m.n_fingers());
      for (int i = 0; i < m.n_fingers(); ++i) {
        eps.col(i) = sample_in_polygon(d, pb.polygons[i]);
      }
      sets.push_back(std::move(eps));
    }
    const ContainmentReport rep = verify_containment(m, sets, threads);
    hypothesis += rep.n_hypothesis;
    counterexamples += rep.n_counterexamples;
    indeterminate += rep.n_indeterminate;
    produced += batch;
    ++grasps;
  }
  c.passed = counterexamples == 0 && indeterminate == 0 && hypothesis == produced;
  c.details = strf("%lld sets on %d grasps: hypothesis held %lld, counterexamples %lld, indeterminate %lld",
                   static_cast<long long>(produced), grasps,
                   static_cast<long long>(hypothesis),
                   static_cast<long long>(counterexamples),
                   static_cast<long long>(indeterminate));
  return c;
}

CriterionResult criterion_joint_lp(std::uint64_t seed, bool quick, int) {
  CriterionResult c;
  c.id = 5;
  c.name = "one joint step program equals the minimum over edge programs";
  const int n = quick ? 40 : 200;
  double max_dev = 0.0;
  int bad = 0;
  int unsolved = 0;
  for (int t = 0; t < n; ++t) {
    Draw d(seed, 500000 + t);
    const WrenchModel m = fc_model(d, t % 2 == 0);
    const int finger = static_cast<int>(d.below(m.n_fingers()));
    const double ang = 2.0 * M_PI * d.uniform();
    const Vec2 dir(std::cos(ang), std::sin(ang));
    const double cap = (t % 2 == 0) ? 2.0 : 0.5;
    const VertexSolve vs = solve_vertex(m, finger, dir, cap);
    if (!vs.feasible) {
      ++unsolved;
      continue;
    }
    const std::optional<double> joint = joint_theta(m, finger, dir, cap);
    if (!joint) {
      ++unsolved;
      continue;
    }
    const double dev = std::abs(vs.theta - *joint);
    max_dev = std::max(max_dev, dev);
    if (dev > 1e-7) ++bad;
  }
  c.passed = bad == 0 && unsolved == 0;
  c.details = strf("%d/%d instances within 1e-7 (max |dtheta| %.3e, %d unsolved)",
                   n - bad - unsolved, n, max_dev, unsolved);
  return c;
}

CriterionResult criterion_feasibility(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 6;
  c.name = "mean force closure keeps every edge program solvable";
  const int n_fc = quick ? 30 : 200;
  const int n_non = quick ? 10 : 50;
  const auto dirs = SearchDirections::uniform(8);
  std::int64_t lps = 0, infeasible = 0;
  for (int t = 0; t < n_fc; ++t) {
    Draw d(seed, 600000 + t);
    const WrenchModel m = fc_model(d, t % 2 == 0);
    const PolygonBuild pb = build_polygons(m, dirs, 0.0, threads);
    for (const auto& per_finger : pb.solves) {
      for (const VertexSolve& vs : per_finger) {
        ++lps;
        if (!vs.feasible) ++infeasible;
      }
    }
  }
  int nonzero = 0;
  EvalOptions eo;
  eo.threads = threads;
  for (int t = 0; t < n_non; ++t) {
    Draw d(seed, 650000 + t);
    const GraspSpec g = clustered_grasp(d, std::nullopt);
    const BoundReport r = evaluate(g, {}, eo);
    if (r.l_fc != 0.0 || r.feasible) ++nonzero;
  }
  c.passed = infeasible == 0 && nonzero == 0;
  c.details = strf("%lld edge programs on %d fc grasps, %lld infeasible; %d/%d non-fc grasps at zero",
                   static_cast<long long>(lps), n_fc,
                   static_cast<long long>(infeasible), n_non - nonzero, n_non);
  return c;
}

CriterionResult criterion_gradient(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 7;
  c.name = "analytic bound gradient matches central differences";
  const int wanted = quick ? 5 : 20;
  const int max_attempts = 60 * wanted;
  EvalOptions eo;
  eo.threads = threads;
  int used = 0, degenerate = 0, bad = 0;
  double worst = 0.0;
  for (int a = 0; a < max_attempts && used < wanted; ++a) {
    Draw d(seed, 700000 + a);
    const GraspSpec g = random_grasp(d, a % 3, true, true);
    VecX ga;
    try {
      ga = gradient(g, {}, {}, eo);
    } catch (const DegeneracyError&) {
      ++degenerate;
      continue;
    } catch (const DomainError&) {
      continue;
    }
    const VecX gf = gradient_fd(g, {}, {}, eo, 1e-5);
    for (int k = 0; k < ga.size(); ++k) {
      const double tol = std::max(1e-3 * std::abs(gf(k)), 1e-8);
      const double ratio = std::abs(ga(k) - gf(k)) / tol;
      worst = std::max(worst, ratio);
      if (ratio > 1.0) ++bad;
    }
    ++used;
  }
  c.passed = used == wanted && bad == 0;
  c.details = strf("%d grasps (%d degenerate draws skipped), %d components out of tolerance (worst ratio %.3e)",
                   used, degenerate, bad, worst);
  return c;
}

CriterionResult criterion_sigma_limits(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 8;
  c.name = "near-zero sigma collapses the bound to the mean verdict";
  (void)quick;
  EvalOptions eo;
  eo.threads = threads;
  McConfig mc;
  mc.n_samples = 10000;
  mc.seed = seed ^ 0xD1B54A32D192ED03ull;
  mc.threads = threads;

  const GraspSpec fc = tetrahedral_grasp(1e-4);
  const BoundReport r_fc = evaluate(fc, {}, eo);
  const McEstimate e_fc = estimate_pfc(fc, mc);

  Draw d(seed, 800000);
  const GraspSpec non = clustered_grasp(d, 1e-4);
  const BoundReport r_non = evaluate(non, {}, eo);
  const McEstimate e_non = estimate_pfc(non, mc);

  const bool fc_ok = r_fc.feasible && r_fc.l_fc >= 1.0 - 1e-3 && e_fc.p_hat == 1.0;
  const bool non_ok = !r_non.feasible && r_non.l_fc == 0.0 && e_non.p_hat == 0.0;
  c.passed = fc_ok && non_ok;
  c.details = strf("fc grasp: l=%.6f p_hat=%g; non-fc grasp: l=%g p_hat=%g",
                   r_fc.l_fc, e_fc.p_hat, r_non.l_fc, e_non.p_hat);
  return c;
}

CriterionResult criterion_equator_field(std::uint64_t seed, bool quick, int threads) {
  CriterionResult c;
  c.id = 9;
  c.name = "equator-low uncertainty pulls synthesized contacts to the equator";
  const int runs = quick ? 4 : 10;
  const int need = quick ? 3 : 8;
  const auto surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  const UncertaintyField field = make_equator_field();
  SynthConfig cfg;
  cfg.n_fingers = 3;
  cfg.max_iters = quick ? 25 : 60;
  cfg.threads = threads;

  const auto mean_abs_z = [](const std::vector<Vec3>& pts) {
    double s = 0.0;
    for (const Vec3& p : pts) s += std::abs(p.z());
    return s / static_cast<double>(pts.size());
  };

  int pulled = 0, failures = 0, monotone_violations = 0;
  for (int r = 0; r < runs; ++r) {
    cfg.seed = restart_seed(seed, r);
    SynthTrace trace;
    try {
      trace = synthesize(surface, CurvatureParams{}, cfg, field);
    } catch (const NumericalError&) {
      ++failures;
      continue;
    }
    if (mean_abs_z(trace.final_contacts) < mean_abs_z(trace.iterates.front().contacts)) {
      ++pulled;
    }
    double last = -1.0;
    for (const SynthIterate& it : trace.iterates) {
      if (!it.accepted) continue;
      if (it.l_fc < last) ++monotone_violations;
      last = it.l_fc;
    }
  }
  c.passed = pulled >= need && monotone_violations == 0 && failures == 0;
  c.details = strf("|z| fell in %d/%d runs (need %d); %d monotonicity violations, %d failed runs",
                   pulled, runs, need, monotone_violations, failures);
  return c;
}

CriterionResult guarded(const std::function<CriterionResult()>& body, int id,
                        const char* name) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c.id = id;
    c.name = name;
    c.passed = false;
    c.details = strf("unhandled exception: %s", e.what());
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace

ValidationReport run_validation(std::uint64_t seed, bool quick, int threads) {
  if (threads < 1) throw InputError("threads must be >= 1");
  ValidationReport rep;
  rep.seed = seed;
  rep.quick = quick;

  const std::pair<const char*, std::function<CriterionResult()>> checks[] = {
      {"rectangle mass equals the product of interval masses",
       [&] { return criterion_rectangles(seed, quick, threads); }},
      {"polygon mass agrees with direct sampling",
       [&] { return criterion_polygon_mc(seed, quick, threads); }},
      {"analytic bound stays below the sampled closure probability",
       [&] { return criterion_soundness(seed, quick, threads); }},
      {"perturbations drawn inside the tangent polygons keep force closure",
       [&] { return criterion_containment(seed, quick, threads); }},
      {"one joint step program equals the minimum over edge programs",
       [&] { return criterion_joint_lp(seed, quick, threads); }},
      {"mean force closure keeps every edge program solvable",
       [&] { return criterion_feasibility(seed, quick, threads); }},
      {"analytic bound gradient matches central differences",
       [&] { return criterion_gradient(seed, quick, threads); }},
      {"near-zero sigma collapses the bound to the mean verdict",
       [&] { return criterion_sigma_limits(seed, quick, threads); }},
      {"equator-low uncertainty pulls synthesized contacts to the equator",
       [&] { return criterion_equator_field(seed, quick, threads); }},
  };

  rep.all_passed = true;
  int id = 1;
  for (const auto& [name, body] : checks) {
    CriterionResult c = guarded(body, id, name);
    rep.all_passed = rep.all_passed && c.passed;
    rep.criteria.push_back(std::move(c));
    ++id;
  }
  return rep;
}

std::string validation_report_to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = r.seed;
  j["quick"] = r.quick;
  j["all_passed"] = r.all_passed;
  nlohmann::ordered_json criteria = nlohmann::ordered_json::array();
  for (const CriterionResult& c : r.criteria) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["details"] = c.details;
    criteria.push_back(std::move(e));
  }
  j["criteria"] = std::move(criteria);
  return j.dump(2) + "\n";
}

}  // namespace pong
