#include "pong/bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace pong {
namespace {

using Clock = std::chrono::steady_clock;

double tick(Clock::time_point& t) {
  const Clock::time_point now = Clock::now();
  const double dt = std::chrono::duration<double>(now - t).count();
  t = now;
  return dt;
}

std::vector<int> resolve_selection(const FreeParams& params, int n_contacts) {
  std::vector<int> sel = params.contacts;
  if (sel.empty()) {
    sel.resize(static_cast<std::size_t>(n_contacts));
    std::iota(sel.begin(), sel.end(), 0);
    return sel;
  }
  std::vector<char> seen(static_cast<std::size_t>(n_contacts), 0);
  for (int i : sel) {
    if (i < 0 || i >= n_contacts) throw InputError("free contact index out of range");
    if (seen[static_cast<std::size_t>(i)]++) {
      throw InputError("free contact index repeated");
    }
  }
  return sel;
}

// First-order response of one contact's frame and sigmas to a unit
// displacement of its position along one ambient coordinate axis. Explicit
// contacts keep all zeros: only their torque arm moves.
struct FrameDelta {
  Vec3 d_nhat = Vec3::Zero();
  Vec3 d_t1 = Vec3::Zero();
  Vec3 d_t2 = Vec3::Zero();
  double d_sigma1 = 0.0;
  double d_sigma2 = 0.0;
};

struct ContactChain {
  bool on_surface = false;
  FrameDelta d[3];
};

double sigma_curvature_delta(double kappa, double d_kappa, double sigma,
                             const CurvatureParams& p, int contact) {
  if (std::abs(kappa) < 1e-9) {
    throw DegeneracyError("curvature magnitude vanishes at contact " +
                          std::to_string(contact) +
                          "; its sigma has a kink there, use finite differences");
  }
  const double inner = p.k_curv * std::abs(kappa) + p.eps;
  if (std::log(inner) <= p.sigma_sq_min) return 0.0;  // variance floor active
  const double sign = kappa >= 0.0 ? 1.0 : -1.0;
  return p.k_curv * sign * d_kappa / (inner * 2.0 * sigma);
}

ContactChain contact_chain(const GraspSpec& grasp, const WrenchModel& m, int i) {
  ContactChain ch;
  if (grasp.contacts[static_cast<std::size_t>(i)].dist) return ch;

  const ImplicitSurface& surf = *grasp.surface;
  const ContactDistribution& c = m.contacts[static_cast<std::size_t>(i)];
  const Vec3 x = c.position;
  const SurfaceJet2 jet = eval(surf, x);
  const double rho = jet.gradient.norm();
  const Vec3 N = jet.gradient / rho;  // outward unit normal
  const Mat3& H = jet.hessian;
  const ShapeEigs eigs = shape_operator_from(jet.gradient, H);
  const Vec3 t1 = eigs.dir1;
  const Vec3 t2 = eigs.dir2;

  if (!eigs.isotropic &&
      std::abs(std::abs(eigs.kappa1) - std::abs(eigs.kappa2)) < 1e-6) {
    throw DegeneracyError("principal curvature magnitudes nearly tie at contact " +
                          std::to_string(i) +
                          "; the tangent frame is not differentiable there, use finite "
                          "differences");
  }

  Vec3 gauge_axis = Vec3::Zero();
  double gauge_norm = 0.0;
  if (eigs.isotropic) {
    // The frame comes from the coordinate axis least aligned with N; a near
    // tie means that choice, and with it the frame, can switch abruptly.
    int axis = 0;
    double best = std::abs(N[0]);
    for (int k = 1; k < 3; ++k) {
      if (std::abs(N[k]) < best) {
        best = std::abs(N[k]);
        axis = k;
      }
    }
    double second = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (k != axis) second = std::min(second, std::abs(N[k]));
    }
    if (second - best < 1e-6) {
      throw DegeneracyError("tangent gauge axis ties at contact " + std::to_string(i) +
                            "; the frame is not differentiable there, use finite "
                            "differences");
    }
    gauge_axis = Vec3::Unit(axis);
    gauge_norm = gauge_axis.cross(N).norm();
  }

  ch.on_surface = true;
  for (int e = 0; e < 3; ++e) {
    const Vec3 u = Vec3::Unit(e);
    const Mat3 dH = third_derivative_contraction(surf, x, u);
    const Vec3 Hu = H * u;
    const Vec3 dN = (Hu - N * N.dot(Hu)) / rho;
    const double drho = N.dot(Hu);
    FrameDelta& fd = ch.d[e];
    fd.d_nhat = -dN;

    if (eigs.isotropic) {
      const Vec3 daN = gauge_axis.cross(dN);
      fd.d_t1 = (daN - t1 * t1.dot(daN)) / gauge_norm;
      fd.d_t2 = dN.cross(t1) + N.cross(fd.d_t1);
    } else {
      const double off = (t2.dot(dN) * N.dot(H * t1) + t1.dot(dN) * N.dot(H * t2) -
                          t2.dot(dH * t1)) /
                         rho;
      const double rot = off / (eigs.kappa1 - eigs.kappa2);
      fd.d_t1 = rot * t2 - t1.dot(dN) * N;
      fd.d_t2 = -rot * t1 - t2.dot(dN) * N;
    }

    if (grasp.field) {
      const FieldSigmas fs = grasp.field(x);
      fd.d_sigma1 = fs.d_sigma1.dot(u);
      fd.d_sigma2 = fs.d_sigma2.dot(u);
    } else {
      const double dk1 = (2.0 * t1.dot(dN) * N.dot(H * t1) - t1.dot(dH * t1)) / rho -
                         eigs.kappa1 * drho / rho;
      const double dk2 = (2.0 * t2.dot(dN) * N.dot(H * t2) - t2.dot(dH * t2)) / rho -
                         eigs.kappa2 * drho / rho;
      fd.d_sigma1 = sigma_curvature_delta(eigs.kappa1, dk1, c.sigma1, grasp.curvature, i);
      fd.d_sigma2 = sigma_curvature_delta(eigs.kappa2, dk2, c.sigma2, grasp.curvature, i);
    }
  }
  return ch;
}

// Derivative of the auto cap 8 max(sigma1, sigma2) of finger i.
double cap_delta(const TangentPolygon& poly, const FrameDelta& fd, int i) {
  const double tie = 1e-12 * std::max(1.0, std::max(poly.sigma1, poly.sigma2));
  if (std::abs(poly.sigma1 - poly.sigma2) <= tie) {
    const double scale = 1.0 + std::max(std::abs(fd.d_sigma1), std::abs(fd.d_sigma2));
    if (std::abs(fd.d_sigma1 - fd.d_sigma2) > 1e-9 * scale) {
      throw DegeneracyError("sigma cap argmax ties at contact " + std::to_string(i) +
                            " with disagreeing branch derivatives; use finite "
                            "differences");
    }
    return 8.0 * fd.d_sigma1;
  }
  return 8.0 * (poly.sigma1 > poly.sigma2 ? fd.d_sigma1 : fd.d_sigma2);
}

}  // namespace

BoundReport evaluate(const GraspSpec& grasp, const SearchDirections& dirs,
                     const QuadratureConfig& qcfg, const EvalOptions& opts) {
  Clock::time_point t = Clock::now();
  const Clock::time_point t_start = t;

  BoundReport rep;
  const std::vector<ContactDistribution> dists = grasp.resolve();
  rep.timing.resolve = tick(t);

  const WrenchModel m =
      build_wrench_model(dists, grasp.mu, grasp.n_sides, grasp.torque_origin);
  rep.timing.model = tick(t);

  const MinWeight mw = min_weight_metric(m.w_bar);
  rep.l_bar_star = mw.l_bar_star;
  rep.timing.closure = tick(t);

  rep.per_finger_probs.assign(static_cast<std::size_t>(m.n_fingers()), 0.0);
  if (mw.feasible) {
    PolygonBuild pb = build_polygons(m, dirs, opts.theta_max, opts.threads);
    rep.timing.vertices = tick(t);
    if (pb.all_feasible) {
      rep.feasible = true;
      double l = 1.0;
      for (int f = 0; f < m.n_fingers(); ++f) {
        const TangentPolygon& poly = pb.polygons[static_cast<std::size_t>(f)];
        PlanarGaussian g;
        g.mean = Vec2::Zero();
        g.sigma1 = poly.sigma1;
        g.sigma2 = poly.sigma2;
        const PolygonProbability pp = polygon_probability(g, poly.vertices, qcfg);
        rep.per_finger_probs[static_cast<std::size_t>(f)] = pp.probability;
        rep.quadrature_warning = rep.quadrature_warning || pp.clamp_warning;
        l *= pp.probability;
      }
      rep.l_fc = l;
      if (opts.keep_polygons) rep.polygons = std::move(pb.polygons);
    }
    rep.timing.quadrature = tick(t);
  }
  rep.timing.total = std::chrono::duration<double>(Clock::now() - t_start).count();
  return rep;
}

VecX gradient(const GraspSpec& grasp, const FreeParams& params,
              const SearchDirections& dirs, const QuadratureConfig& qcfg,
              const EvalOptions& opts) {
  const int n_c = static_cast<int>(grasp.contacts.size());
  const std::vector<int> sel = resolve_selection(params, n_c);

  const std::vector<ContactDistribution> dists = grasp.resolve();
  const WrenchModel m =
      build_wrench_model(dists, grasp.mu, grasp.n_sides, grasp.torque_origin);
  const MinWeight mw = min_weight_metric(m.w_bar);
  if (!mw.feasible) {
    throw DomainError("gradient needs a force-closure mean grasp");
  }
  const PolygonBuild pb = build_polygons(m, dirs, opts.theta_max, opts.threads);
  if (!pb.all_feasible) {
    throw NumericalError("vertex programs could not certify the mean grasp");
  }

  const int n_f = m.n_fingers();
  const int n_v = dirs.size();
  const int n_s = m.n_sides;

  // Every uncapped vertex program must carry a trustworthy sensitivity: the
  // dual term below is used for every finger no matter which contact moves.
  for (int f = 0; f < n_f; ++f) {
    for (int k = 0; k < n_v; ++k) {
      const VertexSolve& vs = pb.solves[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)];
      if (!vs.capped && !vs.sensitivity_safe) {
        throw DegeneracyError("vertex program of finger " + std::to_string(f) +
                              ", direction " + std::to_string(k) +
                              " has a degenerate optimum; use finite differences");
      }
    }
  }

  std::vector<PolygonProbabilityGrad> pg(static_cast<std::size_t>(n_f));
  std::vector<double> probs(static_cast<std::size_t>(n_f));
  for (int f = 0; f < n_f; ++f) {
    const TangentPolygon& poly = pb.polygons[static_cast<std::size_t>(f)];
    PlanarGaussian g;
    g.mean = Vec2::Zero();
    g.sigma1 = poly.sigma1;
    g.sigma2 = poly.sigma2;
    pg[static_cast<std::size_t>(f)] = polygon_probability_grad(g, poly.vertices, qcfg);
    probs[static_cast<std::size_t>(f)] = pg[static_cast<std::size_t>(f)].value.probability;
  }

  // weight[f] = product of the other fingers' masses, assembled without
  // division so zero factors stay exact.
  std::vector<double> weight(static_cast<std::size_t>(n_f), 1.0);
  {
    double run = 1.0;
    for (int f = 0; f < n_f; ++f) {
      weight[static_cast<std::size_t>(f)] = run;
      run *= probs[static_cast<std::size_t>(f)];
    }
    run = 1.0;
    for (int f = n_f - 1; f >= 0; --f) {
      weight[static_cast<std::size_t>(f)] *= run;
      run *= probs[static_cast<std::size_t>(f)];
    }
  }

  VecX out = VecX::Zero(3 * static_cast<int>(sel.size()));
  std::vector<Vec6> d_w(static_cast<std::size_t>(n_s));

  for (std::size_t a = 0; a < sel.size(); ++a) {
    const int i = sel[a];
    const ContactChain ch = contact_chain(grasp, m, i);
    const ContactDistribution& ci = m.contacts[static_cast<std::size_t>(i)];
    const Vec3 nhat = ci.mean_normal;  // unit inward
    const Vec3 arm = ci.position - m.torque_origin;

    for (int e = 0; e < 3; ++e) {
      const FrameDelta& fd = ch.d[e];
      const Vec3 u = Vec3::Unit(e);

      // Wrench-column deltas of finger i's friction-pyramid edges.
      for (int j = 0; j < n_s; ++j) {
        const int l = m.column(i, j);
        const Vec3& g = m.generators[static_cast<std::size_t>(l)];
        const Vec3 dg = g.dot(ci.tangent1) * fd.d_t1 + g.dot(ci.tangent2) * fd.d_t2;
        const Vec3 top = m.w_bar.col(l).head<3>();
        const Vec3 dtop =
            m.mu * dg.cross(nhat) + fd.d_nhat + m.mu * g.cross(fd.d_nhat);
        const Vec3 dbot = u.cross(top) + arm.cross(dtop);
        d_w[static_cast<std::size_t>(j)] << dtop, dbot;
      }

      double dl = 0.0;
      for (int f = 0; f < n_f; ++f) {
        const TangentPolygon& poly = pb.polygons[static_cast<std::size_t>(f)];
        const PolygonProbabilityGrad& pgf = pg[static_cast<std::size_t>(f)];
        double dpf = 0.0;
        for (int k = 0; k < n_v; ++k) {
          const VertexSolve& vs =
              pb.solves[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)];
          double dtheta = 0.0;
          if (vs.capped) {
            if (pb.requested_theta_max <= 0.0 && f == i) dtheta = cap_delta(poly, fd, i);
          } else {
            const VecX& y = vs.lp.dual;
            const VecX& z = vs.lp.z;
            double acc = 0.0;
            for (int j = 0; j < n_s; ++j) {
              const double alpha = z(1 + m.column(i, j));
              if (alpha != 0.0) {
                acc += alpha * y.head(6).dot(d_w[static_cast<std::size_t>(j)]);
              }
            }
            if (f == i) {
              // The direction column itself rides on finger i's frame.
              const Vec2& dk = dirs.dirs[static_cast<std::size_t>(k)];
              const Vec3 d3 = dk.x() * ci.tangent1 + dk.y() * ci.tangent2;
              const Vec3 dd3 = dk.x() * fd.d_t1 + dk.y() * fd.d_t2;
              const Vec3& g =
                  m.generators[static_cast<std::size_t>(m.column(i, vs.binding_edge))];
              const Vec3 dg =
                  g.dot(ci.tangent1) * fd.d_t1 + g.dot(ci.tangent2) * fd.d_t2;
              const Vec3 ctop = d3 + m.mu * g.cross(d3);
              const Vec3 dctop = dd3 + m.mu * (dg.cross(d3) + g.cross(dd3));
              Vec6 dc0;
              dc0 << dctop, u.cross(ctop) + arm.cross(dctop);
              acc += z(0) * y.head(6).dot(dc0);
            }
            dtheta = -acc;
          }
          dpf += pgf.d_vertices[static_cast<std::size_t>(k)].dot(
                     dirs.dirs[static_cast<std::size_t>(k)]) *
                 dtheta;
        }
        if (f == i) {
          dpf += pgf.d_sigma1 * fd.d_sigma1 + pgf.d_sigma2 * fd.d_sigma2;
        }
        dl += weight[static_cast<std::size_t>(f)] * dpf;
      }
      out(3 * static_cast<int>(a) + e) = dl;
    }

    if (ch.on_surface) {
      // Report the tangential gradient: evaluation reprojects displacements
      // onto the surface, so the normal component is unobservable.
      const Vec3 n = ci.mean_normal;
      Eigen::Ref<Vec3> g3 = out.segment<3>(3 * static_cast<int>(a));
      g3 -= n * n.dot(g3);
    }
  }
  return out;
}

VecX gradient_fd(const GraspSpec& grasp, const FreeParams& params,
                 const SearchDirections& dirs, const QuadratureConfig& qcfg,
                 const EvalOptions& opts, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InputError("finite-difference step must be positive");
  }
  const int n_c = static_cast<int>(grasp.contacts.size());
  const std::vector<int> sel = resolve_selection(params, n_c);

  EvalOptions eo = opts;
  eo.keep_polygons = false;

  VecX out = VecX::Zero(3 * static_cast<int>(sel.size()));
  GraspSpec probe = grasp;
  for (std::size_t a = 0; a < sel.size(); ++a) {
    const int i = sel[a];
    ContactSpec& cs = probe.contacts[static_cast<std::size_t>(i)];
    Vec3& pos = cs.dist ? cs.dist->position : cs.position;
    const Vec3 base = pos;
    for (int e = 0; e < 3; ++e) {
      pos = base + step * Vec3::Unit(e);
      const double lp = evaluate(probe, dirs, qcfg, eo).l_fc;
      pos = base - step * Vec3::Unit(e);
      const double lm = evaluate(probe, dirs, qcfg, eo).l_fc;
      pos = base;
      out(3 * static_cast<int>(a) + e) = (lp - lm) / (2.0 * step);
    }
  }
  return out;
}

}  // namespace pong
