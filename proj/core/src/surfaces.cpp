#include "pong/surfaces.hpp"

#include <cmath>

namespace pong {
namespace {

constexpr double kTiny = 1e-300;

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

void require_positive(const Vec3& v, const char* what) {
  if (!(v.x() > 0.0 && v.y() > 0.0 && v.z() > 0.0)) {
    throw InputError(std::string(what) + " must be positive");
  }
  if (!v.allFinite()) throw InputError(std::string(what) + " must be finite");
}

// phi(t) = |t|^p and derivatives. p >= 2 keeps phi'' bounded; third
// derivatives on axis planes additionally need p outside (2, 3].
double phi(double t, double p) { return std::pow(std::abs(t), p); }
double phi_d1(double t, double p) { return p * std::pow(std::abs(t), p - 1.0) * sgn(t); }
double phi_d2(double t, double p) {
  if (p == 2.0) return 2.0;
  return p * (p - 1.0) * std::pow(std::abs(t), p - 2.0);
}
double phi_d3(double t, double p) {
  const double coeff = p * (p - 1.0) * (p - 2.0);
  if (coeff == 0.0) return 0.0;
  if (std::abs(t) < 1e-12 && p <= 3.0) {
    throw DomainError(
        "third derivative of |t|^p is undefined on an axis plane for p <= 3");
  }
  return coeff * std::pow(std::abs(t), p - 3.0) * sgn(t);
}

}  // namespace

const char* to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::ellipsoid: return "ellipsoid";
    case SurfaceKind::superquadric: return "superquadric";
    case SurfaceKind::rounded_box: return "rounded_box";
  }
  return "unknown";
}

ImplicitSurface ImplicitSurface::make_sphere(const Vec3& center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InputError("sphere radius must be positive");
  }
  ImplicitSurface s;
  s.kind = SurfaceKind::sphere;
  s.center = center;
  s.radius = radius;
  return s;
}

ImplicitSurface ImplicitSurface::make_ellipsoid(const Vec3& center,
                                                const Vec3& semi_axes) {
  require_positive(semi_axes, "ellipsoid semi-axes");
  ImplicitSurface s;
  s.kind = SurfaceKind::ellipsoid;
  s.center = center;
  s.semi_axes = semi_axes;
  return s;
}

ImplicitSurface ImplicitSurface::make_superquadric(const Vec3& center,
                                                   const Vec3& semi_axes,
                                                   double exponent) {
  require_positive(semi_axes, "superquadric semi-axes");
  if (!(exponent >= 2.0) || !std::isfinite(exponent)) {
    throw InputError("superquadric exponent must be >= 2");
  }
  ImplicitSurface s;
  s.kind = SurfaceKind::superquadric;
  s.center = center;
  s.semi_axes = semi_axes;
  s.exponent = exponent;
  return s;
}

ImplicitSurface ImplicitSurface::make_rounded_box(const Vec3& center,
                                                  const Vec3& half_extents,
                                                  double power) {
  require_positive(half_extents, "rounded box half-extents");
  if (!(power >= 4.0) || !std::isfinite(power)) {
    throw InputError("rounded box power must be >= 4");
  }
  ImplicitSurface s;
  s.kind = SurfaceKind::rounded_box;
  s.center = center;
  s.half_extents = half_extents;
  s.power = power;
  return s;
}

double ImplicitSurface::characteristic_radius() const {
  switch (kind) {
    case SurfaceKind::sphere: return radius;
    case SurfaceKind::ellipsoid:
    case SurfaceKind::superquadric: return semi_axes.maxCoeff();
    case SurfaceKind::rounded_box: return half_extents.maxCoeff();
  }
  return 1.0;
}

SurfaceJet2 eval(const ImplicitSurface& s, const Vec3& x) {
  if (!x.allFinite()) throw InputError("surface evaluation point must be finite");
  const Vec3 u = x - s.center;
  SurfaceJet2 jet;
  switch (s.kind) {
    case SurfaceKind::sphere: {
      const double rho = u.norm();
      if (rho < 1e-12) throw DomainError("sphere distance is not smooth at the center");
      const Vec3 uh = u / rho;
      jet.value = rho - s.radius;
      jet.gradient = uh;
      jet.hessian = (Mat3::Identity() - uh * uh.transpose()) / rho;
      return jet;
    }
    case SurfaceKind::ellipsoid: {
      const Vec3 inv2 = s.semi_axes.array().square().inverse();
      jet.value = (u.array().square() * inv2.array()).sum() - 1.0;
      jet.gradient = 2.0 * (u.array() * inv2.array()).matrix();
      jet.hessian = (2.0 * inv2).asDiagonal();
      return jet;
    }
    case SurfaceKind::superquadric: {
      const double p = s.exponent;
      jet.value = -1.0;
      for (int i = 0; i < 3; ++i) {
        const double a = s.semi_axes[i];
        const double v = u[i] / a;
        jet.value += phi(v, p);
        jet.gradient[i] = phi_d1(v, p) / a;
        jet.hessian(i, i) = phi_d2(v, p) / (a * a);
      }
      return jet;
    }
    case SurfaceKind::rounded_box: {
      const double p = s.power;
      double E = 0.0;
      Vec3 gE = Vec3::Zero();
      Vec3 hE = Vec3::Zero();
      for (int i = 0; i < 3; ++i) {
        const double h = s.half_extents[i];
        const double v = u[i] / h;
        E += phi(v, p);
        gE[i] = phi_d1(v, p) / h;
        hE[i] = phi_d2(v, p) / (h * h);
      }
      if (E < kTiny) {
        throw DomainError("rounded box function is not smooth at the center");
      }
      const double ip = 1.0 / p;
      const double F1 = ip * std::pow(E, ip - 1.0);
      const double F2 = ip * (ip - 1.0) * std::pow(E, ip - 2.0);
      jet.value = std::pow(E, ip) - 1.0;
      jet.gradient = F1 * gE;
      jet.hessian = F2 * gE * gE.transpose();
      jet.hessian += Mat3(hE.asDiagonal()) * F1;
      return jet;
    }
  }
  throw InputError("unknown surface kind");
}

Mat3 third_derivative_contraction(const ImplicitSurface& s, const Vec3& x,
                                  const Vec3& dir) {
  if (!x.allFinite() || !dir.allFinite()) {
    throw InputError("third derivative inputs must be finite");
  }
  const Vec3 u = x - s.center;
  Mat3 dH = Mat3::Zero();
  switch (s.kind) {
    case SurfaceKind::sphere: {
      const double rho = u.norm();
      if (rho < 1e-12) throw DomainError("sphere distance is not smooth at the center");
      const double r3 = rho * rho * rho;
      const double r5 = r3 * rho * rho;
      const double ue = u.dot(dir);
      dH = -ue / r3 * Mat3::Identity();
      dH -= (dir * u.transpose() + u * dir.transpose()) / r3;
      dH += 3.0 * ue / r5 * (u * u.transpose());
      return dH;
    }
    case SurfaceKind::ellipsoid:
      return Mat3::Zero();
    case SurfaceKind::superquadric: {
      const double p = s.exponent;
      for (int i = 0; i < 3; ++i) {
        const double a = s.semi_axes[i];
        dH(i, i) = phi_d3(u[i] / a, p) * dir[i] / (a * a * a);
      }
      return dH;
    }
    case SurfaceKind::rounded_box: {
      const double p = s.power;
      double E = 0.0;
      Vec3 gE = Vec3::Zero();
      Vec3 hE = Vec3::Zero();
      Vec3 tE = Vec3::Zero();
      for (int i = 0; i < 3; ++i) {
        const double h = s.half_extents[i];
        const double v = u[i] / h;
        E += phi(v, p);
        gE[i] = phi_d1(v, p) / h;
        hE[i] = phi_d2(v, p) / (h * h);
        tE[i] = phi_d3(v, p) / (h * h * h);
      }
      if (E < kTiny) {
        throw DomainError("rounded box function is not smooth at the center");
      }
      const double ip = 1.0 / p;
      const double F1 = ip * std::pow(E, ip - 1.0);
      const double F2 = ip * (ip - 1.0) * std::pow(E, ip - 2.0);
      const double F3 = ip * (ip - 1.0) * (ip - 2.0) * std::pow(E, ip - 3.0);
      const double dE = gE.dot(dir);
      const Vec3 dgE = (hE.array() * dir.array()).matrix();
      dH = F3 * dE * gE * gE.transpose();
      dH += F2 * (dgE * gE.transpose() + gE * dgE.transpose());
      dH += F2 * dE * Mat3(hE.asDiagonal());
      dH += F1 * Mat3((tE.array() * dir.array()).matrix().asDiagonal());
      return dH;
    }
  }
  throw InputError("unknown surface kind");
}

ShapeEigs shape_operator_from(const Vec3& gradient, const Mat3& hessian) {
  const double gn = gradient.norm();
  if (gn < 1e-12) {
    throw DomainError("shape operator needs a nonvanishing surface gradient");
  }
  const Vec3 N = gradient / gn;

  // Reference tangent frame from the coordinate axis least aligned with N.
  int axis = 0;
  double best = std::abs(N[0]);
  for (int i = 1; i < 3; ++i) {
    if (std::abs(N[i]) < best) {
      best = std::abs(N[i]);
      axis = i;
    }
  }
  const Vec3 a = Vec3::Unit(axis);
  const Vec3 q1 = a.cross(N).normalized();
  const Vec3 q2 = N.cross(q1);

  const double m11 = -q1.dot(hessian * q1) / gn;
  const double m22 = -q2.dot(hessian * q2) / gn;
  const double m12 = -q1.dot(hessian * q2) / gn;

  ShapeEigs out;
  const double scale = std::max({std::abs(m11), std::abs(m22), std::abs(m12), 1e-30});
  if (std::abs(m12) <= 1e-9 * scale && std::abs(m11 - m22) <= 1e-9 * scale) {
    out.kappa1 = m11;
    out.kappa2 = m22;
    out.dir1 = q1;
    out.dir2 = q2;
    out.isotropic = true;
    return out;
  }

  const double tr = m11 + m22;
  const double det = m11 * m22 - m12 * m12;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  double la = 0.5 * (tr >= 0.0 ? tr + disc : tr - disc);
  double lb = (std::abs(la) > kTiny) ? det / la : 0.5 * (tr - disc);
  if (std::abs(lb) > std::abs(la)) std::swap(la, lb);

  // Eigenvector of the larger-|kappa| eigenvalue; take the better-conditioned
  // of the two row expressions.
  Vec2 v1a(m12, la - m11);
  Vec2 v1b(la - m22, m12);
  Vec2 v1 = (v1a.norm() >= v1b.norm()) ? v1a : v1b;
  v1.normalize();
  const Vec2 v2(-v1.y(), v1.x());

  out.kappa1 = la;
  out.kappa2 = lb;
  out.dir1 = v1.x() * q1 + v1.y() * q2;
  out.dir2 = v2.x() * q1 + v2.y() * q2;
  out.isotropic = false;

  // Deterministic sign: dir1 points toward the first coordinate axis it is
  // not orthogonal to; dir2 keeps (dir1, dir2, N) right-handed.
  double d = out.dir1.x();
  if (std::abs(d) < 1e-6) d = out.dir1.y();
  if (std::abs(d) < 1e-6) d = out.dir1.z();
  if (d < 0.0) {
    out.dir1 = -out.dir1;
    out.dir2 = -out.dir2;
  }
  return out;
}

ShapeEigs shape_operator_eigs(const ImplicitSurface& s, const Vec3& x) {
  const SurfaceJet2 jet = eval(s, x);
  return shape_operator_from(jet.gradient, jet.hessian);
}

void ContactDistribution::validate(double tol) const {
  if (!position.allFinite() || !mean_normal.allFinite() || !tangent1.allFinite() ||
      !tangent2.allFinite()) {
    throw DomainError("contact frame must be finite");
  }
  const double nn = mean_normal.norm();
  if (nn < 1e-12) throw DomainError("contact mean normal must be nonzero");
  if (std::abs(tangent1.norm() - 1.0) > tol || std::abs(tangent2.norm() - 1.0) > tol) {
    throw DomainError("contact tangents must be unit length");
  }
  if (std::abs(tangent1.dot(tangent2)) > tol ||
      std::abs(tangent1.dot(mean_normal)) > tol * nn ||
      std::abs(tangent2.dot(mean_normal)) > tol * nn) {
    throw DomainError("contact frame must be mutually orthogonal");
  }
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw DomainError("contact sigmas must be positive");
  }
}

void CurvatureParams::validate() const {
  if (!(k_curv >= 0.0) || !std::isfinite(k_curv)) {
    throw InputError("k_curv must be nonnegative");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("eps must be positive");
  if (!(sigma_sq_min > 0.0)) throw InputError("sigma_sq_min must be positive");
}

namespace {

ContactDistribution frame_at(const ImplicitSurface& s, const Vec3& x,
                             ShapeEigs* eigs_out = nullptr) {
  const SurfaceJet2 jet = eval(s, x);
  if (std::abs(jet.value) > 1e-6) {
    throw DomainError("contact point must lie on the surface");
  }
  const ShapeEigs eigs = shape_operator_from(jet.gradient, jet.hessian);
  if (eigs_out) *eigs_out = eigs;
  ContactDistribution c;
  c.position = x;
  c.mean_normal = -jet.gradient;  // inward
  c.tangent1 = eigs.dir1;
  c.tangent2 = eigs.dir2;
  return c;
}

}  // namespace

ContactDistribution curvature_distribution(const ImplicitSurface& s, const Vec3& x,
                                           const CurvatureParams& p) {
  p.validate();
  ShapeEigs eigs;
  ContactDistribution c = frame_at(s, x, &eigs);
  const double s1sq =
      std::max(std::log(p.k_curv * std::abs(eigs.kappa1) + p.eps), p.sigma_sq_min);
  const double s2sq =
      std::max(std::log(p.k_curv * std::abs(eigs.kappa2) + p.eps), p.sigma_sq_min);
  c.sigma1 = std::sqrt(s1sq);
  c.sigma2 = std::sqrt(s2sq);
  c.validate();
  return c;
}

ContactDistribution contact_from_field(const ImplicitSurface& s, const Vec3& x,
                                       const UncertaintyField& field) {
  if (!field) throw InputError("uncertainty field is empty");
  ContactDistribution c = frame_at(s, x);
  const FieldSigmas fs = field(x);
  if (!(fs.sigma1 > 0.0) || !(fs.sigma2 > 0.0)) {
    throw DomainError("uncertainty field must return positive sigmas");
  }
  c.sigma1 = fs.sigma1;
  c.sigma2 = fs.sigma2;
  c.validate();
  return c;
}

bool project_to_surface(const ImplicitSurface& s, Vec3& x, int max_iters, double tol) {
  for (int it = 0; it < max_iters; ++it) {
    SurfaceJet2 jet;
    try {
      jet = eval(s, x);
    } catch (const DomainError&) {
      return false;
    }
    if (std::abs(jet.value) <= tol) return true;
    const double g2 = jet.gradient.squaredNorm();
    if (g2 < 1e-24) return false;
    x -= jet.value / g2 * jet.gradient;
  }
  try {
    return std::abs(eval(s, x).value) <= tol;
  } catch (const DomainError&) {
    return false;
  }
}

Vec3 ray_to_surface(const ImplicitSurface& s, const Vec3& dir) {
  const double dn = dir.norm();
  if (dn < 1e-12) throw InputError("ray direction must be nonzero");
  const Vec3 d = dir / dn;
  const double r0 = s.characteristic_radius();

  auto value_at = [&](double t) { return eval(s, s.center + t * d).value; };

  // The surfaces here are star shaped about the center, so s is negative
  // inside and crosses zero exactly once along the ray.
  double lo = 1e-9 * r0;
  double hi = r0;
  int guard = 0;
  while (value_at(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 90) throw NumericalError("ray does not leave the surface");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (value_at(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  double t = 0.5 * (lo + hi);
  // Newton polish.
  for (int it = 0; it < 4; ++it) {
    const SurfaceJet2 jet = eval(s, s.center + t * d);
    const double dv = jet.gradient.dot(d);
    if (std::abs(dv) < 1e-18) break;
    t -= jet.value / dv;
  }
  Vec3 x = s.center + t * d;
  if (std::abs(eval(s, x).value) > 1e-9) {
    throw NumericalError("ray intersection did not converge");
  }
  return x;
}

}  // namespace pong
