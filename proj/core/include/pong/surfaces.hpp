#pragma once

#include <functional>
#include <optional>

#include "pong/common.hpp"

namespace pong {

enum class SurfaceKind { sphere, ellipsoid, superquadric, rounded_box };

const char* to_string(SurfaceKind k);

/// Analytic implicit surface s(x) = 0 with s < 0 inside. Shapes:
///   sphere        s = |x-c| - r                       (signed distance)
///   ellipsoid     s = sum (u_i/a_i)^2 - 1
///   superquadric  s = sum |u_i/a_i|^p - 1,            p >= 2
///   rounded_box   s = (sum |u_i/h_i|^p)^(1/p) - 1,    p >= 4
/// with u = x - c. Gradients never vanish on the zero set; evaluation at
/// the center (or on axis planes where a derivative order is undefined)
/// raises DomainError.
struct ImplicitSurface {
  SurfaceKind kind = SurfaceKind::sphere;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;                  // sphere
  Vec3 semi_axes = Vec3::Ones();        // ellipsoid, superquadric
  double exponent = 4.0;                // superquadric
  Vec3 half_extents = Vec3::Ones();     // rounded_box
  double power = 6.0;                   // rounded_box

  static ImplicitSurface make_sphere(const Vec3& center, double radius);
  static ImplicitSurface make_ellipsoid(const Vec3& center, const Vec3& semi_axes);
  static ImplicitSurface make_superquadric(const Vec3& center, const Vec3& semi_axes,
                                           double exponent);
  static ImplicitSurface make_rounded_box(const Vec3& center, const Vec3& half_extents,
                                          double power);

  /// Largest distance from center to the surface along an axis.
  double characteristic_radius() const;
};

struct SurfaceJet2 {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

SurfaceJet2 eval(const ImplicitSurface& s, const Vec3& x);

/// Directional derivative of the Hessian: d/dt H(x + t dir) at t = 0.
Mat3 third_derivative_contraction(const ImplicitSurface& s, const Vec3& x,
                                  const Vec3& dir);

/// Eigenpairs of the tangent-plane shape operator -P H P / |grad s| with
/// P = I - N N^T and N the outward unit normal. Directions are unit, mutually
/// orthogonal, perpendicular to N, ordered by |kappa| descending, and fixed
/// deterministically: dir1 has nonnegative dot with the first coordinate axis
/// it is not orthogonal to, and dir2 = N x dir1. On umbilic points (the two
/// curvatures and the off-diagonal coincide to relative 1e-9) the basis falls
/// back to a reference frame built from N alone and `isotropic` is set.
struct ShapeEigs {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitY();
  bool isotropic = false;
};

ShapeEigs shape_operator_eigs(const ImplicitSurface& s, const Vec3& x);

/// Same decomposition from a raw (gradient, hessian) pair; scaling both by
/// the same positive constant leaves the result unchanged.
ShapeEigs shape_operator_from(const Vec3& gradient, const Mat3& hessian);

/// One uncertain contact: mean inward normal (not normalized) and a Gaussian
/// perturbation with standard deviations sigma1/sigma2 along the unit
/// tangent directions.
struct ContactDistribution {
  Vec3 position = Vec3::Zero();
  Vec3 mean_normal = -Vec3::UnitZ();
  Vec3 tangent1 = Vec3::UnitX();
  Vec3 tangent2 = Vec3::UnitY();
  double sigma1 = 0.1;
  double sigma2 = 0.1;

  /// Throws DomainError unless the frame is orthonormal-perpendicular to
  /// tolerance and the sigmas are positive.
  void validate(double tol = 1e-9) const;
};

/// sigma_m^2 = max(log(k_curv |kappa_m| + eps), sigma_sq_min).
struct CurvatureParams {
  double k_curv = 1.0;
  double eps = 1.05;
  double sigma_sq_min = 1e-4;

  void validate() const;
};

/// Contact at a surface point: normal and tangent frame from the surface,
/// sigmas from the principal curvatures.
ContactDistribution curvature_distribution(const ImplicitSurface& s, const Vec3& x,
                                           const CurvatureParams& p);

/// Spatially varying override for the contact uncertainty. Gradients are
/// needed by the analytic bound gradient.
struct FieldSigmas {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  Vec3 d_sigma1 = Vec3::Zero();
  Vec3 d_sigma2 = Vec3::Zero();
};

using UncertaintyField = std::function<FieldSigmas(const Vec3&)>;

/// Like curvature_distribution but with sigmas taken from `field`.
/// Throws DomainError if the field returns a nonpositive sigma.
ContactDistribution contact_from_field(const ImplicitSurface& s, const Vec3& x,
                                       const UncertaintyField& field);

/// Newton projection along the gradient. Returns false if |s| > tol after
/// max_iters steps.
bool project_to_surface(const ImplicitSurface& s, Vec3& x, int max_iters = 20,
                        double tol = 1e-10);

/// Intersection of the ray center + t*dir (t > 0) with the surface.
Vec3 ray_to_surface(const ImplicitSurface& s, const Vec3& dir);

}  // namespace pong
