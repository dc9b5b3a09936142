#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pong/common.hpp"
#include "pong/simplex.hpp"
#include "pong/surfaces.hpp"

namespace pong {

/// One contact in a grasp description. Either a fully explicit distribution,
/// or a surface point whose frame and sigmas are derived on resolve().
struct ContactSpec {
  std::optional<ContactDistribution> dist;  // explicit; used as given
  Vec3 position = Vec3::Zero();             // surface-derived contacts
};

/// Grasp description. Surface-derived contacts are projected onto the
/// surface, their frame comes from the shape operator, and their sigmas come
/// from the curvature map (or from `field` when set).
struct GraspSpec {
  std::vector<ContactSpec> contacts;
  double mu = 0.5;
  int n_sides = 4;
  int n_dirs = 8;
  Vec3 torque_origin = Vec3::Zero();
  std::optional<ImplicitSurface> surface;
  CurvatureParams curvature;
  UncertaintyField field;  // optional sigma override

  std::vector<ContactDistribution> resolve() const;
};

/// Linearized wrench model of a grasp. Column l = i * n_sides + j holds the
/// mean wrench of friction-pyramid edge j at contact i:
///   w_bar_l = T_l n_i,   T_l = [ I + mu [g_l]x ; [x_i - o]x (I + mu [g_l]x) ]
/// with n_i the unit inward mean normal and g_l the unit tangent generator
/// at angle 2 pi j / n_sides in the (tangent1, tangent2) plane. The stored
/// contacts have their mean normals normalized to unit length.
struct WrenchModel {
  MatX w_bar;                     // 6 x n_wrenches
  std::vector<Mat6x3> t_maps;     // one per column
  std::vector<Vec3> generators;   // one per column
  std::vector<ContactDistribution> contacts;
  double mu = 0.5;
  int n_sides = 4;
  Vec3 torque_origin = Vec3::Zero();

  int n_fingers() const { return static_cast<int>(contacts.size()); }
  int n_wrenches() const { return static_cast<int>(w_bar.cols()); }
  int column(int finger, int side) const { return finger * n_sides + side; }
};

WrenchModel build_wrench_model(std::span<const ContactDistribution> contacts,
                               double mu, int n_sides,
                               const Vec3& torque_origin = Vec3::Zero());

inline WrenchModel build_wrench_model(const GraspSpec& g) {
  const auto contacts = g.resolve();
  return build_wrench_model(contacts, g.mu, g.n_sides, g.torque_origin);
}

/// Wrench columns for perturbed normals n_i(eps) = n_i + eps1_i t1_i +
/// eps2_i t2_i, one epsilon pair per finger. At eps = 0 this reproduces
/// w_bar exactly.
MatX perturbed_wrenches(const WrenchModel& m, std::span<const double> eps1,
                        std::span<const double> eps2);

/// True iff the origin lies in the convex hull of the columns of w.
/// Throws NumericalError if the feasibility solve fails to certify.
bool origin_in_hull(const MatX& w, const SimplexOptions& opts = {});

/// Largest uniform lower bound on the hull weights, scaled by the column
/// count: n_w * max { min_l alpha_l : alpha >= 0, sum = 1, w alpha = 0 }.
/// `feasible` requires both a solvable program and rank(w) = 6, which
/// together certify the origin is interior to the hull. When the program is
/// solvable but the rank is deficient, l_bar_star still carries the weight
/// value; when it is unsolvable, l_bar_star is 0.
struct MinWeight {
  double l_bar_star = 0.0;
  bool feasible = false;
  int rank = 0;
};

MinWeight min_weight_metric(const MatX& w, const SimplexOptions& opts = {});

}  // namespace pong
