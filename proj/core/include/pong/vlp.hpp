#pragma once

#include <limits>
#include <vector>

#include "pong/simplex.hpp"
#include "pong/wrench.hpp"

namespace pong {

/// Planar search directions, unit length and strictly counterclockwise,
/// winding exactly once.
struct SearchDirections {
  std::vector<Vec2> dirs;

  static SearchDirections uniform(int n_dirs);
  void validate() const;
  int size() const { return static_cast<int>(dirs.size()); }
};

/// Largest step theta along one tangent direction of one finger such that
/// every friction-pyramid edge's wrench deviation stays absorbable by the
/// mean hull: per edge j, maximize theta subject to
///   theta (T_j d) + w_bar alpha = 0, alpha >= 0, sum alpha = 1,
///   theta <= theta_max,
/// then take the minimum over edges. The cap is part of each edge program so
/// that weakly constrained edges stay bounded and well conditioned.
struct VertexSolve {
  double theta = 0.0;
  bool feasible = false;  // false iff the mean grasp is not force closure
  bool capped = false;
  int binding_edge = -1;  // argmin edge; -1 when the cap binds
  double second_gap = std::numeric_limits<double>::infinity();
  LpSolution lp;          // solution of the binding edge's program
  bool sensitivity_safe = false;  // analytic LP sensitivity is trustworthy
};

VertexSolve solve_vertex(const WrenchModel& m, int finger, const Vec2& dir,
                         double theta_max, const SimplexOptions& opts = {});

/// Conservative perturbation region of one finger in its tangent plane:
/// vertex k is theta_k * dir_k, counterclockwise, star shaped about 0.
struct TangentPolygon {
  std::vector<Vec2> vertices;
  std::vector<bool> capped;
  Vec2 mean = Vec2::Zero();
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct PolygonBuild {
  std::vector<TangentPolygon> polygons;        // empty unless all_feasible
  std::vector<std::vector<VertexSolve>> solves;  // [finger][direction]
  bool all_feasible = false;
  double theta_cap(int finger) const;  // the cap used for that finger
  double requested_theta_max = 0.0;
  std::vector<double> caps;  // resolved per-finger caps
};

/// theta_max <= 0 selects the per-finger default cap 8 max(sigma1, sigma2);
/// a positive value applies to every finger.
PolygonBuild build_polygons(const WrenchModel& m, const SearchDirections& dirs,
                            double theta_max = 0.0, int threads = 1,
                            const SimplexOptions& opts = {});

}  // namespace pong
