#pragma once

#include <optional>
#include <vector>

#include "pong/gausspoly.hpp"
#include "pong/vlp.hpp"
#include "pong/wrench.hpp"

namespace pong {

/// Wall-clock seconds per stage of evaluate().
struct StageTiming {
  double resolve = 0.0;
  double model = 0.0;
  double closure = 0.0;
  double vertices = 0.0;
  double quadrature = 0.0;
  double total = 0.0;
};

struct EvalOptions {
  double theta_max = 0.0;  // <= 0 selects the per-finger default cap
  int threads = 1;
  bool keep_polygons = false;
};

/// Product lower bound on the probability that a grasp with Gaussian normal
/// uncertainty is force closure. per_finger_probs[i] is the Gaussian mass of
/// finger i's tangent polygon; l_fc is their product, and l_fc = 0 with
/// feasible = false when the mean grasp is not certified force closure.
struct BoundReport {
  double l_fc = 0.0;
  std::vector<double> per_finger_probs;
  bool feasible = false;
  double l_bar_star = 0.0;
  bool quadrature_warning = false;  // some polygon integral was clamped
  std::optional<std::vector<TangentPolygon>> polygons;
  StageTiming timing;
};

BoundReport evaluate(const GraspSpec& grasp, const SearchDirections& dirs,
                     const QuadratureConfig& qcfg = {}, const EvalOptions& opts = {});

inline BoundReport evaluate(const GraspSpec& grasp, const QuadratureConfig& qcfg = {},
                            const EvalOptions& opts = {}) {
  return evaluate(grasp, SearchDirections::uniform(grasp.n_dirs), qcfg, opts);
}

/// Contact indices whose positions are differentiated; empty selects all.
struct FreeParams {
  std::vector<int> contacts;
};

/// Analytic gradient of l_fc with respect to the selected contact positions,
/// three entries per contact in selection order. For surface-derived contacts
/// the returned block is the tangential gradient (its normal component is
/// zero): displacements are reprojected onto the surface before evaluation,
/// so only the tangential part of an ambient step is observable. Explicit
/// contacts get the full ambient gradient of their torque-arm dependence.
///
/// Throws DegeneracyError when an analytic derivative is ill-posed at the
/// query point (degenerate vertex program, near-equal principal curvatures,
/// tangent-gauge ties, near-flat curvature sigmas); callers should fall back
/// to gradient_fd. Throws DomainError when the mean grasp is not force
/// closure, since l_fc is identically 0 on that set's interior.
VecX gradient(const GraspSpec& grasp, const FreeParams& params,
              const SearchDirections& dirs, const QuadratureConfig& qcfg = {},
              const EvalOptions& opts = {});

inline VecX gradient(const GraspSpec& grasp, const FreeParams& params = {},
                     const QuadratureConfig& qcfg = {}, const EvalOptions& opts = {}) {
  return gradient(grasp, params, SearchDirections::uniform(grasp.n_dirs), qcfg, opts);
}

/// Central-difference fallback with the same selection, layout, and
/// reprojection semantics as gradient().
VecX gradient_fd(const GraspSpec& grasp, const FreeParams& params,
                 const SearchDirections& dirs, const QuadratureConfig& qcfg = {},
                 const EvalOptions& opts = {}, double step = 1e-5);

inline VecX gradient_fd(const GraspSpec& grasp, const FreeParams& params = {},
                        const QuadratureConfig& qcfg = {}, const EvalOptions& opts = {},
                        double step = 1e-5) {
  return gradient_fd(grasp, params, SearchDirections::uniform(grasp.n_dirs), qcfg, opts,
                     step);
}

}  // namespace pong
