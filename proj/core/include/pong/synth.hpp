#pragma once

#include <cstdint>
#include <vector>

#include "pong/bound.hpp"

namespace pong {

/// Settings for the reduced synthesis loop: contact positions move on an
/// implicit surface to maximize the bound, everything else is fixed.
struct SynthConfig {
  int n_fingers = 3;
  int max_iters = 60;
  double step_init = 0.1;  // initial trial displacement, 3n-vector norm
  double l_bar_min = 0.3;  // accepted iterates keep l_bar_star above this
  std::uint64_t seed = 0;
  double min_contact_separation = 0.05;

  double mu = 0.5;
  int n_sides = 4;
  int n_dirs = 8;
  double theta_max = 0.0;  // <= 0 selects the per-finger default cap
  int init_attempts = 200;
  int threads = 1;  // inner bound evaluations only

  void validate() const;
};

/// One optimizer trial. Rejected trials are recorded too (accepted = false);
/// their contacts are where the trial landed, not the retained iterate.
struct SynthIterate {
  std::vector<Vec3> contacts;
  double l_fc = 0.0;
  double l_bar_star = 0.0;
  double step = 0.0;  // 0 for the initialization entry
  bool accepted = false;
};

struct SynthTrace {
  std::vector<SynthIterate> iterates;  // iterates.front() is the init
  std::vector<Vec3> final_contacts;
  BoundReport final_report;
  int gradient_fallbacks = 0;  // iterations that used the difference fallback
};

/// Projected gradient ascent on the bound over contact positions constrained
/// to the surface. Initialization rejection-samples surface points until the
/// separation and l_bar_min constraints hold, then each iteration takes an
/// ambient step along the (tangential) gradient, Newton-projects back onto
/// the surface, and backtracks: a trial is accepted only if projection
/// converged, separations hold, l_bar_star >= l_bar_min, and the bound
/// strictly increased. Stops at max_iters or once the step falls below 1e-7.
/// When the analytic gradient reports a degeneracy the iteration falls back
/// to central differences and the trace counts it.
///
/// A non-empty `field` overrides the curvature sigmas, as in GraspSpec.
/// Throws NumericalError when no feasible initialization is found within
/// init_attempts; the message names the constraints that failed.
SynthTrace synthesize(const ImplicitSurface& surface, const CurvatureParams& curv,
                      const SynthConfig& cfg, const UncertaintyField& field = {});

/// Best of `restarts` independent runs (highest final bound, ties to the
/// lowest restart index), seeded by restart_seed(cfg.seed, r) and run in
/// parallel across `threads` with single-threaded inner evaluations.
/// Restarts whose initialization fails are skipped; throws NumericalError
/// only if every restart fails.
SynthTrace synthesize_best(const ImplicitSurface& surface, const CurvatureParams& curv,
                           const SynthConfig& cfg, int restarts = 5,
                           const UncertaintyField& field = {}, int threads = 1);

std::uint64_t restart_seed(std::uint64_t seed, int restart);

/// Position-independent sigma override with zero spatial gradient.
UncertaintyField make_constant_field(double sigma1, double sigma2);

/// Latitude-dependent override: both sigmas equal
///   sigma(x) = sigma_base * (1 + scale * ((z - z0) / z_ref)^2),
/// smallest on the plane z = z0 and growing toward the poles, with the
/// matching analytic gradient.
UncertaintyField make_equator_field(double sigma_base = 0.05, double scale = 10.0,
                                    double z0 = 0.0, double z_ref = 1.0);

}  // namespace pong
