#pragma once

#include <cstdint>
#include <vector>

#include "pong/wrench.hpp"

// Sampling-based ground truth. Draw tangent-plane normal perturbations per
// finger, rebuild the wrench set through the mean generator maps, and test
// force closure of each sampled set with a feasibility program. Every draw
// is a pure function of (seed, finger, sample), so estimates are bit-for-bit
// reproducible and independent of the thread count.

namespace pong {

struct McConfig {
  std::int64_t n_samples = 10000;
  std::uint64_t seed = 0;
  double confidence_z = 4.0;  // width multiplier for soundness verdicts
  int threads = 1;
  void validate() const;
};

struct McEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;  // sqrt(p_hat (1 - p_hat) / n_effective)
  std::int64_t n_success = 0;
  std::int64_t n_indeterminate = 0;  // solver could not certify; excluded
  std::int64_t n_effective = 0;      // n_samples - n_indeterminate
};

McEstimate estimate_pfc(const WrenchModel& m, const McConfig& cfg);
McEstimate estimate_pfc(const GraspSpec& grasp, const McConfig& cfg);

/// The tangent perturbations used by estimate_pfc, exposed for containment
/// checks and tests: element s is a 2 x n_fingers matrix whose column i is
/// (eps1, eps2) for finger i, already scaled by that finger's sigmas.
std::vector<MatX> sample_normal_sets(const WrenchModel& m, std::uint64_t seed,
                                     std::int64_t n);

/// For each sampled perturbation set, tests whether every column deviation
/// w_l - w_bar_l lies in the negated mean cone, and whether the sampled cone
/// contains the origin. The first property should always force the second;
/// a sample where it does not is a counterexample (an implementation bug).
struct ContainmentReport {
  std::int64_t n_samples = 0;
  std::int64_t n_hypothesis = 0;       // deviation condition held
  std::int64_t n_counterexamples = 0;  // held, yet closure failed
  std::int64_t n_indeterminate = 0;    // solver could not certify; excluded
  std::vector<std::int64_t> counterexample_indices;
};

ContainmentReport verify_containment(const WrenchModel& m,
                                     const std::vector<MatX>& eps_sets,
                                     int threads = 1);

}  // namespace pong
