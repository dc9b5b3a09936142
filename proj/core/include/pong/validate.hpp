#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pong {

/// One numbered property check of the release suite.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string details;   // deterministic for a fixed seed
  double seconds = 0.0;  // wall clock; excluded from the serialized report
};

struct ValidationReport {
  std::vector<CriterionResult> criteria;
  bool all_passed = false;
  std::uint64_t seed = 0;
  bool quick = false;
};

/// Runs the numbered property suite: quadrature oracles, bound soundness
/// against sampling, polygon conservativeness, LP equivalences, gradient
/// checks, limit cases, and the uncertainty-field synthesis pull. `quick`
/// scales the sample counts down for smoke testing; the checks themselves
/// are unchanged. All randomness derives from `seed`, and the report is a
/// pure function of it: reruns reproduce every field except wall-clock
/// seconds.
ValidationReport run_validation(std::uint64_t seed, bool quick, int threads = 1);

/// Deterministic JSON rendering (no wall-clock fields): two runs with the
/// same seed produce byte-identical documents.
std::string validation_report_to_json(const ValidationReport& r);

}  // namespace pong
