#pragma once

#include <string>
#include <vector>

#include "pong/common.hpp"

// Dense two-phase primal simplex with Bland's rule. Deliberately boring:
// deterministic pivot order, explicit tolerances, certified solutions.
// Problems in this codebase are tiny (tens of rows/columns), so a full
// tableau beats anything clever.

namespace pong {

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(LpStatus s);

/// maximize objective . z  subject to  eq_matrix z = eq_rhs, and
/// z_j >= 0 where nonnegative[j] (free otherwise).
/// An empty `nonnegative` means every variable is nonnegative.
struct LinearProgram {
  VecX objective;
  MatX eq_matrix;
  VecX eq_rhs;
  std::vector<bool> nonnegative;
};

/// Duals follow the convention: at an optimum, s = c - A^T y satisfies
/// s <= 0 on nonnegative variables and s = 0 on free ones, with
/// b . y = c . z. Free variables are split internally into x+ - x-;
/// `basis` indices refer to that internal layout (split columns appended
/// after the originals in order of appearance).
struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  VecX z;
  double objective_value = 0.0;
  std::vector<int> basis;
  VecX dual;
  bool primal_degenerate = false;
  bool dual_degenerate = false;
  bool rows_dropped = false;
  std::string diagnostics;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-8;
  double duality_tol = 1e-7;
  int max_pivots = 20000;
};

/// Reusable buffers for repeated solves of same-shaped problems.
struct SimplexWorkspace {
  MatX tableau;
  std::vector<int> basis;
  std::vector<char> banned;
};

LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {});

/// Element-wise identical to calling solve() in order.
std::vector<LpSolution> solve_batch(const std::vector<LinearProgram>& lps,
                                    int threads = 0,
                                    const SimplexOptions& opts = {});

/// Phase-1-only test of {A z = b, z >= 0}. Returns optimal (meaning
/// feasible), infeasible, or numerical_failure.
LpStatus feasibility(const Eigen::Ref<const MatX>& A,
                     const Eigen::Ref<const VecX>& b, SimplexWorkspace& ws,
                     const SimplexOptions& opts = {});

}  // namespace pong
