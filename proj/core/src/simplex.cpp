#include "pong/simplex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

namespace pong {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// Tableau layout: rows 0..m-1 are constraints, row m is the cost row
// holding reduced costs; column n_std+m is the rhs, with T(m, rhs) equal
// to minus the current objective. Artificial columns live at n_std..n_std+m-1.

struct Engine {
  MatX& T;
  std::vector<int>& basis;
  std::vector<char>& banned;
  MatX clean;  // pristine [A | I | b] as loaded, for refactorization
  VecX cost_std;
  bool in_phase2 = false;
  int m = 0;
  int n_std = 0;
  int rhs = 0;
  int pivots = 0;

  Engine(SimplexWorkspace& ws) : T(ws.tableau), basis(ws.basis), banned(ws.banned) {}

  void load(const Eigen::Ref<const MatX>& A, const Eigen::Ref<const VecX>& b) {
    m = static_cast<int>(A.rows());
    n_std = static_cast<int>(A.cols());
    rhs = n_std + m;
    if (T.rows() != m + 1 || T.cols() != rhs + 1) T.resize(m + 1, rhs + 1);
    T.setZero();
    for (int i = 0; i < m; ++i) {
      const double s = b[i] < 0.0 ? -1.0 : 1.0;
      T.row(i).head(n_std) = s * A.row(i);
      T(i, rhs) = s * b[i];
      T(i, n_std + i) = 1.0;
    }
    basis.assign(m, 0);
    for (int i = 0; i < m; ++i) basis[i] = n_std + i;
    banned.assign(rhs, 0);
    in_phase2 = false;
    // Phase-1 reduced costs (maximize minus the artificial sum).
    T.row(m).setZero();
    for (int j = 0; j < n_std; ++j) T(m, j) = T.col(j).head(m).sum();
    T(m, rhs) = T.col(rhs).head(m).sum();
    clean = T.topRows(m);
  }

  // Rebuild every tableau row from the pristine data through a fresh
  // factorization of the current basis. Pivot arithmetic drifts, and on
  // degenerate problems the drift makes Bland's rule cycle; refreshed rows
  // restore the exact-arithmetic invariants the rule depends on.
  bool refresh() {
    MatX B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = clean.col(basis[i]);
    Eigen::FullPivLU<MatX> lu(B);
    if (!lu.isInvertible()) return false;
    T.topRows(m) = lu.solve(clean);
    for (int i = 0; i < m; ++i) {
      T.col(basis[i]).head(m).setZero();
      T(i, basis[i]) = 1.0;
    }
    T.row(m).setZero();
    if (in_phase2) {
      for (int i = 0; i < m; ++i) {
        const double cb = basis[i] < n_std ? cost_std[basis[i]] : 0.0;
        if (cb != 0.0) T.row(m) -= cb * T.row(i);
      }
      T.row(m).head(n_std) += cost_std.transpose();
    } else {
      for (int i = 0; i < m; ++i) {
        if (basis[i] >= n_std) T.row(m) += T.row(i);
      }
      for (int j = n_std; j < rhs; ++j) T(m, j) -= 1.0;
    }
    for (int i = 0; i < m; ++i) T(m, basis[i]) = 0.0;
    return true;
  }

  void pivot(int r, int e) {
    T.row(r) /= T(r, e);
    T(r, e) = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = T(i, e);
      if (f != 0.0) {
        T.row(i) -= f * T.row(r);
        T(i, e) = 0.0;
      }
    }
    if (basis[r] >= n_std) banned[basis[r]] = 1;  // artificials never re-enter
    basis[r] = e;
    ++pivots;
  }

  // 0 = optimal, 1 = pivoted, 2 = unbounded, 3 = pivot budget exhausted
  int step(const SimplexOptions& o) {
    if (pivots >= o.max_pivots) return 3;
    int e = -1;
    for (int j = 0; j < rhs; ++j) {
      if (!banned[j] && T(m, j) > o.pivot_tol) {
        e = j;
        break;
      }
    }
    if (e < 0) return 0;
    int r = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = T(i, e);
      if (a > o.pivot_tol) {
        // Degenerate rows can carry eps-size negative rhs after a refresh.
        const double ratio = std::max(T(i, rhs), 0.0) / a;
        if (ratio < best * (1.0 - 1e-12) - 1e-300) {
          best = ratio;
          r = i;
        } else if (ratio <= best * (1.0 + 1e-12) + 1e-300 && r >= 0 &&
                   basis[i] < basis[r]) {
          r = i;  // Bland tie-break on the leaving variable index
        }
      }
    }
    if (r < 0) return 2;
    pivot(r, e);
    return 1;
  }

  // Accept an optimal/unbounded claim only when it is made on freshly
  // refactorized rows; otherwise refresh and keep going. 4 = the basis went
  // singular or the claims kept flapping (both report as numerical failure).
  int run(const SimplexOptions& o) {
    int since_refresh = 0;
    int verified_claims = 0;
    for (;;) {
      const int rc = step(o);
      if (rc == 1) {
        if (++since_refresh >= 256) {
          if (!refresh()) return 4;
          since_refresh = 0;
        }
        continue;
      }
      if (rc == 3) return 3;
      if (since_refresh == 0) return rc;  // claim made on clean rows
      if (++verified_claims > 1000 || !refresh()) return 4;
      since_refresh = 0;
      // A column whose true reduced cost sits within drift of pivot_tol can
      // enter on fresh rows and vanish on drifted ones forever; Bland's rule
      // has no progress guarantee across rebuilds. An optimality claim whose
      // fresh-row violation stays inside the certification band is final
      // (for phase 1 only once the artificials are already at tolerance, so
      // a feasibility verdict is never cut short).
      if (rc == 0 && (in_phase2 || T(m, rhs) <= o.feas_tol)) {
        double worst = 0.0;
        for (int j = 0; j < rhs; ++j) {
          if (!banned[j]) worst = std::max(worst, T(m, j));
        }
        if (worst <= 1e-8 * (1.0 + std::abs(T(m, rhs)))) return 0;
      }
    }
  }

  bool phase1_feasible(const SimplexOptions& o) const {
    return T(m, rhs) <= o.feas_tol;
  }

  /// Row whose basic value lies furthest below -tol, or -1 when every row
  /// clears it. Only meaningful right after a refresh.
  int worst_negative_row(double tol) const {
    int r = -1;
    double most = -tol;
    for (int i = 0; i < m; ++i) {
      if (T(i, rhs) < most) {
        most = T(i, rhs);
        r = i;
      }
    }
    return r;
  }

  // The ratio test cannot pivot on entries in (0, pivot_tol], so each such
  // entry erodes its row's basic value by up to step * pivot_tol per pivot;
  // long degenerate paths walk the basis slightly primal-infeasible while
  // the reduced costs stay optimal. Dual-simplex repair: drive the most
  // negative basic value out against the entering column that keeps the
  // cost row nonpositive, deciding on freshly refactorized rows.
  bool dual_repair(const SimplexOptions& o, double feas_scale) {
    for (int guard = 0; guard < 4 * m + 16; ++guard) {
      if (!refresh()) return false;
      const int r = worst_negative_row(o.feas_tol * feas_scale);
      if (r < 0) return true;
      int e = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < rhs; ++j) {
        if (banned[j]) continue;
        const double a = T(r, j);
        if (a < -o.pivot_tol) {
          const double ratio = T(m, j) / a;  // >= 0 up to cost-row drift
          if (ratio < best) {
            best = ratio;
            e = j;
          }
        }
      }
      if (e < 0) return false;
      pivot(r, e);
    }
    return false;
  }

  // Pivot artificial variables out of the basis where possible. Rows that
  // cannot be cleared are redundant; their artificial stays basic at zero
  // and the row never pivots again (all structural entries below tolerance).
  bool drive_out_artificials(const SimplexOptions& o) {
    bool dropped = false;
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n_std) continue;
      // Largest eligible magnitude, not first above tolerance: this pivot is
      // basis repair, not progress, and a near-tolerance pivot element would
      // scale the row by its reciprocal.
      int e = -1;
      double mag = o.pivot_tol;
      for (int j = 0; j < n_std; ++j) {
        if (!banned[j] && std::abs(T(i, j)) > mag) {
          mag = std::abs(T(i, j));
          e = j;
        }
      }
      if (e >= 0) {
        pivot(i, e);
      } else {
        dropped = true;
      }
    }
    return dropped;
  }

  void set_costs(const Eigen::Ref<const VecX>& c) {
    cost_std = c;
    in_phase2 = true;
    T.row(m).setZero();
    T.row(m).head(n_std) = c.transpose();
    for (int j = n_std; j < rhs; ++j) banned[j] = 1;
    for (int i = 0; i < m; ++i) {
      const double cb = basis[i] < n_std ? c[basis[i]] : 0.0;
      if (cb != 0.0) T.row(m) -= cb * T.row(i);
    }
    // Basic columns can carry roundoff in the cost row; clear it so the
    // entering rule never selects a basic column.
    for (int i = 0; i < m; ++i) T(m, basis[i]) = 0.0;
  }
};

struct StdForm {
  MatX A;
  VecX b;
  VecX c;
  std::vector<int> plus_col;
  std::vector<int> minus_col;
};

StdForm to_standard(const LinearProgram& lp) {
  const int m = static_cast<int>(lp.eq_matrix.rows());
  const int n = static_cast<int>(lp.eq_matrix.cols());
  if (lp.eq_rhs.size() != m) throw InputError("simplex: rhs length != row count");
  if (lp.objective.size() != n)
    throw InputError("simplex: objective length != column count");
  if (!lp.nonnegative.empty() && static_cast<int>(lp.nonnegative.size()) != n)
    throw InputError("simplex: bounds length != column count");

  StdForm sf;
  sf.plus_col.resize(n);
  sf.minus_col.assign(n, -1);
  int n_std = n;
  for (int j = 0; j < n; ++j) {
    sf.plus_col[j] = j;
    const bool nn = lp.nonnegative.empty() || lp.nonnegative[j];
    if (!nn) sf.minus_col[j] = n_std++;
  }
  sf.A.resize(m, n_std);
  sf.A.leftCols(n) = lp.eq_matrix;
  sf.c.resize(n_std);
  sf.c.head(n) = lp.objective;
  for (int j = 0; j < n; ++j) {
    if (sf.minus_col[j] >= 0) {
      sf.A.col(sf.minus_col[j]) = -lp.eq_matrix.col(j);
      sf.c[sf.minus_col[j]] = -lp.objective[j];
    }
  }
  sf.b = lp.eq_rhs;
  return sf;
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts) {
  const StdForm sf = to_standard(lp);
  const int m = static_cast<int>(sf.A.rows());
  const int n = static_cast<int>(lp.eq_matrix.cols());
  const int n_std = static_cast<int>(sf.A.cols());

  LpSolution sol;
  SimplexWorkspace ws;
  Engine eng(ws);
  eng.load(sf.A, sf.b);

  int rc = eng.run(opts);
  if (rc == 3 || rc == 4) {
    sol.status = LpStatus::numerical_failure;
    sol.diagnostics = rc == 3 ? "phase 1 exceeded pivot budget"
                              : "phase 1 did not stabilize";
    return sol;
  }
  if (!eng.phase1_feasible(opts)) {
    sol.status = LpStatus::infeasible;
    std::ostringstream os;
    os << "phase 1 infeasibility " << eng.T(m, eng.rhs);
    sol.diagnostics = os.str();
    return sol;
  }
  sol.rows_dropped = eng.drive_out_artificials(opts);

  eng.set_costs(sf.c);
  const double feas_scale = 1.0 + sf.b.cwiseAbs().maxCoeff();
  for (int round = 0;; ++round) {
    rc = eng.run(opts);
    if (rc == 3 || rc == 4) {
      sol.status = LpStatus::numerical_failure;
      sol.diagnostics = rc == 3 ? "phase 2 exceeded pivot budget"
                                : "phase 2 did not stabilize";
      return sol;
    }
    if (rc == 2) {
      sol.status = LpStatus::unbounded;
      return sol;
    }
    // An optimality claim only inspects the cost row; confirm the basis is
    // also primal feasible on true values before accepting it.
    if (!eng.refresh()) {
      sol.status = LpStatus::numerical_failure;
      sol.diagnostics = "singular basis at termination";
      return sol;
    }
    if (eng.worst_negative_row(opts.feas_tol * feas_scale) < 0) break;
    if (round >= 4 || !eng.dual_repair(opts, feas_scale)) {
      sol.status = LpStatus::numerical_failure;
      sol.diagnostics = "optimal basis repair did not converge";
      return sol;
    }
  }

  // Recover primal and dual from the final basis with fresh factorizations
  // instead of the tableau, whose rhs column drifts over long pivot paths.
  // Structural basic columns over the non-redundant rows give square systems
  //   A_B(kept) x_B = b(kept)   and   A_B(kept)^T y = c_B;
  // redundant rows get multiplier 0 and nonbasic variables stay at 0.
  std::vector<int> kept;
  std::vector<int> basic_cols;
  for (int i = 0; i < m; ++i) {
    if (eng.basis[i] < n_std) {
      kept.push_back(i);
      basic_cols.push_back(eng.basis[i]);
    }
  }
  const int mk = static_cast<int>(kept.size());
  VecX x_std = VecX::Zero(n_std);
  sol.dual = VecX::Zero(m);
  if (mk > 0) {
    MatX ab(mk, mk);
    VecX bk(mk);
    VecX cb(mk);
    for (int a = 0; a < mk; ++a) {
      for (int b_ = 0; b_ < mk; ++b_) ab(a, b_) = sf.A(kept[a], basic_cols[b_]);
      bk[a] = sf.b[kept[a]];
      cb[a] = sf.c[basic_cols[a]];
    }
    Eigen::FullPivLU<MatX> lu(ab);
    Eigen::FullPivLU<MatX> lut(ab.transpose());
    if (!lu.isInvertible() || !lut.isInvertible()) {
      sol.status = LpStatus::numerical_failure;
      sol.diagnostics = "singular basis at termination";
      return sol;
    }
    // One step of iterative refinement apiece: the certificate below checks
    // residuals near machine precision and a single correction buys several
    // digits on the conditioning this population produces.
    VecX xk = lu.solve(bk);
    xk += lu.solve((bk - ab * xk).eval());
    for (int a = 0; a < mk; ++a) x_std[basic_cols[a]] = xk[a];
    VecX yk = lut.solve(cb);
    yk += lut.solve((cb - ab.transpose() * yk).eval());
    for (int a = 0; a < mk; ++a) sol.dual[kept[a]] = yk[a];
  }
  sol.z.resize(n);
  for (int j = 0; j < n; ++j) {
    sol.z[j] = x_std[sf.plus_col[j]];
    if (sf.minus_col[j] >= 0) sol.z[j] -= x_std[sf.minus_col[j]];
  }
  sol.objective_value = lp.objective.dot(sol.z);

  sol.basis = basic_cols;
  std::sort(sol.basis.begin(), sol.basis.end());

  // Certify before reporting success.
  const double bscale = 1.0 + sf.b.cwiseAbs().maxCoeff();
  const double cscale =
      1.0 + (n_std > 0 ? sf.c.cwiseAbs().maxCoeff() : 0.0);
  std::ostringstream bad;
  const VecX resid = lp.eq_matrix * sol.z - lp.eq_rhs;
  if (resid.cwiseAbs().maxCoeff() > opts.feas_tol * bscale)
    bad << "primal residual " << resid.cwiseAbs().maxCoeff() << "; ";
  for (int j = 0; j < n; ++j) {
    const bool nn = lp.nonnegative.empty() || lp.nonnegative[j];
    if (nn && sol.z[j] < -opts.feas_tol * bscale)
      bad << "bound violation at " << j << "; ";
  }
  const VecX s = sf.c - sf.A.transpose() * sol.dual;
  for (int j = 0; j < n_std; ++j) {
    if (s[j] > opts.feas_tol * cscale) {
      bad << "dual infeasibility at column " << j << "; ";
      break;
    }
  }
  for (int j = 0; j < n_std; ++j) {
    if (std::abs(s[j] * x_std[j]) >
        opts.feas_tol * cscale * bscale * 10.0) {
      bad << "complementary slackness at column " << j << "; ";
      break;
    }
  }
  const double gap = std::abs(sol.objective_value - sf.b.dot(sol.dual));
  if (gap > opts.duality_tol * (1.0 + std::abs(sol.objective_value)))
    bad << "duality gap " << gap << "; ";
  if (!bad.str().empty()) {
    sol.status = LpStatus::numerical_failure;
    sol.diagnostics = bad.str();
    return sol;
  }

  const double degen_tol = 1e-9 * bscale;
  for (int j : basic_cols) {
    if (x_std[j] <= degen_tol) sol.primal_degenerate = true;
  }
  for (int j = 0; j < n_std; ++j) {
    if (x_std[j] == 0.0 &&
        std::find(sol.basis.begin(), sol.basis.end(), j) == sol.basis.end()) {
      if (std::abs(s[j]) <= 1e-9 * cscale) sol.dual_degenerate = true;
    }
  }

  sol.status = LpStatus::optimal;
  return sol;
}

std::vector<LpSolution> solve_batch(const std::vector<LinearProgram>& lps,
                                    int threads, const SimplexOptions& opts) {
  std::vector<LpSolution> out(lps.size());
  parallel_for(lps.size(), threads,
               [&](std::size_t i) { out[i] = solve(lps[i], opts); });
  return out;
}

LpStatus feasibility(const Eigen::Ref<const MatX>& A,
                     const Eigen::Ref<const VecX>& b, SimplexWorkspace& ws,
                     const SimplexOptions& opts) {
  if (A.rows() != b.size()) throw InputError("feasibility: shape mismatch");
  Engine eng(ws);
  eng.load(A, b);
  const int rc = eng.run(opts);
  if (rc == 3 || rc == 4) return LpStatus::numerical_failure;
  return eng.phase1_feasible(opts) ? LpStatus::optimal : LpStatus::infeasible;
}

}  // namespace pong
