#include "pong/vlp.hpp"

#include <Eigen/QR>

#include <cmath>

namespace pong {

SearchDirections SearchDirections::uniform(int n_dirs) {
  if (n_dirs < 3) throw InputError("need at least 3 search directions");
  SearchDirections s;
  s.dirs.resize(n_dirs);
  for (int k = 0; k < n_dirs; ++k) {
    const double ang = 2.0 * M_PI * k / n_dirs;
    s.dirs[k] = Vec2(std::cos(ang), std::sin(ang));
  }
  return s;
}

void SearchDirections::validate() const {
  const int n = size();
  if (n < 3) throw InputError("need at least 3 search directions");
  double total_turn = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec2& d = dirs[k];
    if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-9) {
      throw InputError("search directions must be unit vectors");
    }
    const Vec2& dn = dirs[(k + 1) % n];
    const double cross = d.x() * dn.y() - d.y() * dn.x();
    const double turn = std::atan2(cross, d.dot(dn));
    if (turn <= 1e-12) {
      throw InputError("search directions must be strictly counterclockwise");
    }
    total_turn += turn;
  }
  if (std::abs(total_turn - 2.0 * M_PI) > 1e-6) {
    throw InputError("search directions must wind exactly once");
  }
}

namespace {

// The dual sensitivity of a vertex program is trustworthy only when its
// multipliers are pinned by the active columns: theta, the cap slack, and
// every mean wrench lying on the optimal facet must determine all eight of
// them. The solver's degeneracy flags are useless for this: with an even
// side count each finger's mean wrenches satisfy identities such as
// w_0 - w_1 + w_2 - w_3 = 0, so optimal facets routinely carry more columns
// than a basis can hold and some sit at zero with zero reduced cost. Those
// dependencies hold for every contact placement, travel with the grasp, and
// leave the derivative intact; what actually breaks it is a facet too thin
// to fix the supporting hyperplane. Rank of the active columns separates the
// two cases.
bool dual_pinned(const WrenchModel& m, const Vec6& edge_col,
                 const LpSolution& sol) {
  const int n_w = m.n_wrenches();
  const VecX& y = sol.dual;
  const double y_scale = y.cwiseAbs().maxCoeff();
  std::vector<int> facet;
  for (int l = 0; l < n_w; ++l) {
    if (sol.z(1 + l) > 1e-9) {
      facet.push_back(l);
      continue;
    }
    const double rc = y.head(6).dot(m.w_bar.col(l)) + y(6);
    const double scale = 1.0 + y_scale * m.w_bar.col(l).cwiseAbs().maxCoeff();
    if (std::abs(rc) <= 1e-9 * scale) facet.push_back(l);
  }
  if (static_cast<int>(facet.size()) < 6) return false;
  // Uncapped optimum: the slack column fixes y(7) = 0 and the theta column
  // then reads edge_col . y(0:6) = 1, so uniqueness reduces to rank 7 of the
  // facet columns (with their convexity row) alongside the edge column.
  MatX M(7, static_cast<int>(facet.size()) + 1);
  for (std::size_t a = 0; a < facet.size(); ++a) {
    M.col(static_cast<int>(a)).head(6) = m.w_bar.col(facet[a]);
    M(6, static_cast<int>(a)) = 1.0;
  }
  M.col(static_cast<int>(facet.size())).head(6) = edge_col;
  M(6, static_cast<int>(facet.size())) = 0.0;
  Eigen::ColPivHouseholderQR<MatX> qr(M);
  qr.setThreshold(1e-7);
  return qr.rank() == 7;
}

}  // namespace

VertexSolve solve_vertex(const WrenchModel& m, int finger, const Vec2& dir,
                         double theta_max, const SimplexOptions& opts) {
  if (finger < 0 || finger >= m.n_fingers()) throw InputError("finger out of range");
  if (std::abs(dir.norm() - 1.0) > 1e-6) {
    throw InputError("search direction must be a unit vector");
  }
  if (!(theta_max > 0.0)) throw InputError("theta_max must be positive");

  const ContactDistribution& c = m.contacts[finger];
  const Vec3 d3 = dir.x() * c.tangent1 + dir.y() * c.tangent2;
  const int n_w = m.n_wrenches();

  // The cap lives inside the program (theta + s = theta_max, s >= 0): edges
  // that barely constrain theta would otherwise drive the tableau toward the
  // unbounded regime and lose the optimality certificate.
  LinearProgram lp;
  lp.objective = VecX::Zero(2 + n_w);
  lp.objective(0) = 1.0;
  lp.eq_matrix = MatX::Zero(8, 2 + n_w);
  lp.eq_matrix.block(0, 1, 6, n_w) = m.w_bar;
  lp.eq_matrix.row(6).segment(1, n_w).setOnes();
  lp.eq_matrix(7, 0) = 1.0;
  lp.eq_matrix(7, 1 + n_w) = 1.0;
  lp.eq_rhs = VecX::Zero(8);
  lp.eq_rhs(6) = 1.0;
  lp.eq_rhs(7) = theta_max;

  // An edge column T_j d depends on its generator only through the sine of
  // the angle between them, so an even-sided pyramid collides two edges into
  // the same program whenever the direction bisects a generator pair (with
  // four sides and eight uniform directions, every odd direction). Solve one
  // program per distinct column: the collisions persist under any contact
  // motion, and counting them as runner-ups would report a zero gap for a
  // minimum that is perfectly stable.
  std::vector<Vec6> cols(m.n_sides);
  std::vector<int> group(m.n_sides);
  for (int j = 0; j < m.n_sides; ++j) {
    cols[j] = m.t_maps[m.column(finger, j)] * d3;
    group[j] = j;
    for (int q = 0; q < j; ++q) {
      if (group[q] != q) continue;
      if ((cols[j] - cols[q]).cwiseAbs().maxCoeff() <=
          1e-9 * (1.0 + cols[q].cwiseAbs().maxCoeff())) {
        group[j] = q;
        break;
      }
    }
  }

  VertexSolve out;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.n_sides; ++j) {
    if (group[j] != j) continue;
    lp.eq_matrix.block(0, 0, 6, 1) = cols[j];
    LpSolution sol = solve(lp, opts);
    if (sol.status == LpStatus::infeasible) {
      // theta = 0 already infeasible: the mean hull does not contain 0.
      out.theta = 0.0;
      out.feasible = false;
      out.binding_edge = j;
      out.lp = std::move(sol);
      return out;
    }
    if (sol.status != LpStatus::optimal) {
      throw NumericalError("vertex program did not certify: " + sol.diagnostics);
    }
    const double theta_j = sol.objective_value;
    if (theta_j < best) {
      second = best;
      best = theta_j;
      out.binding_edge = j;
      out.lp = std::move(sol);
    } else if (theta_j < second) {
      second = theta_j;
    }
  }

  out.feasible = true;
  out.second_gap = second - best;
  // Arithmetic in the solve runs at the scale of the unit-norm edge columns,
  // so a solution at the cap can drift by ulps of 1, not of theta_max.
  const double cap_tol = 1e-10 * std::max(1.0, theta_max);
  if (best >= theta_max - cap_tol) {
    out.theta = theta_max;
    out.capped = true;
    out.binding_edge = -1;
    out.sensitivity_safe = false;
    return out;
  }
  out.theta = best;
  out.sensitivity_safe = out.lp.status == LpStatus::optimal &&
                         out.lp.rows_dropped == 0 &&
                         out.second_gap > 1e-9 * std::max(1.0, best) &&
                         dual_pinned(m, cols[out.binding_edge], out.lp);
  return out;
}

double PolygonBuild::theta_cap(int finger) const {
  return caps.at(static_cast<std::size_t>(finger));
}

PolygonBuild build_polygons(const WrenchModel& m, const SearchDirections& dirs,
                            double theta_max, int threads,
                            const SimplexOptions& opts) {
  dirs.validate();
  const int n_f = m.n_fingers();
  const int n_v = dirs.size();

  PolygonBuild out;
  out.requested_theta_max = theta_max;
  out.caps.resize(n_f);
  for (int i = 0; i < n_f; ++i) {
    const auto& c = m.contacts[i];
    out.caps[i] =
        theta_max > 0.0 ? theta_max : 8.0 * std::max(c.sigma1, c.sigma2);
  }

  out.solves.assign(n_f, std::vector<VertexSolve>(n_v));
  parallel_for(static_cast<std::size_t>(n_f) * n_v, threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n_v;
    const int k = static_cast<int>(idx) % n_v;
    out.solves[i][k] = solve_vertex(m, i, dirs.dirs[k], out.caps[i], opts);
  });

  out.all_feasible = true;
  for (const auto& finger_solves : out.solves) {
    for (const auto& vs : finger_solves) {
      if (!vs.feasible) out.all_feasible = false;
    }
  }
  if (!out.all_feasible) return out;

  out.polygons.resize(n_f);
  for (int i = 0; i < n_f; ++i) {
    TangentPolygon& poly = out.polygons[i];
    poly.vertices.resize(n_v);
    poly.capped.resize(n_v);
    poly.sigma1 = m.contacts[i].sigma1;
    poly.sigma2 = m.contacts[i].sigma2;
    for (int k = 0; k < n_v; ++k) {
      poly.vertices[k] = out.solves[i][k].theta * dirs.dirs[k];
      poly.capped[k] = out.solves[i][k].capped;
    }
  }
  return out;
}

}  // namespace pong
