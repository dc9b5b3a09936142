#include "pong/wrench.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace pong {

std::vector<ContactDistribution> GraspSpec::resolve() const {
  if (contacts.empty()) throw InputError("grasp needs at least one contact");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InputError("friction coefficient must be nonnegative");
  }
  if (n_sides < 3) throw InputError("friction pyramid needs at least 3 sides");
  if (n_dirs < 3) throw InputError("polygon build needs at least 3 directions");

  std::vector<ContactDistribution> out;
  out.reserve(contacts.size());
  for (const ContactSpec& c : contacts) {
    if (c.dist) {
      c.dist->validate();
      out.push_back(*c.dist);
      continue;
    }
    if (!surface) {
      throw InputError("surface-derived contact requires a surface");
    }
    Vec3 x = c.position;
    if (!project_to_surface(*surface, x)) {
      throw InputError("contact position could not be projected onto the surface");
    }
    out.push_back(field ? contact_from_field(*surface, x, field)
                        : curvature_distribution(*surface, x, curvature));
  }
  return out;
}

WrenchModel build_wrench_model(std::span<const ContactDistribution> contacts,
                               double mu, int n_sides, const Vec3& torque_origin) {
  if (contacts.empty()) throw InputError("grasp needs at least one contact");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InputError("friction coefficient must be nonnegative");
  }
  if (n_sides < 3) throw InputError("friction pyramid needs at least 3 sides");

  WrenchModel m;
  m.mu = mu;
  m.n_sides = n_sides;
  m.torque_origin = torque_origin;
  m.contacts.assign(contacts.begin(), contacts.end());

  const int n_f = static_cast<int>(contacts.size());
  const int n_w = n_f * n_sides;
  m.w_bar.resize(6, n_w);
  m.t_maps.resize(n_w);
  m.generators.resize(n_w);

  for (int i = 0; i < n_f; ++i) {
    ContactDistribution& c = m.contacts[i];
    c.validate();
    c.mean_normal.normalize();
    const Mat3 arm = skew(c.position - torque_origin);
    for (int j = 0; j < n_sides; ++j) {
      const double ang = 2.0 * M_PI * j / n_sides;
      const Vec3 g = std::cos(ang) * c.tangent1 + std::sin(ang) * c.tangent2;
      const Mat3 friction = Mat3::Identity() + mu * skew(g);
      Mat6x3 T;
      T.topRows<3>() = friction;
      T.bottomRows<3>() = arm * friction;
      const int l = i * n_sides + j;
      m.generators[l] = g;
      m.t_maps[l] = T;
      m.w_bar.col(l) = T * c.mean_normal;
    }
  }
  return m;
}

MatX perturbed_wrenches(const WrenchModel& m, std::span<const double> eps1,
                        std::span<const double> eps2) {
  const int n_f = m.n_fingers();
  if (static_cast<int>(eps1.size()) != n_f || static_cast<int>(eps2.size()) != n_f) {
    throw InputError("need one epsilon pair per finger");
  }
  MatX w(6, m.n_wrenches());
  for (int i = 0; i < n_f; ++i) {
    const ContactDistribution& c = m.contacts[i];
    const Vec3 n = c.mean_normal + eps1[i] * c.tangent1 + eps2[i] * c.tangent2;
    for (int j = 0; j < m.n_sides; ++j) {
      const int l = m.column(i, j);
      w.col(l) = m.t_maps[l] * n;
    }
  }
  return w;
}

namespace {

int wrench_rank(const MatX& w) {
  if (w.cols() == 0) return 0;
  Eigen::JacobiSVD<MatX> svd(w);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double tol = 1e-9 * s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++r;
  }
  return r;
}

void check_wrench_matrix(const MatX& w) {
  if (w.rows() != 6) throw InputError("wrench matrix must have 6 rows");
  if (w.cols() < 1) throw InputError("wrench matrix must have at least one column");
  if (!w.allFinite()) throw InputError("wrench matrix must be finite");
}

}  // namespace

bool origin_in_hull(const MatX& w, const SimplexOptions& opts) {
  check_wrench_matrix(w);
  const int n = static_cast<int>(w.cols());
  MatX A(7, n);
  A.topRows(6) = w;
  A.row(6).setOnes();
  VecX b = VecX::Zero(7);
  b(6) = 1.0;
  SimplexWorkspace ws;
  const LpStatus st = feasibility(A, b, ws, opts);
  if (st == LpStatus::optimal) return true;
  if (st == LpStatus::infeasible) return false;
  throw NumericalError("hull membership test did not certify");
}

MinWeight min_weight_metric(const MatX& w, const SimplexOptions& opts) {
  check_wrench_matrix(w);
  const int n = static_cast<int>(w.cols());

  // Variables z = (t, alpha, u), all nonnegative:
  //   w alpha = 0,  sum alpha = 1,  alpha_l - t - u_l = 0.
  const int rows = 7 + n;
  const int cols = 1 + 2 * n;
  LinearProgram lp;
  lp.eq_matrix = MatX::Zero(rows, cols);
  lp.eq_rhs = VecX::Zero(rows);
  lp.objective = VecX::Zero(cols);
  lp.objective(0) = 1.0;
  lp.eq_matrix.block(0, 1, 6, n) = w;
  lp.eq_matrix.block(6, 1, 1, n).setOnes();
  lp.eq_rhs(6) = 1.0;
  for (int l = 0; l < n; ++l) {
    lp.eq_matrix(7 + l, 0) = -1.0;
    lp.eq_matrix(7 + l, 1 + l) = 1.0;
    lp.eq_matrix(7 + l, 1 + n + l) = -1.0;
  }

  MinWeight out;
  out.rank = wrench_rank(w);
  const LpSolution sol = solve(lp, opts);
  if (sol.status == LpStatus::infeasible) {
    out.l_bar_star = 0.0;
    out.feasible = false;
    return out;
  }
  if (sol.status != LpStatus::optimal) {
    throw NumericalError("min-weight solve did not certify: " + sol.diagnostics);
  }
  out.l_bar_star = static_cast<double>(n) * sol.objective_value;
  out.feasible = out.rank == 6;
  return out;
}

}  // namespace pong
