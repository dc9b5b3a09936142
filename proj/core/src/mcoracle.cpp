#include "pong/mcoracle.hpp"

#include <cmath>
#include <span>

#include "pong/rng.hpp"
#include "pong/simplex.hpp"

namespace pong {

void McConfig::validate() const {
  if (n_samples < 1000) throw InputError("mc: n_samples must be at least 1000");
  if (!(confidence_z > 0.0) || !std::isfinite(confidence_z))
    throw InputError("mc: confidence_z must be positive and finite");
}

namespace {

void draw_eps(const WrenchModel& m, std::uint64_t seed, std::uint64_t sample,
              VecX& e1, VecX& e2) {
  const int n_f = m.n_fingers();
  e1.resize(n_f);
  e2.resize(n_f);
  for (int i = 0; i < n_f; ++i) {
    const auto z = CounterRng(seed, static_cast<std::uint64_t>(i)).normal_pair(sample);
    e1[i] = m.contacts[i].sigma1 * z[0];
    e2[i] = m.contacts[i].sigma2 * z[1];
  }
}

// 0 = no closure, 1 = closure, 2 = indeterminate
char closure_verdict(const MatX& w, MatX& a, VecX& b, SimplexWorkspace& ws) {
  const int n_w = static_cast<int>(w.cols());
  a.resize(7, n_w);
  a.topRows(6) = w;
  a.row(6).setOnes();
  b.resize(7);
  b.setZero();
  b(6) = 1.0;
  const LpStatus st = feasibility(a, b, ws);
  if (st == LpStatus::optimal) return 1;
  if (st == LpStatus::infeasible) return 0;
  return 2;
}

}  // namespace

McEstimate estimate_pfc(const WrenchModel& m, const McConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_samples);
  std::vector<char> verdict(n);

  parallel_for(n, cfg.threads, [&](std::size_t s) {
    thread_local SimplexWorkspace ws;
    thread_local MatX a;
    thread_local VecX b, e1, e2;
    draw_eps(m, cfg.seed, s, e1, e2);
    const MatX w = perturbed_wrenches(
        m, std::span<const double>(e1.data(), static_cast<std::size_t>(e1.size())),
        std::span<const double>(e2.data(), static_cast<std::size_t>(e2.size())));
    verdict[s] = closure_verdict(w, a, b, ws);
  });

  McEstimate est;
  for (const char v : verdict) {
    if (v == 1) ++est.n_success;
    if (v == 2) ++est.n_indeterminate;
  }
  est.n_effective = cfg.n_samples - est.n_indeterminate;
  if (est.n_effective <= 0)
    throw NumericalError("mc: every sample was indeterminate");
  est.p_hat = static_cast<double>(est.n_success) /
              static_cast<double>(est.n_effective);
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) /
                          static_cast<double>(est.n_effective));
  return est;
}

McEstimate estimate_pfc(const GraspSpec& grasp, const McConfig& cfg) {
  const auto dists = grasp.resolve();
  const WrenchModel m =
      build_wrench_model(dists, grasp.mu, grasp.n_sides, grasp.torque_origin);
  return estimate_pfc(m, cfg);
}

std::vector<MatX> sample_normal_sets(const WrenchModel& m, std::uint64_t seed,
                                     std::int64_t n) {
  if (n < 0) throw InputError("mc: negative sample count");
  std::vector<MatX> out(static_cast<std::size_t>(n));
  const int n_f = m.n_fingers();
  VecX e1, e2;
  for (std::int64_t s = 0; s < n; ++s) {
    draw_eps(m, seed, static_cast<std::uint64_t>(s), e1, e2);
    MatX es(2, n_f);
    es.row(0) = e1.transpose();
    es.row(1) = e2.transpose();
    out[static_cast<std::size_t>(s)] = std::move(es);
  }
  return out;
}

ContainmentReport verify_containment(const WrenchModel& m,
                                     const std::vector<MatX>& eps_sets,
                                     int threads) {
  const int n_f = m.n_fingers();
  const int n_w = m.n_wrenches();
  for (const MatX& es : eps_sets) {
    if (es.rows() != 2 || es.cols() != n_f)
      throw InputError("containment: perturbation set shape mismatch");
  }

  // 0 = vacuous, 1 = implication held, 2 = counterexample, 3 = indeterminate
  std::vector<char> result(eps_sets.size());
  parallel_for(eps_sets.size(), threads, [&](std::size_t s) {
    thread_local SimplexWorkspace ws;
    thread_local MatX a;
    thread_local VecX b, e1, e2;
    e1 = eps_sets[s].row(0).transpose();
    e2 = eps_sets[s].row(1).transpose();
    const MatX w = perturbed_wrenches(
        m, std::span<const double>(e1.data(), static_cast<std::size_t>(e1.size())),
        std::span<const double>(e2.data(), static_cast<std::size_t>(e2.size())));

    // Hypothesis: each deviation is absorbed by the negated mean cone,
    // i.e. mean-wrench convex weights reproduce -(w_l - w_bar_l).
    a.resize(7, n_w);
    a.topRows(6) = m.w_bar;
    a.row(6).setOnes();
    b.resize(7);
    bool hypothesis = true;
    for (int l = 0; l < n_w && hypothesis; ++l) {
      b.head(6) = -(w.col(l) - m.w_bar.col(l));
      b(6) = 1.0;
      const LpStatus st = feasibility(a, b, ws);
      if (st == LpStatus::infeasible) {
        hypothesis = false;
      } else if (st != LpStatus::optimal) {
        result[s] = 3;
        return;
      }
    }
    if (!hypothesis) {
      result[s] = 0;
      return;
    }

    MatX aw;
    VecX bw;
    const char closure = closure_verdict(w, aw, bw, ws);
    if (closure == 2) {
      result[s] = 3;
    } else {
      result[s] = closure == 1 ? 1 : 2;
    }
  });

  ContainmentReport rep;
  rep.n_samples = static_cast<std::int64_t>(eps_sets.size());
  for (std::size_t s = 0; s < result.size(); ++s) {
    if (result[s] == 1 || result[s] == 2) ++rep.n_hypothesis;
    if (result[s] == 2) {
      ++rep.n_counterexamples;
      rep.counterexample_indices.push_back(static_cast<std::int64_t>(s));
    }
    if (result[s] == 3) ++rep.n_indeterminate;
  }
  return rep;
}

}  // namespace pong
