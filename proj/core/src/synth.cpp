#include "pong/synth.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "pong/rng.hpp"

namespace pong {

void SynthConfig::validate() const {
  if (n_fingers < 2) throw InputError("synthesis needs at least 2 fingers");
  if (max_iters < 0) throw InputError("max_iters must be nonnegative");
  if (!(step_init > 0.0)) throw InputError("step_init must be positive");
  if (!(l_bar_min >= 0.0)) throw InputError("l_bar_min must be nonnegative");
  if (!(min_contact_separation >= 0.0))
    throw InputError("min_contact_separation must be nonnegative");
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  if (n_sides < 3) throw InputError("n_sides must be at least 3");
  if (n_dirs < 3) throw InputError("n_dirs must be at least 3");
  if (init_attempts < 1) throw InputError("init_attempts must be positive");
}

namespace {

Vec3 unit_draw(const CounterRng& rng, std::uint64_t& idx) {
  for (;;) {
    const auto a = rng.normal_pair(idx++);
    const auto b = rng.normal_pair(idx++);
    const Vec3 v(a[0], a[1], b[0]);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

bool separated(const std::vector<Vec3>& pts, double min_sep) {
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      if ((pts[a] - pts[b]).norm() < min_sep) return false;
    }
  }
  return true;
}

GraspSpec make_spec(const ImplicitSurface& surface, const CurvatureParams& curv,
                    const SynthConfig& cfg, const UncertaintyField& field,
                    const std::vector<Vec3>& pts) {
  GraspSpec g;
  g.contacts.reserve(pts.size());
  for (const Vec3& p : pts) g.contacts.push_back({std::nullopt, p});
  g.mu = cfg.mu;
  g.n_sides = cfg.n_sides;
  g.n_dirs = cfg.n_dirs;
  g.torque_origin = surface.center;
  g.surface = surface;
  g.curvature = curv;
  g.field = field;
  return g;
}

std::vector<Vec3> initialize(const ImplicitSurface& surface,
                             const CurvatureParams& curv, const SynthConfig& cfg,
                             const UncertaintyField& field) {
  const CounterRng rng(cfg.seed, 0);
  std::uint64_t idx = 0;
  int failed_separation = 0;
  int failed_l_bar = 0;
  for (int attempt = 0; attempt < cfg.init_attempts; ++attempt) {
    std::vector<Vec3> pts;
    pts.reserve(cfg.n_fingers);
    bool placed_all = true;
    for (int f = 0; f < cfg.n_fingers && placed_all; ++f) {
      placed_all = false;
      for (int t = 0; t < 64; ++t) {
        Vec3 p = ray_to_surface(surface, unit_draw(rng, idx));
        pts.push_back(p);
        if (separated(pts, cfg.min_contact_separation)) {
          placed_all = true;
          break;
        }
        pts.pop_back();
      }
    }
    if (!placed_all) {
      ++failed_separation;
      continue;
    }
    const GraspSpec g = make_spec(surface, curv, cfg, field, pts);
    const WrenchModel m = build_wrench_model(g);
    const MinWeight mw = min_weight_metric(m.w_bar);
    if (!mw.feasible || mw.l_bar_star < cfg.l_bar_min) {
      ++failed_l_bar;
      continue;
    }
    return pts;
  }
  std::ostringstream os;
  os << "no feasible initialization in " << cfg.init_attempts << " attempts ("
     << failed_separation << " failed min_contact_separation = "
     << cfg.min_contact_separation << ", " << failed_l_bar
     << " failed l_bar_star >= " << cfg.l_bar_min << ")";
  throw NumericalError(os.str());
}

}  // namespace

SynthTrace synthesize(const ImplicitSurface& surface, const CurvatureParams& curv,
                      const SynthConfig& cfg, const UncertaintyField& field) {
  cfg.validate();
  curv.validate();
  const SearchDirections dirs = SearchDirections::uniform(cfg.n_dirs);
  const QuadratureConfig qcfg;
  EvalOptions opts;
  opts.theta_max = cfg.theta_max;
  opts.threads = cfg.threads;

  SynthTrace trace;
  std::vector<Vec3> x = initialize(surface, curv, cfg, field);
  BoundReport rep = evaluate(make_spec(surface, curv, cfg, field, x), dirs, qcfg, opts);
  trace.iterates.push_back({x, rep.l_fc, rep.l_bar_star, 0.0, true});

  double step = cfg.step_init;
  for (int it = 0; it < cfg.max_iters && step >= 1e-7; ++it) {
    const GraspSpec g = make_spec(surface, curv, cfg, field, x);
    VecX grad;
    try {
      grad = gradient(g, {}, dirs, qcfg, opts);
    } catch (const NumericalError&) {
      // degenerate or uncertifiable analytic sensitivity; step on differences
      grad = gradient_fd(g, {}, dirs, qcfg, opts);
      ++trace.gradient_fallbacks;
    }
    const double gnorm = grad.norm();
    if (gnorm < 1e-12) break;  // stationary

    std::vector<Vec3> trial = x;
    bool on_surface = true;
    for (int f = 0; f < cfg.n_fingers; ++f) {
      trial[f] += (step / gnorm) * grad.segment<3>(3 * f);
      if (!project_to_surface(surface, trial[f])) on_surface = false;
    }

    bool accept = false;
    double trial_l = 0.0;
    double trial_bar = 0.0;
    if (on_surface && separated(trial, cfg.min_contact_separation)) {
      try {
        BoundReport tr = evaluate(make_spec(surface, curv, cfg, field, trial), dirs,
                                  qcfg, opts);
        trial_l = tr.l_fc;
        trial_bar = tr.l_bar_star;
        if (tr.feasible && tr.l_bar_star >= cfg.l_bar_min && tr.l_fc > rep.l_fc) {
          accept = true;
          rep = std::move(tr);
        }
      } catch (const NumericalError&) {
        // an uncertifiable trial point is just a rejected step
      }
    }
    trace.iterates.push_back({trial, trial_l, trial_bar, step, accept});
    if (accept) {
      x = std::move(trial);
      step = std::min(step * 1.5, 8.0 * cfg.step_init);
    } else {
      step *= 0.5;
    }
  }

  trace.final_contacts = x;
  trace.final_report = std::move(rep);
  return trace;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::uint64_t z =
      seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(restart) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SynthTrace synthesize_best(const ImplicitSurface& surface, const CurvatureParams& curv,
                           const SynthConfig& cfg, int restarts,
                           const UncertaintyField& field, int threads) {
  if (restarts < 1) throw InputError("restarts must be positive");
  std::vector<std::optional<SynthTrace>> traces(restarts);
  std::vector<std::string> failures(restarts);
  parallel_for(static_cast<std::size_t>(restarts), threads, [&](std::size_t r) {
    SynthConfig c = cfg;
    c.seed = restart_seed(cfg.seed, static_cast<int>(r));
    c.threads = 1;
    try {
      traces[r] = synthesize(surface, curv, c, field);
    } catch (const std::exception& e) {
      failures[r] = e.what();
    }
  });
  int best = -1;
  for (int r = 0; r < restarts; ++r) {
    if (!traces[r]) continue;
    if (best < 0 || traces[r]->final_report.l_fc > traces[best]->final_report.l_fc) {
      best = r;
    }
  }
  if (best < 0) {
    throw NumericalError("every restart failed; last: " + failures[restarts - 1]);
  }
  return std::move(*traces[best]);
}

UncertaintyField make_constant_field(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw InputError("field sigmas must be positive");
  }
  return [sigma1, sigma2](const Vec3&) {
    FieldSigmas f;
    f.sigma1 = sigma1;
    f.sigma2 = sigma2;
    return f;
  };
}

UncertaintyField make_equator_field(double sigma_base, double scale, double z0,
                                    double z_ref) {
  if (!(sigma_base > 0.0)) throw InputError("sigma_base must be positive");
  if (!(scale >= 0.0)) throw InputError("scale must be nonnegative");
  if (!(z_ref > 0.0)) throw InputError("z_ref must be positive");
  return [sigma_base, scale, z0, z_ref](const Vec3& x) {
    const double u = (x.z() - z0) / z_ref;
    FieldSigmas f;
    f.sigma1 = sigma_base * (1.0 + scale * u * u);
    f.sigma2 = f.sigma1;
    f.d_sigma1 = Vec3(0.0, 0.0, sigma_base * scale * 2.0 * u / z_ref);
    f.d_sigma2 = f.d_sigma1;
    return f;
  };
}

}  // namespace pong
