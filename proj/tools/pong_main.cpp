// pong: evaluate the force-closure probability lower bound, validate it
// against sampling, integrate Gaussians over polygons, and synthesize
// grasps on implicit surfaces. JSON in, JSON out, deterministic under a
// single seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <pong/bound.hpp>
#include <pong/io.hpp>
#include <pong/mcoracle.hpp>
#include <pong/rng.hpp>
#include <pong/synth.hpp>
#include <pong/validate.hpp>

using njson = nlohmann::ordered_json;
using namespace pong;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso8601_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Every output document embeds the resolved configuration that produced
/// it. `timestamp` is omitted where byte-identical reruns are part of the
/// contract (validate).
njson make_manifest(const std::string& command, njson config,
                    const std::vector<std::uint64_t>& seeds, bool timestamp) {
  njson m;
  m["command"] = command;
  m["version"] = kVersion;
  m["schema"] = 1;
  m["seeds"] = seeds;
  if (timestamp) m["timestamp"] = iso8601_utc_now();
  m["config"] = std::move(config);
  return m;
}

void emit(const njson& doc) { std::fputs((doc.dump(2) + "\n").c_str(), stdout); }

struct GraspFlags {
  int dirs = 0;                       // > 0 overrides n_dirs
  std::vector<double> torque_origin;  // 3 values when given
  double k_curv = -1.0;
  double curv_eps = -1.0;
  double sigma_sq_min = -1.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dirs", dirs,
                    "Override the number of polygon search directions");
    cmd->add_option("--torque-origin", torque_origin,
                    "Override the torque reference point (x y z)")
        ->expected(3);
    cmd->add_option("--k-curv", k_curv, "Curvature-to-sigma gain override");
    cmd->add_option("--curv-eps", curv_eps,
                    "Curvature regularization exponent override");
    cmd->add_option("--sigma-sq-min", sigma_sq_min,
                    "Variance floor override for derived sigmas");
  }

  void apply(GraspSpec& g) const {
    if (dirs > 0) g.n_dirs = dirs;
    if (torque_origin.size() == 3) {
      g.torque_origin = Vec3(torque_origin[0], torque_origin[1], torque_origin[2]);
    }
    if (k_curv >= 0.0) g.curvature.k_curv = k_curv;
    if (curv_eps >= 0.0) g.curvature.eps = curv_eps;
    if (sigma_sq_min >= 0.0) g.curvature.sigma_sq_min = sigma_sq_min;
  }
};

int cmd_eval(const std::string& grasp_path, bool want_grad,
             const std::string& dump_polygons, bool csv, const GraspFlags& flags,
             double theta_max, int quad_nodes, int threads) {
  GraspSpec g = grasp_from_json(read_text_file(grasp_path));
  flags.apply(g);

  EvalOptions eo;
  eo.theta_max = theta_max;
  eo.threads = threads;
  eo.keep_polygons = !dump_polygons.empty();
  QuadratureConfig qc;
  if (quad_nodes > 0) qc.nodes_per_edge = quad_nodes;

  const BoundReport report = evaluate(g, qc, eo);

  njson gradient_block;
  if (want_grad) {
    gradient_block["method"] = "analytic";
    try {
      const VecX grad = gradient(g, {}, qc, eo);
      gradient_block["values"] = std::vector<double>(grad.data(), grad.data() + grad.size());
    } catch (const DegeneracyError& e) {
      const VecX grad = gradient_fd(g, {}, qc, eo);
      gradient_block["method"] = "central_difference";
      gradient_block["values"] = std::vector<double>(grad.data(), grad.data() + grad.size());
      gradient_block["note"] = e.what();
    } catch (const DomainError& e) {
      gradient_block["method"] = "unavailable";
      gradient_block["values"] = nullptr;
      gradient_block["note"] = e.what();
    }
  }

  if (!dump_polygons.empty() && report.polygons) {
    write_text_file_atomic(dump_polygons, polygons_to_json(*report.polygons));
  }

  njson config;
  config["grasp_file"] = grasp_path;
  config["grasp"] = njson::parse(grasp_to_json(g));
  config["theta_max"] = theta_max;
  config["quad_nodes"] = qc.nodes_per_edge;
  config["threads"] = threads;
  const njson manifest = make_manifest("eval", std::move(config), {}, true);

  if (csv) {
    // header + one row; the manifest goes to stderr so the table stays clean
    std::string header = "l_fc,feasible,l_bar_star,quadrature_warning";
    std::string row = njson(report.l_fc).dump() + "," +
                      (report.feasible ? "1" : "0") + "," +
                      njson(report.l_bar_star).dump() + "," +
                      (report.quadrature_warning ? "1" : "0");
    for (std::size_t i = 0; i < report.per_finger_probs.size(); ++i) {
      header += ",p_" + std::to_string(i);
      row += "," + njson(report.per_finger_probs[i]).dump();
    }
    std::fputs((header + "\n" + row + "\n").c_str(), stdout);
    std::fputs((njson{{"manifest", manifest}}.dump() + "\n").c_str(), stderr);
    return 0;
  }

  njson doc;
  doc["manifest"] = manifest;
  doc["report"] = njson::parse(bound_report_to_json(report));
  if (want_grad) doc["gradient"] = std::move(gradient_block);
  emit(doc);
  return 0;
}

int cmd_mc(const std::string& grasp_path, std::int64_t samples, std::uint64_t seed,
           bool check_bound, const GraspFlags& flags, int threads) {
  GraspSpec g = grasp_from_json(read_text_file(grasp_path));
  flags.apply(g);

  McConfig mc;
  mc.n_samples = samples;
  mc.seed = seed;
  mc.threads = threads;
  const McEstimate est = estimate_pfc(g, mc);

  njson config;
  config["grasp_file"] = grasp_path;
  config["grasp"] = njson::parse(grasp_to_json(g));
  config["samples"] = samples;
  config["threads"] = threads;
  njson doc;
  doc["manifest"] = make_manifest("mc", std::move(config), {seed}, true);
  doc["estimate"] = njson::parse(mc_estimate_to_json(est));

  bool sound = true;
  if (check_bound) {
    EvalOptions eo;
    eo.threads = threads;
    const BoundReport report = evaluate(g, {}, eo);
    const double limit = est.p_hat + 4.0 * est.std_err;
    sound = report.l_fc <= limit;
    doc["bound_check"] = {{"l_fc", report.l_fc},
                          {"p_hat_plus_4se", limit},
                          {"sound", sound}};
  }
  emit(doc);
  return sound ? 0 : 1;
}

UncertaintyField parse_field(const std::string& spec, const ImplicitSurface& surface,
                             njson& descriptor) {
  if (spec.rfind("equator:", 0) == 0) {
    const double scale = std::stod(spec.substr(8));
    const double z0 = surface.center.z();
    const double z_ref = surface.characteristic_radius();
    descriptor = {{"kind", "equator"},
                  {"sigma_base", 0.05},
                  {"scale", scale},
                  {"z0", z0},
                  {"z_ref", z_ref}};
    return make_equator_field(0.05, scale, z0, z_ref);
  }
  if (spec.rfind("constant:", 0) == 0) {
    double s1 = 0.0, s2 = 0.0;
    if (std::sscanf(spec.c_str() + 9, "%lf,%lf", &s1, &s2) != 2) {
      throw InputError("--uncertainty-field constant form is constant:<sigma1>,<sigma2>");
    }
    descriptor = {{"kind", "constant"}, {"sigma1", s1}, {"sigma2", s2}};
    return make_constant_field(s1, s2);
  }
  throw InputError("unknown --uncertainty-field \"" + spec +
                   "\" (supported: equator:<scale>, constant:<s1>,<s2>)");
}

int cmd_synth(const std::string& surface_path, int fingers, std::uint64_t seed,
              int restarts, const std::string& field_spec, const std::string& out,
              SynthConfig cfg, int threads) {
  const ImplicitSurface surface = surface_from_json(read_text_file(surface_path));
  cfg.n_fingers = fingers;
  cfg.seed = seed;

  njson field_descriptor = nullptr;
  UncertaintyField field;
  if (!field_spec.empty()) field = parse_field(field_spec, surface, field_descriptor);

  const SynthTrace trace =
      synthesize_best(surface, CurvatureParams{}, cfg, restarts, field, threads);

  njson config;
  config["surface_file"] = surface_path;
  config["surface"] = njson::parse(surface_to_json(surface));
  config["fingers"] = fingers;
  config["restarts"] = restarts;
  config["uncertainty_field"] = field_descriptor;
  config["max_iters"] = cfg.max_iters;
  config["step_init"] = cfg.step_init;
  config["l_bar_min"] = cfg.l_bar_min;
  config["min_contact_separation"] = cfg.min_contact_separation;
  config["mu"] = cfg.mu;
  config["n_sides"] = cfg.n_sides;
  config["n_dirs"] = cfg.n_dirs;
  config["threads"] = threads;

  njson doc;
  doc["manifest"] = make_manifest("synth", std::move(config), {seed}, true);
  doc["trace"] = njson::parse(synth_trace_to_json(trace));
  write_text_file_atomic(out, doc.dump(2) + "\n");

  std::printf("l_fc=%.8g l_bar_star=%.6g iterates=%zu fallbacks=%d -> %s\n",
              trace.final_report.l_fc, trace.final_report.l_bar_star,
              trace.iterates.size(), trace.gradient_fallbacks, out.c_str());
  return 0;
}

int cmd_integrate(const std::string& polygon_path, const std::vector<double>& sigma,
                  const std::vector<double>& mean, int quad_nodes) {
  const std::vector<Vec2> poly = polygon_from_json(read_text_file(polygon_path));
  PlanarGaussian g;
  g.sigma1 = sigma[0];
  g.sigma2 = sigma[1];
  if (mean.size() == 2) g.mean = Vec2(mean[0], mean[1]);
  QuadratureConfig qc;
  if (quad_nodes > 0) qc.nodes_per_edge = quad_nodes;
  const PolygonProbability p = polygon_probability(g, poly, qc);
  std::printf("%.12g\n", p.probability);
  return 0;
}

int cmd_validate(bool quick, std::uint64_t seed, int threads, const std::string& out) {
  std::fprintf(stderr, "running %s validation suite, seed %llu ...\n",
               quick ? "quick" : "full",
               static_cast<unsigned long long>(seed));
  const ValidationReport rep = run_validation(seed, quick, threads);
  for (const CriterionResult& c : rep.criteria) {
    std::fprintf(stderr, "[%s] %d %s (%.2fs)\n    %s\n",
                 c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), c.seconds,
                 c.details.c_str());
  }

  njson doc;
  doc["manifest"] =
      make_manifest("validate",
                    njson{{"quick", quick}, {"threads", threads}}, {seed},
                    /*timestamp=*/false);
  doc["report"] = njson::parse(validation_report_to_json(rep));
  const std::string text = doc.dump(2) + "\n";
  if (!out.empty()) {
    write_text_file_atomic(out, text);
  } else {
    std::fputs(text.c_str(), stdout);
  }
  return rep.all_passed ? 0 : 1;
}

// --------------------------------------------------------------------------
// Hidden certificate battery for the LP core: random feasible programs with
// verified optimality certificates, plus crafted infeasible and unbounded
// families that must be classified as such.

bool verify_certificate(const LinearProgram& lp, const LpSolution& sol) {
  const double scale = 1.0 + lp.eq_rhs.cwiseAbs().maxCoeff();
  if ((lp.eq_matrix * sol.z - lp.eq_rhs).cwiseAbs().maxCoeff() > 1e-6 * scale)
    return false;
  for (int j = 0; j < sol.z.size(); ++j) {
    const bool nn = lp.nonnegative.empty() || lp.nonnegative[j];
    if (nn && sol.z(j) < -1e-8) return false;
  }
  const VecX s = lp.objective - lp.eq_matrix.transpose() * sol.dual;
  for (int j = 0; j < s.size(); ++j) {
    const bool nn = lp.nonnegative.empty() || lp.nonnegative[j];
    if (nn ? s(j) > 1e-6 : std::abs(s(j)) > 1e-6) return false;
    if (nn && std::abs(s(j) * sol.z(j)) > 1e-5) return false;
  }
  const double gap = std::abs(lp.objective.dot(sol.z) - lp.eq_rhs.dot(sol.dual));
  return gap <= 1e-6 * (1.0 + std::abs(sol.objective_value));
}

int cmd_lp_selftest(std::uint64_t seed, int trials) {
  const CounterRng rng(seed, 77);
  std::uint64_t k = 0;
  const auto u = [&] { return rng.uniform(k++); };

  int optimal = 0, unbounded = 0, cert_failures = 0, misclassified = 0;
  for (int t = 0; t < trials; ++t) {
    const int m = 3 + static_cast<int>(rng.uniform_below(k++, 5));
    const int n = m + 1 + static_cast<int>(rng.uniform_below(k++, 9));
    LinearProgram lp;
    lp.eq_matrix = MatX::NullaryExpr(m, n, [&](int, int) { return 2.0 * u() - 1.0; });
    VecX x0 = VecX::NullaryExpr(n, [&](int) { return u() < 0.3 ? 0.0 : u(); });
    lp.eq_rhs = lp.eq_matrix * x0;
    lp.objective = VecX::NullaryExpr(n, [&](int) { return 2.0 * u() - 1.0; });
    lp.nonnegative.assign(n, true);
    if (t % 3 == 1) lp.nonnegative[static_cast<std::size_t>(rng.uniform_below(k++, n))] = false;

    const LpSolution sol = solve(lp);
    if (sol.status == LpStatus::optimal) {
      ++optimal;
      if (!verify_certificate(lp, sol)) ++cert_failures;
    } else if (sol.status == LpStatus::unbounded) {
      ++unbounded;  // legitimate for random objectives with a free variable
    } else {
      ++misclassified;  // feasible by construction, so anything else is wrong
    }
  }

  int crafted_bad = 0;
  for (int t = 0; t < trials / 4; ++t) {
    // identical rows, contradictory right-hand sides
    LinearProgram bad;
    const int n = 4 + static_cast<int>(rng.uniform_below(k++, 4));
    VecX row = VecX::NullaryExpr(n, [&](int) { return 2.0 * u() - 1.0; });
    bad.eq_matrix = MatX(2, n);
    bad.eq_matrix.row(0) = row;
    bad.eq_matrix.row(1) = row;
    bad.eq_rhs = VecX(2);
    bad.eq_rhs << 1.0, 2.0;
    bad.objective = VecX::Zero(n);
    if (solve(bad).status != LpStatus::infeasible) ++crafted_bad;

    // a payoff column no constraint touches
    LinearProgram ray;
    ray.eq_matrix = MatX::Zero(1, 3);
    ray.eq_matrix(0, 0) = 1.0;
    ray.eq_rhs = VecX::Ones(1);
    ray.objective = VecX::Zero(3);
    ray.objective(2) = 1.0;
    if (solve(ray).status != LpStatus::unbounded) ++crafted_bad;
  }

  std::printf("random programs: %d optimal (%d certificate failures), %d unbounded, %d misclassified\n",
              optimal, cert_failures, unbounded, misclassified);
  std::printf("crafted programs: %d misclassified\n", crafted_bad);
  const bool ok = cert_failures == 0 && misclassified == 0 && crafted_bad == 0;
  std::printf("%s\n", ok ? "selftest passed" : "selftest FAILED");
  return ok ? 0 : 1;
}

int fail_json(const char* type, const std::string& what, int code) {
  njson e;
  e["error"] = {{"type", type}, {"what", what}};
  std::fputs((e.dump() + "\n").c_str(), stderr);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"force-closure probability bounds for uncertain grasps"};
  app.set_version_flag("--version", std::string("pong ") + kVersion);
  app.require_subcommand(1);

  std::function<int()> action;

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate the closure probability bound of a grasp");
  {
    static std::string grasp_path, dump_polygons;
    static bool grad = false, json_out = false, csv_out = false;
    static double theta_max = 0.0;
    static int quad_nodes = 0, threads = 1;
    static GraspFlags flags;
    eval->add_option("grasp", grasp_path, "Grasp description JSON")->required();
    eval->add_flag("--grad", grad, "Also compute d l_fc / d contact positions");
    eval->add_option("--dump-polygons", dump_polygons,
                     "Write the per-finger tangent polygons to this file");
    eval->add_flag("--json", json_out, "JSON report on stdout (default)");
    eval->add_flag("--csv", csv_out, "One-row CSV report on stdout");
    eval->add_option("--theta-max", theta_max,
                     "Polygon vertex cap (<= 0 selects the per-finger default)");
    eval->add_option("--quad-nodes", quad_nodes, "Quadrature nodes per polygon edge");
    eval->add_option("--threads", threads, "Cap internal parallelism");
    flags.add_to(eval);
    eval->callback([&] {
      action = [&] {
        if (json_out && csv_out) throw InputError("choose one of --json / --csv");
        return cmd_eval(grasp_path, grad, dump_polygons, csv_out, flags, theta_max,
                        quad_nodes, threads);
      };
    });
  }

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the closure probability");
  {
    static std::string grasp_path;
    static std::int64_t samples = 10000;
    static std::uint64_t seed = 0;
    static bool check_bound = false;
    static int threads = 1;
    static GraspFlags flags;
    mc->add_option("grasp", grasp_path, "Grasp description JSON")->required();
    mc->add_option("--samples", samples, "Number of sampled normal sets");
    mc->add_option("--seed", seed, "Random seed")->envname("PONG_SEED");
    mc->add_flag("--check-bound", check_bound,
                 "Also evaluate the bound and verify l_fc <= p_hat + 4 SE");
    mc->add_option("--threads", threads, "Cap internal parallelism");
    flags.add_to(mc);
    mc->callback([&] {
      action = [&] {
        return cmd_mc(grasp_path, samples, seed, check_bound, flags, threads);
      };
    });
  }

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize contact positions maximizing the bound");
  {
    static std::string surface_path, field_spec, out;
    static int fingers = 3, restarts = 5, threads = 1;
    static std::uint64_t seed = 0;
    static SynthConfig cfg;
    synth->add_option("--surface", surface_path, "Surface description JSON")->required();
    synth->add_option("--fingers", fingers, "Number of contacts");
    synth->add_option("--seed", seed, "Random seed")->envname("PONG_SEED");
    synth->add_option("--restarts", restarts, "Independent restarts, best kept");
    synth->add_option("--uncertainty-field", field_spec,
                      "Sigma override: equator:<scale> or constant:<s1>,<s2>");
    synth->add_option("--out", out, "Trace output file")->required();
    synth->add_option("--iters", cfg.max_iters, "Ascent iteration cap");
    synth->add_option("--step", cfg.step_init, "Initial trial step");
    synth->add_option("--l-bar-min", cfg.l_bar_min,
                      "Minimum accepted closure margin");
    synth->add_option("--min-separation", cfg.min_contact_separation,
                      "Minimum pairwise contact distance");
    synth->add_option("--mu", cfg.mu, "Friction coefficient");
    synth->add_option("--sides", cfg.n_sides, "Friction pyramid sides");
    synth->add_option("--dirs", cfg.n_dirs, "Polygon search directions");
    synth->add_option("--threads", threads, "Parallel restarts");
    synth->callback([&] {
      action = [&] {
        return cmd_synth(surface_path, fingers, seed, restarts, field_spec, out,
                         cfg, threads);
      };
    });
  }

  // integrate
  auto* integrate = app.add_subcommand("integrate", "Gaussian mass over a planar polygon");
  {
    static std::string polygon_path;
    static std::vector<double> sigma, mean;
    static int quad_nodes = 0;
    integrate->add_option("--polygon", polygon_path, "Polygon JSON (vertex list)")
        ->required();
    integrate->add_option("--sigma", sigma, "Axis standard deviations (s1 s2)")
        ->expected(2)
        ->required();
    integrate->add_option("--mu", mean, "Gaussian mean (m1 m2), default 0 0")
        ->expected(2);
    integrate->add_option("--quad-nodes", quad_nodes, "Quadrature nodes per edge");
    integrate->callback([&] {
      action = [&] { return cmd_integrate(polygon_path, sigma, mean, quad_nodes); };
    });
  }

  // validate
  auto* validate = app.add_subcommand("validate", "Run the numbered property suite");
  {
    static bool quick = false;
    static std::uint64_t seed = 0;
    static int threads = 1;
    static std::string out;
    validate->add_flag("--quick", quick, "Scaled-down sample counts");
    validate->add_option("--seed", seed, "Random seed")->envname("PONG_SEED");
    validate->add_option("--threads", threads, "Cap internal parallelism");
    validate->add_option("--out", out, "Write the report here instead of stdout");
    validate->callback([&] {
      action = [&] { return cmd_validate(quick, seed, threads, out); };
    });
  }

  // hidden
  auto* selftest = app.add_subcommand("lp-selftest", "LP core certificate battery");
  selftest->group("");
  {
    static std::uint64_t seed = 0;
    static int trials = 400;
    selftest->add_option("--seed", seed, "Random seed")->envname("PONG_SEED");
    selftest->add_option("--trials", trials, "Number of random programs");
    selftest->callback([&] {
      action = [&] { return cmd_lp_selftest(seed, trials); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    return fail_json("input", e.what(), 2);
  }

  try {
    return action();
  } catch (const InputError& e) {
    return fail_json("input", e.what(), 2);
  } catch (const DomainError& e) {
    return fail_json("domain", e.what(), 2);
  } catch (const NumericalError& e) {
    return fail_json("numerical", e.what(), 3);
  } catch (const std::exception& e) {
    return fail_json("internal", e.what(), 3);
  }
}
