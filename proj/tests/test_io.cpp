#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <pong/bound.hpp>
#include <pong/io.hpp>

#include <filesystem>
#include <string>

using namespace pong;
using njson = nlohmann::json;

namespace {

double max_abs_diff(const Vec3& a, const Vec3& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

GraspSpec mixed_grasp() {
  GraspSpec g;
  g.surface = ImplicitSurface::make_ellipsoid(Vec3(0.1, -0.2, 0.3),
                                              Vec3(1.0, 2.0 / 3.0, 0.7));
  ContactSpec surface_contact;
  surface_contact.position = Vec3(1.05, -0.21, 0.31);
  g.contacts.push_back(surface_contact);

  ContactDistribution d;
  d.position = Vec3(-0.9, -0.2, 0.3);
  d.mean_normal = Vec3(1.0, 0.0, 0.0);
  d.tangent1 = Vec3(0.0, 1.0, 0.0);
  d.tangent2 = Vec3(0.0, 0.0, 1.0);
  d.sigma1 = 0.1;
  d.sigma2 = 1.0 / 7.0;
  ContactSpec explicit_contact;
  explicit_contact.dist = d;
  explicit_contact.position = d.position;
  g.contacts.push_back(explicit_contact);

  g.mu = 0.1 + 1.0 / 3.0;
  g.n_sides = 6;
  g.n_dirs = 10;
  g.torque_origin = Vec3(0.01, 0.02, -0.03);
  g.curvature.k_curv = 17.5;
  g.curvature.eps = 3e-4;
  g.curvature.sigma_sq_min = 1e-7;
  return g;
}

GraspSpec tetrahedral_sphere_grasp() {
  GraspSpec g;
  g.surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  const double s = 1.0 / std::sqrt(3.0);
  for (const Vec3& p : {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s),
                        Vec3(-s, -s, s)}) {
    ContactSpec c;
    c.position = p;
    g.contacts.push_back(c);
  }
  return g;
}

}  // namespace

TEST_CASE("surface docs round-trip exactly for every kind") {
  const ImplicitSurface surfaces[] = {
      ImplicitSurface::make_sphere(Vec3(0.1, 0.2, -0.3), 2.0 / 3.0),
      ImplicitSurface::make_ellipsoid(Vec3::Zero(), Vec3(0.3, 1.1, 0.9)),
      ImplicitSurface::make_superquadric(Vec3(1e-3, 0, 0), Vec3(1, 0.5, 0.25),
                                         3.7),
      ImplicitSurface::make_rounded_box(Vec3(-0.5, 0.5, 0.0),
                                        Vec3(0.4, 0.6, 0.8), 6.0),
  };
  for (const ImplicitSurface& s : surfaces) {
    CAPTURE(to_string(s.kind));
    const std::string text = surface_to_json(s);
    const ImplicitSurface back = surface_from_json(text);
    CHECK(back.kind == s.kind);
    CHECK(max_abs_diff(back.center, s.center) == 0.0);
    CHECK(back.radius == s.radius);
    CHECK(max_abs_diff(back.semi_axes, s.semi_axes) == 0.0);
    CHECK(back.exponent == s.exponent);
    CHECK(max_abs_diff(back.half_extents, s.half_extents) == 0.0);
    CHECK(back.power == s.power);
    CHECK(surface_to_json(back) == text);
  }
}

TEST_CASE("grasp docs round-trip byte for byte") {
  const GraspSpec g = mixed_grasp();
  const std::string text = grasp_to_json(g);
  const GraspSpec back = grasp_from_json(text);
  CHECK(grasp_to_json(back) == text);

  REQUIRE(back.surface.has_value());
  CHECK(back.surface->kind == g.surface->kind);
  CHECK(max_abs_diff(back.surface->semi_axes, g.surface->semi_axes) == 0.0);
  CHECK(back.mu == g.mu);
  CHECK(back.n_sides == g.n_sides);
  CHECK(back.n_dirs == g.n_dirs);
  CHECK(max_abs_diff(back.torque_origin, g.torque_origin) == 0.0);
  CHECK(back.curvature.k_curv == g.curvature.k_curv);
  CHECK(back.curvature.eps == g.curvature.eps);
  CHECK(back.curvature.sigma_sq_min == g.curvature.sigma_sq_min);

  REQUIRE(back.contacts.size() == g.contacts.size());
  CHECK(!back.contacts[0].dist.has_value());
  CHECK(max_abs_diff(back.contacts[0].position, g.contacts[0].position) == 0.0);
  REQUIRE(back.contacts[1].dist.has_value());
  const ContactDistribution& d = *back.contacts[1].dist;
  const ContactDistribution& d0 = *g.contacts[1].dist;
  CHECK(max_abs_diff(d.position, d0.position) == 0.0);
  CHECK(max_abs_diff(d.mean_normal, d0.mean_normal) == 0.0);
  CHECK(max_abs_diff(d.tangent1, d0.tangent1) == 0.0);
  CHECK(max_abs_diff(d.tangent2, d0.tangent2) == 0.0);
  CHECK(d.sigma1 == d0.sigma1);
  CHECK(d.sigma2 == d0.sigma2);
  CHECK(max_abs_diff(back.contacts[1].position, d0.position) == 0.0);
}

TEST_CASE("a minimal grasp doc fills in defaults") {
  const GraspSpec defaults;
  const GraspSpec g = grasp_from_json(
      R"({"contacts": [{"position": [1, 0, 0], "from_curvature": true}]})");
  CHECK(!g.surface.has_value());
  CHECK(g.mu == defaults.mu);
  CHECK(g.n_sides == defaults.n_sides);
  CHECK(g.n_dirs == defaults.n_dirs);
  CHECK(max_abs_diff(g.torque_origin, defaults.torque_origin) == 0.0);
  CHECK(g.curvature.k_curv == defaults.curvature.k_curv);
  REQUIRE(g.contacts.size() == 1);
  CHECK(!g.contacts[0].dist.has_value());

  // a serialized no-surface spec stores an explicit null
  GraspSpec no_surface = g;
  const std::string text = grasp_to_json(no_surface);
  CHECK(njson::parse(text)["surface"].is_null());
  CHECK(!grasp_from_json(text).surface.has_value());
}

TEST_CASE("parsers reject unknown keys, bad types, and malformed docs") {
  CHECK_THROWS_WITH_AS(grasp_from_json(R"({"contacts": [], "murr": 1})"),
                       doctest::Contains("murr"), InputError);
  CHECK_THROWS_AS(grasp_from_json("{\"contacts\": ["), InputError);
  CHECK_THROWS_AS(grasp_from_json(R"({"contacts": [], "mu": "high"})"),
                  InputError);
  CHECK_THROWS_AS(grasp_from_json(R"({"contacts": [], "n_sides": 4.5})"),
                  InputError);
  CHECK_THROWS_AS(grasp_from_json(R"({"contacts": [], "torque_origin": [0, 0]})"),
                  InputError);
  CHECK_THROWS_AS(
      grasp_from_json(R"({"contacts": [], "curvature": {"kappa": 1}})"),
      InputError);
  CHECK_THROWS_AS(grasp_from_json(R"({"contacts": 3})"), InputError);
  CHECK_THROWS_AS(grasp_from_json("[]"), InputError);

  CHECK_THROWS_WITH_AS(
      surface_from_json(
          R"({"kind": "sphere", "center": [0,0,0], "params": {"radius": 1}, "color": "red"})"),
      doctest::Contains("color"), InputError);
  CHECK_THROWS_AS(
      surface_from_json(
          R"({"kind": "sphere", "center": [0,0,0], "params": {"semi_axes": [1,1,1]}})"),
      InputError);
  CHECK_THROWS_AS(
      surface_from_json(R"({"kind": "torus", "center": [0,0,0], "params": {}})"),
      InputError);
  CHECK_THROWS_AS(surface_from_json(R"({"kind": "sphere", "center": [0,0,0]})"),
                  InputError);

  // a contact is either surface-derived or fully explicit, never a blend
  CHECK_THROWS_AS(
      grasp_from_json(
          R"({"contacts": [{"position": [1,0,0], "from_curvature": false}]})"),
      InputError);
  CHECK_THROWS_AS(
      grasp_from_json(
          R"({"contacts": [{"position": [1,0,0], "from_curvature": true, "sigma1": 0.1}]})"),
      InputError);
  CHECK_THROWS_AS(grasp_from_json(R"({"contacts": [{"position": [1,0,0]}]})"),
                  InputError);
}

TEST_CASE("polygons parse from a bare list or an annotated object") {
  const std::string bare = "[[0, 0], [1, 0], [0.5, 1]]";
  const std::vector<Vec2> tri = polygon_from_json(bare);
  REQUIRE(tri.size() == 3);
  CHECK(tri[2].x() == 0.5);

  const std::vector<Vec2> wrapped =
      polygon_from_json(R"({"vertices": [[0,0],[1,0],[0.5,1]]})");
  REQUIRE(wrapped.size() == 3);
  CHECK(wrapped[1].x() == 1.0);

  // annotations written by the polygon dumper are tolerated on input
  const std::vector<Vec2> annotated = polygon_from_json(
      R"({"finger": 0, "sigma1": 0.1, "sigma2": 0.2, "capped": [false, false, false],
          "vertices": [[0,0],[1,0],[0.5,1]]})");
  CHECK(annotated.size() == 3);

  CHECK_THROWS_WITH_AS(
      polygon_from_json(R"({"vertices": [[0,0],[1,0],[0.5,1]], "area": 1})"),
      doctest::Contains("area"), InputError);
  CHECK_THROWS_AS(polygon_from_json("[[0, 0], [1, 0]]"), InputError);
  CHECK_THROWS_AS(polygon_from_json("[[0, 0], [1, 0], [1]]"), InputError);
  CHECK_THROWS_AS(polygon_from_json("{}"), InputError);
}

TEST_CASE("dumped polygons can be fed back one element at a time") {
  EvalOptions opts;
  opts.keep_polygons = true;
  const BoundReport r = evaluate(tetrahedral_sphere_grasp(), {}, opts);
  REQUIRE(r.feasible);
  REQUIRE(r.polygons.has_value());
  REQUIRE(!r.polygons->empty());

  const njson dumped = njson::parse(polygons_to_json(*r.polygons));
  REQUIRE(dumped.size() == r.polygons->size());
  for (std::size_t i = 0; i < dumped.size(); ++i) {
    CHECK(dumped[i]["finger"] == static_cast<int>(i));
    CHECK(dumped[i]["sigma1"].get<double>() == (*r.polygons)[i].sigma1);
    const std::vector<Vec2> verts = polygon_from_json(dumped[i].dump());
    REQUIRE(verts.size() == (*r.polygons)[i].vertices.size());
    for (std::size_t k = 0; k < verts.size(); ++k) {
      CHECK(max_abs_diff(Vec3(verts[k].x(), verts[k].y(), 0),
                         Vec3((*r.polygons)[i].vertices[k].x(),
                              (*r.polygons)[i].vertices[k].y(), 0)) == 0.0);
    }
  }
}

TEST_CASE("sigma-field grasps refuse to serialize") {
  GraspSpec g = mixed_grasp();
  g.field = make_constant_field(0.1, 0.1);
  CHECK_THROWS_AS(grasp_to_json(g), InputError);
}

TEST_CASE("report serializers emit the documented keys") {
  BoundReport r;
  r.l_fc = 0.25;
  r.feasible = true;
  r.l_bar_star = 0.125;
  r.per_finger_probs = {0.5, 0.5};
  const njson jb = njson::parse(bound_report_to_json(r));
  for (const char* k : {"l_fc", "feasible", "l_bar_star", "per_finger_probs",
                        "quadrature_warning", "timing"}) {
    CAPTURE(k);
    CHECK(jb.contains(k));
  }
  CHECK(jb["l_fc"].get<double>() == 0.25);
  CHECK(jb["per_finger_probs"].size() == 2);
  CHECK(jb["timing"].contains("quadrature"));

  McEstimate e;
  e.p_hat = 0.75;
  e.std_err = 0.01;
  e.n_success = 750;
  e.n_indeterminate = 3;
  e.n_effective = 997;
  const njson jm = njson::parse(mc_estimate_to_json(e));
  for (const char* k :
       {"p_hat", "std_err", "n_success", "n_indeterminate", "n_effective"}) {
    CAPTURE(k);
    CHECK(jm.contains(k));
  }
  CHECK(jm["n_effective"].get<long long>() == 997);
}

TEST_CASE("synthesis traces serialize with a timing-free final block") {
  SynthConfig cfg;
  cfg.n_fingers = 3;
  cfg.max_iters = 3;
  cfg.seed = 11;
  const auto surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  const SynthTrace t = synthesize(surface, CurvatureParams{}, cfg);

  const njson j = njson::parse(synth_trace_to_json(t));
  REQUIRE(j.contains("iterates"));
  CHECK(j["iterates"].size() == t.iterates.size());
  CHECK(j["final_contacts"].size() == t.final_contacts.size());
  CHECK(j["gradient_fallbacks"].get<int>() == t.gradient_fallbacks);
  REQUIRE(j.contains("final"));
  CHECK(j["final"]["l_fc"].get<double>() == t.final_report.l_fc);
  CHECK(!j["final"].contains("timing"));
  const njson& first = j["iterates"][0];
  for (const char* k : {"contacts", "l_fc", "l_bar_star", "step", "accepted"}) {
    CAPTURE(k);
    CHECK(first.contains(k));
  }
}

TEST_CASE("atomic writes land complete and read back identically") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const std::string path = (dir / "pong_io_roundtrip.json").string();

  const std::string content = "{\"a\": 1}\nsecond line\n";
  write_text_file_atomic(path, content);
  CHECK(read_text_file(path) == content);
  CHECK(!fs::exists(path + ".tmp"));

  // overwrite must replace, not append
  write_text_file_atomic(path, "short\n");
  CHECK(read_text_file(path) == "short\n");
  fs::remove(path);

  CHECK_THROWS_AS(read_text_file((dir / "pong_io_missing.json").string()),
                  InputError);
}
