#include "pong/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace pong {

namespace {

using json = nlohmann::ordered_json;

void expect_keys(const json& o, const char* what,
                 std::initializer_list<const char*> keys) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool known = false;
    for (const char* k : keys) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InputError(std::string(what) + ": unknown key \"" + it.key() + "\"");
    }
  }
}

const json& field(const json& o, const char* key, const char* what) {
  const auto it = o.find(key);
  if (it == o.end()) {
    throw InputError(std::string(what) + ": missing key \"" + key + "\"");
  }
  return *it;
}

double num(const json& o, const char* key, const char* what) {
  const json& v = field(o, key, what);
  if (!v.is_number()) {
    throw InputError(std::string(what) + ": \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

int integer(const json& o, const char* key, const char* what) {
  const json& v = field(o, key, what);
  if (!v.is_number_integer()) {
    throw InputError(std::string(what) + ": \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

json vec3_node(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number()) {
    throw InputError(std::string(what) + " must be an [x, y, z] number triple");
  }
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Vec3 vec3_field(const json& o, const char* key, const char* what) {
  return vec3_from(field(o, key, what), (std::string(what) + "." + key).c_str());
}

json surface_node(const ImplicitSurface& s) {
  json params;
  switch (s.kind) {
    case SurfaceKind::sphere:
      params["radius"] = s.radius;
      break;
    case SurfaceKind::ellipsoid:
      params["semi_axes"] = vec3_node(s.semi_axes);
      break;
    case SurfaceKind::superquadric:
      params["semi_axes"] = vec3_node(s.semi_axes);
      params["exponent"] = s.exponent;
      break;
    case SurfaceKind::rounded_box:
      params["half_extents"] = vec3_node(s.half_extents);
      params["power"] = s.power;
      break;
  }
  json j;
  j["kind"] = to_string(s.kind);
  j["center"] = vec3_node(s.center);
  j["params"] = std::move(params);
  return j;
}

ImplicitSurface surface_from_node(const json& j) {
  if (!j.is_object()) throw InputError("surface: expected an object");
  expect_keys(j, "surface", {"kind", "center", "params"});
  const json& kind_node = field(j, "kind", "surface");
  if (!kind_node.is_string()) throw InputError("surface: \"kind\" must be a string");
  const std::string kind = kind_node.get<std::string>();
  const Vec3 center = vec3_field(j, "center", "surface");
  const json& p = field(j, "params", "surface");
  if (!p.is_object()) throw InputError("surface: \"params\" must be an object");

  if (kind == "sphere") {
    expect_keys(p, "surface.params", {"radius"});
    return ImplicitSurface::make_sphere(center, num(p, "radius", "surface.params"));
  }
  if (kind == "ellipsoid") {
    expect_keys(p, "surface.params", {"semi_axes"});
    return ImplicitSurface::make_ellipsoid(
        center, vec3_field(p, "semi_axes", "surface.params"));
  }
  if (kind == "superquadric") {
    expect_keys(p, "surface.params", {"semi_axes", "exponent"});
    return ImplicitSurface::make_superquadric(
        center, vec3_field(p, "semi_axes", "surface.params"),
        num(p, "exponent", "surface.params"));
  }
  if (kind == "rounded_box") {
    expect_keys(p, "surface.params", {"half_extents", "power"});
    return ImplicitSurface::make_rounded_box(
        center, vec3_field(p, "half_extents", "surface.params"),
        num(p, "power", "surface.params"));
  }
  throw InputError("surface: unknown kind \"" + kind + "\"");
}

json contact_node(const ContactSpec& c) {
  json j;
  if (c.dist) {
    j["position"] = vec3_node(c.dist->position);
    j["mean_normal"] = vec3_node(c.dist->mean_normal);
    j["tangent1"] = vec3_node(c.dist->tangent1);
    j["tangent2"] = vec3_node(c.dist->tangent2);
    j["sigma1"] = c.dist->sigma1;
    j["sigma2"] = c.dist->sigma2;
  } else {
    j["position"] = vec3_node(c.position);
    j["from_curvature"] = true;
  }
  return j;
}

ContactSpec contact_from_node(const json& j) {
  if (!j.is_object()) throw InputError("contact: expected an object");
  ContactSpec c;
  if (j.contains("from_curvature")) {
    expect_keys(j, "contact", {"position", "from_curvature"});
    const json& f = field(j, "from_curvature", "contact");
    if (!f.is_boolean() || !f.get<bool>()) {
      throw InputError("contact: \"from_curvature\" must be true when present");
    }
    c.position = vec3_field(j, "position", "contact");
    return c;
  }
  expect_keys(j, "contact", {"position", "mean_normal", "tangent1", "tangent2",
                             "sigma1", "sigma2"});
  ContactDistribution d;
  d.position = vec3_field(j, "position", "contact");
  d.mean_normal = vec3_field(j, "mean_normal", "contact");
  d.tangent1 = vec3_field(j, "tangent1", "contact");
  d.tangent2 = vec3_field(j, "tangent2", "contact");
  d.sigma1 = num(j, "sigma1", "contact");
  d.sigma2 = num(j, "sigma2", "contact");
  c.dist = d;
  c.position = d.position;
  return c;
}

json parse_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw InputError(std::string(what) + ": malformed JSON");
  }
  return j;
}

json vec2_list(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const Vec2& p : pts) a.push_back(json::array({p.x(), p.y()}));
  return a;
}

}  // namespace

std::string surface_to_json(const ImplicitSurface& s) {
  return surface_node(s).dump(2) + "\n";
}

ImplicitSurface surface_from_json(const std::string& text) {
  return surface_from_node(parse_text(text, "surface"));
}

std::string grasp_to_json(const GraspSpec& g) {
  if (g.field) {
    throw InputError("grasp specs carrying a sigma override field cannot be serialized");
  }
  json j;
  j["surface"] = g.surface ? surface_node(*g.surface) : json(nullptr);
  json contacts = json::array();
  for (const ContactSpec& c : g.contacts) contacts.push_back(contact_node(c));
  j["contacts"] = std::move(contacts);
  j["mu"] = g.mu;
  j["n_sides"] = g.n_sides;
  j["n_dirs"] = g.n_dirs;
  j["torque_origin"] = vec3_node(g.torque_origin);
  j["curvature"] = {{"k_curv", g.curvature.k_curv},
                    {"eps", g.curvature.eps},
                    {"sigma_sq_min", g.curvature.sigma_sq_min}};
  return j.dump(2) + "\n";
}

GraspSpec grasp_from_json(const std::string& text) {
  const json j = parse_text(text, "grasp");
  if (!j.is_object()) throw InputError("grasp: expected an object");
  expect_keys(j, "grasp", {"surface", "contacts", "mu", "n_sides", "n_dirs",
                           "torque_origin", "curvature"});
  GraspSpec g;
  if (j.contains("surface") && !j["surface"].is_null()) {
    g.surface = surface_from_node(j["surface"]);
  }
  const json& contacts = field(j, "contacts", "grasp");
  if (!contacts.is_array()) throw InputError("grasp: \"contacts\" must be an array");
  for (const json& c : contacts) g.contacts.push_back(contact_from_node(c));
  if (j.contains("mu")) g.mu = num(j, "mu", "grasp");
  if (j.contains("n_sides")) g.n_sides = integer(j, "n_sides", "grasp");
  if (j.contains("n_dirs")) g.n_dirs = integer(j, "n_dirs", "grasp");
  if (j.contains("torque_origin")) {
    g.torque_origin = vec3_field(j, "torque_origin", "grasp");
  }
  if (j.contains("curvature")) {
    const json& c = j["curvature"];
    if (!c.is_object()) throw InputError("grasp: \"curvature\" must be an object");
    expect_keys(c, "grasp.curvature", {"k_curv", "eps", "sigma_sq_min"});
    if (c.contains("k_curv")) g.curvature.k_curv = num(c, "k_curv", "grasp.curvature");
    if (c.contains("eps")) g.curvature.eps = num(c, "eps", "grasp.curvature");
    if (c.contains("sigma_sq_min")) {
      g.curvature.sigma_sq_min = num(c, "sigma_sq_min", "grasp.curvature");
    }
  }
  return g;
}

std::vector<Vec2> polygon_from_json(const std::string& text) {
  json j = parse_text(text, "polygon");
  if (j.is_object()) {
    expect_keys(j, "polygon",
                {"vertices", "finger", "sigma1", "sigma2", "capped"});
    j = field(j, "vertices", "polygon");
  }
  if (!j.is_array() || j.size() < 3) {
    throw InputError("polygon: expected a list of at least 3 [x, y] vertices");
  }
  std::vector<Vec2> pts;
  pts.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw InputError("polygon: every vertex must be an [x, y] pair");
    }
    pts.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return pts;
}

std::string polygons_to_json(const std::vector<TangentPolygon>& polys) {
  json a = json::array();
  for (std::size_t i = 0; i < polys.size(); ++i) {
    json p;
    p["finger"] = i;
    p["sigma1"] = polys[i].sigma1;
    p["sigma2"] = polys[i].sigma2;
    p["vertices"] = vec2_list(polys[i].vertices);
    json capped = json::array();
    for (const bool c : polys[i].capped) capped.push_back(c);
    p["capped"] = std::move(capped);
    a.push_back(std::move(p));
  }
  return a.dump(2) + "\n";
}

std::string bound_report_to_json(const BoundReport& r) {
  json j;
  j["l_fc"] = r.l_fc;
  j["feasible"] = r.feasible;
  j["l_bar_star"] = r.l_bar_star;
  j["per_finger_probs"] = r.per_finger_probs;
  j["quadrature_warning"] = r.quadrature_warning;
  j["timing"] = {{"resolve", r.timing.resolve},   {"model", r.timing.model},
                 {"closure", r.timing.closure},   {"vertices", r.timing.vertices},
                 {"quadrature", r.timing.quadrature}, {"total", r.timing.total}};
  return j.dump(2) + "\n";
}

std::string mc_estimate_to_json(const McEstimate& e) {
  json j;
  j["p_hat"] = e.p_hat;
  j["std_err"] = e.std_err;
  j["n_success"] = e.n_success;
  j["n_indeterminate"] = e.n_indeterminate;
  j["n_effective"] = e.n_effective;
  return j.dump(2) + "\n";
}

std::string synth_trace_to_json(const SynthTrace& t) {
  json iterates = json::array();
  for (const SynthIterate& it : t.iterates) {
    json e;
    json contacts = json::array();
    for (const Vec3& c : it.contacts) contacts.push_back(vec3_node(c));
    e["contacts"] = std::move(contacts);
    e["l_fc"] = it.l_fc;
    e["l_bar_star"] = it.l_bar_star;
    e["step"] = it.step;
    e["accepted"] = it.accepted;
    iterates.push_back(std::move(e));
  }
  json j;
  j["iterates"] = std::move(iterates);
  json final_contacts = json::array();
  for (const Vec3& c : t.final_contacts) final_contacts.push_back(vec3_node(c));
  j["final_contacts"] = std::move(final_contacts);
  j["gradient_fallbacks"] = t.gradient_fallbacks;
  // the final report, minus its volatile timing block
  j["final"] = {{"l_fc", t.final_report.l_fc},
                {"feasible", t.final_report.feasible},
                {"l_bar_star", t.final_report.l_bar_star},
                {"per_finger_probs", t.final_report.per_finger_probs}};
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  if (!is.good() && !is.eof()) throw InputError("cannot read " + path);
  return os.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write " + tmp);
    os << content;
    os.flush();
    if (!os) throw InputError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw InputError("cannot move " + tmp + " into place");
  }
}

}  // namespace pong
