#pragma once

#include <string>
#include <vector>

#include "pong/mcoracle.hpp"
#include "pong/synth.hpp"

namespace pong {

// JSON document shapes (field names are part of the file contract, see the
// repository README):
//   surface  {"kind": "sphere"|"ellipsoid"|"superquadric"|"rounded_box",
//             "center": [x,y,z], "params": {...}}
//   grasp    {"surface": <surface doc or null>, "contacts": [<contact>...],
//             "mu": m, "n_sides": k, "n_dirs": d, "torque_origin": [x,y,z],
//             "curvature": {"k_curv": ..., "eps": ..., "sigma_sq_min": ...}}
//   contact  {"position": [x,y,z], "from_curvature": true}  (surface-derived)
//         or {"position": ..., "mean_normal": ..., "tangent1": ...,
//             "tangent2": ..., "sigma1": s1, "sigma2": s2}    (explicit)
//   polygon  [[x,y], ...] counterclockwise; an object with a "vertices" key
//            holding that list is accepted on input.
// Parsers reject unknown keys. Serializing doubles uses the shortest
// round-trip representation, so parse(serialize(x)) reproduces x exactly.

std::string surface_to_json(const ImplicitSurface& s);
ImplicitSurface surface_from_json(const std::string& text);

/// Throws InputError when the spec carries a sigma override field, since a
/// callable cannot be serialized.
std::string grasp_to_json(const GraspSpec& g);
GraspSpec grasp_from_json(const std::string& text);

std::vector<Vec2> polygon_from_json(const std::string& text);
std::string polygons_to_json(const std::vector<TangentPolygon>& polys);

std::string bound_report_to_json(const BoundReport& r);
std::string mc_estimate_to_json(const McEstimate& e);
std::string synth_trace_to_json(const SynthTrace& t);

std::string read_text_file(const std::string& path);
/// Writes to a sibling temp file, then renames over the target.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace pong
