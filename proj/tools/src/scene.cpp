#include "jhol/cli/scene.hpp"

#include "jhol/errors.hpp"
#include "jhol/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace jhol::cli {

namespace {

using json = nlohmann::json;

const std::array<std::string, 11> kSections{"validate", "split",   "degree", "axioms", "disk",  "foliate",
                                            "trivialize", "carleman", "zeroset", "index", "hartogs"};

Box read_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("box must be an array of 4 [lo, hi] pairs", 0);
  Box b;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_array() || j[i].size() != 2) throw ParseError("box interval must be [lo, hi]", 0);
    b.lo[i] = j[i][0].get<double>();
    b.hi[i] = j[i][1].get<double>();
    if (!(b.lo[i] < b.hi[i])) throw ValidationError("box interval " + std::to_string(i + 1) + " is empty");
  }
  return b;
}

std::array<FieldExpr, 16> read_entries(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 16) throw ParseError(std::string(what) + " needs 16 expression strings", 0);
  std::array<FieldExpr, 16> e;
  for (std::size_t i = 0; i < 16; ++i) e[i] = parse(j[i].get<std::string>());
  return e;
}

AlmostComplexStructure read_j(const json& j, const Box& box, std::string& kind) {
  if (j.is_string()) {
    if (j.get<std::string>() != "standard") throw ParseError("unknown builtin J \"" + j.get<std::string>() + "\"", 0);
    kind = "standard";
    return AlmostComplexStructure::standard(box);
  }
  if (j.is_array()) {
    kind = "entries";
    return AlmostComplexStructure(read_entries(j, "J"), box);
  }
  if (!j.is_object() || j.size() != 1) throw ParseError("J must be \"standard\", 16 strings or a one-key object", 0);
  const auto& [key, v] = *j.items().begin();
  kind = key;
  if (key == "conjugated") {
    if (!v.is_array() || v.size() != 4) throw ParseError("conjugated needs a 4x4 matrix", 0);
    Mat4 P;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) P(r, c) = v.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    if (std::abs(P.determinant()) < 1e-12) throw ValidationError("conjugated: matrix is singular");
    return AlmostComplexStructure::conjugated(P, box);
  }
  if (key == "perturbed") return perturbed_structure(v.at("eps").get<double>(), read_entries(v.at("E"), "perturbed.E"), box);
  if (key == "self_dual") return self_dual_structure(v.at("eps").get<double>(), parse_complex(v.at("h").get<std::string>()), box);
  throw ParseError("unknown J kind \"" + key + "\"", 0);
}

TwoForm read_alpha(const json& j, const Box& box, std::string& kind) {
  if (j.is_array()) {
    if (j.size() != 6) throw ParseError("alpha needs 6 coefficient strings (12, 13, 14, 23, 24, 34)", 0);
    std::array<FieldExpr, 6> c;
    for (std::size_t i = 0; i < 6; ++i) c[i] = parse(j[i].get<std::string>());
    kind = "coefficients";
    return TwoForm(c, box);
  }
  if (j.is_object() && j.contains("re_holo")) {
    kind = "re_holo";
    return re_holomorphic_form(parse_complex(j.at("re_holo").get<std::string>()), box);
  }
  throw ParseError("alpha must be 6 strings or {\"re_holo\": h}", 0);
}

} // namespace

const nlohmann::json& Scene::section(const std::string& name) const {
  static const json empty = json::object();
  return sections.contains(name) ? sections.at(name) : empty;
}

const TwoForm& Scene::require_alpha() const {
  if (!alpha) throw ValidationError("scene has no alpha");
  return *alpha;
}

TwoForm Scene::anti_invariant_alpha() const {
  const TwoForm& a = require_alpha();
  if (project) return split_form(a, J).anti_invariant;
  const GridCheck c = anti_invariance_residual(a, J, grid);
  if (!(c.max_residual <= 1e-9)) {
    std::ostringstream os;
    os << "alpha is not J-anti-invariant: residual " << c.max_residual << " at (" << c.worst[0] << ", " << c.worst[1]
       << ", " << c.worst[2] << ", " << c.worst[3] << "); set \"project\": true to use its anti-invariant part";
    throw ValidationError(os.str());
  }
  return a;
}

Scene parse_scene(const std::string& text, const Overrides& ov) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("scene must be a JSON object", 0);
  Scene s;
  try {
    for (const auto& [key, v] : j.items()) {
      const bool known = key == "box" || key == "J" || key == "alpha" || key == "project" || key == "grid" ||
                         key == "seed" || std::find(kSections.begin(), kSections.end(), key) != kSections.end();
      if (!known) throw ParseError("scene: unknown key \"" + key + "\"", 0);
    }
    if (j.contains("box")) s.box = read_box(j.at("box"));
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      s.grid.per_axis = g.value("per_axis", s.grid.per_axis);
      s.grid.random_points = g.value("random_points", s.grid.random_points);
    }
    if (ov.seed) s.seed = *ov.seed;
    if (ov.grid) s.grid.per_axis = *ov.grid;
    s.grid.seed = s.seed;
    s.J = read_j(j.value("J", json("standard")), s.box, s.j_kind);
    if (j.contains("alpha")) s.alpha = read_alpha(j.at("alpha"), s.box, s.alpha_kind);
    s.project = j.value("project", false);
    for (const std::string& name : kSections)
      if (j.contains(name)) s.sections[name] = j.at(name);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene: ") + e.what(), 0);
  }
  s.J.validate(s.grid, 1e-9);
  return s;
}

Scene load_scene(const std::filesystem::path& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read scene file " + path.string(), 0);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scene(os.str(), ov);
}

} // namespace jhol::cli
