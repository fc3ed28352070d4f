#pragma once

#include "jhol/forms.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace jhol::cli {

// Command-line values that take precedence over the scene file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> tol;
};

struct Scene {
  Box box;
  std::string j_kind;  // standard, conjugated, perturbed, self_dual, entries
  AlmostComplexStructure J = AlmostComplexStructure::standard();
  std::optional<TwoForm> alpha;
  std::string alpha_kind;  // re_holo, coefficients
  bool project = false;
  GridSpec grid{9, 200, 0};
  std::uint64_t seed = 0;
  nlohmann::json sections;  // subcommand blocks, verbatim

  // Section `name`, or an empty object.
  const nlohmann::json& section(const std::string& name) const;
  // alpha, checked to be J-anti-invariant to 1e-9 on the grid (or projected
  // when `project` is set). Throws ValidationError.
  TwoForm anti_invariant_alpha() const;
  const TwoForm& require_alpha() const;
};

// Throws ParseError for malformed JSON or expressions and ValidationError for
// well-formed scenes that fail the load checks (box, J^2 = -I).
Scene parse_scene(const std::string& text, const Overrides& overrides = {});
Scene load_scene(const std::filesystem::path& path, const Overrides& overrides = {});

} // namespace jhol::cli
