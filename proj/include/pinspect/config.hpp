#pragma once

#include <filesystem>
#include <optional>

#include "pinspect/match.hpp"
#include "pinspect/pincheck.hpp"
#include "pinspect/pinseg.hpp"
#include "pinspect/viewsel.hpp"

namespace pinspect {

// Every tunable of the pipeline with its default. A config file overrides
// any subset; flags override single values on top.
struct Config {
  PinholeCamera camera;  // 1024x1024, f = 1733 px, principal point center
  double working_distance = 0.15;

  SweepSpec sweep;                    // -20..20 deg, step 5
  FeasibilityThresholds feasibility;  // v_min 0.95, o_max 0.05
  std::optional<std::vector<InspectionPoseCandidate>> candidates;  // else the six defaults

  MatchConfig match;

  ClassifyParams classify;  // rn_factor 2.5, lambda_ratio 4, r_max 1.5 mm
  size_t cloud_points = 8192;
  size_t knn = 15;
  uint64_t seed = 7;

  InspectConfig inspect;
  RenderOptions render;  // shading for template generation and expected renders

  double mesh_unit_scale = 1.0;
};

Config default_config();
void save_config(const Config& config, const std::filesystem::path& path);
Config load_config(const std::filesystem::path& path);

}  // namespace pinspect
