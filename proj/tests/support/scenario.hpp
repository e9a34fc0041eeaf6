#pragma once

// Builds workflow dependencies for the reference scenario in data/.

#include <memory>

#include "aerodesign/config.hpp"
#include "helpers.hpp"

namespace testing_support {

inline std::filesystem::path scenario_config_path() {
  return data_dir() / "configs" / "reference_scenario.yaml";
}

// The scenario config with its runs directory redirected to `runs`.
inline aerodesign::AppConfig scenario_config(const std::filesystem::path& runs) {
  auto cfg = aerodesign::load_app_config(scenario_config_path());
  cfg.runs_dir = runs;
  return cfg;
}

inline const char* kManagerReject =
    "The lift coefficient is still too low for this design; treat it as invalid and look for "
    "designs with more lift.";

}  // namespace testing_support
