#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aerodesign {

struct Resource {
  std::string name;
  std::string version;
  // True for texts reproduced word for word from the source study (the two
  // ontologist prompts and the kickoff prompt); false for texts written for
  // this project.
  bool verbatim = false;
  std::string text;
};

// Named prompt resources:
//   systems_engineer_kg, design_engineer_kg  ontologist prompts per agent KG
//   manager_kickoff                          the Manager's kickoff prompt
//   systems_engineer_role                    reviewer / requirements role
//   design_engineer_role                     revisor role
// Throws Error(config.invalid) for an unknown name.
const Resource& resource(std::string_view name);
const std::string& resource_text(std::string_view name);
std::vector<std::string> resource_names();

}  // namespace aerodesign
