#pragma once

#include <string>
#include <utility>
#include <vector>

namespace smc {

std::string version();

/// (name, version) of the numerical libraries compiled into the core.
std::vector<std::pair<std::string, std::string>> dependency_versions();

}  // namespace smc
