#pragma once

#include <string>
#include <string_view>

namespace vortex {

// Project version plus `git describe` of the build tree, when available.
std::string_view version_string();

}  // namespace vortex
