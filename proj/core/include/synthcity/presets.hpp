#ifndef SYNTHCITY_PRESETS_HPP
#define SYNTHCITY_PRESETS_HPP

#include <string>
#include <vector>

#include "synthcity/citygen.hpp"

namespace synthcity {

/// Ids of the styles compiled into the library ("a" through "i").
const std::vector<std::string>& builtin_style_ids();

/// Load a built-in style: its grammar, palette, and placement densities.
/// Throws Error(config_error) for an unknown id.
StyleConfig load_builtin_style(const std::string& id);

}  // namespace synthcity

#endif  // SYNTHCITY_PRESETS_HPP
