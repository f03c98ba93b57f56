#pragma once

#include <string>
#include <vector>

#include "finverify/drc.hpp"
#include "finverify/layout.hpp"

namespace fv {

// deterministic SVG rendering of a flattened layout with optional violation
// markers; identical inputs give byte-identical output
std::string svg_string(const flat_layout& layout, const std::vector<violation>& violations,
                       const tech_db& tech);

void render_svg(const flat_layout& layout, const std::vector<violation>& violations,
                const tech_db& tech, const std::string& path);

}  // namespace fv
