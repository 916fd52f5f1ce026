#pragma once

#include <string>

#include "hybridreg/geom.hpp"

namespace hybridreg::io {

/// Fixed-format float printing. CSV/stdout use 9 significant digits; files
/// that feed recomputation checks (PLY, manifests) use 17 so doubles
/// round-trip exactly. Both are byte-stable across runs.
std::string fmt9(double v);
std::string fmt17(double v);

/// ASCII PLY with properties x, y, z (double, meters) and uchar motion_label
/// (0 = background, 1 = rigid foreground, 2 = non-rigid foreground).
void write_ply(const std::string& path, const geom::PointCloud& cloud);
geom::PointCloud read_ply(const std::string& path);

}  // namespace hybridreg::io
