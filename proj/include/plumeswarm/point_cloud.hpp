#pragma once

#include <string>
#include <vector>

#include "plumeswarm/geometry.hpp"

namespace plume {

enum class ScaleStatus { ReconstructionUnits, WorldMeters };

struct CloudPoint {
    Vec3 position{};
    Rgb color{};
};

struct PointCloud {
    std::vector<CloudPoint> points;
    ScaleStatus scale = ScaleStatus::ReconstructionUnits;
};

// ASCII PLY with x, y, z, red, green, blue (uchar) vertex properties.
void write_ply(const PointCloud& cloud, const std::string& path,
               const std::vector<std::string>& comments = {});
PointCloud read_ply(const std::string& path);

}  // namespace plume
