#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "plumeswarm/geometry.hpp"

namespace plume {

class TooFewPointsError : public std::runtime_error {
public:
    TooFewPointsError() : std::runtime_error("convex hull volume needs >= 4 points") {}
};

struct HullFace {
    std::array<int, 3> vertices{};  // indices into the input points
};

struct ConvexHull {
    std::vector<HullFace> faces;
    double volume = 0.0;
    bool degenerate = false;  // all input points coplanar or collinear
};

// Incremental quickhull. Degenerate inputs (coplanar/collinear) yield an
// empty face list, zero volume, and the degeneracy flag instead of an error.
ConvexHull convex_hull_3d(const std::vector<Vec3>& points);

}  // namespace plume
