#pragma once

#include <string>
#include <vector>

#include "plumeswarm/convex_hull.hpp"
#include "plumeswarm/point_cloud.hpp"

namespace plume {

class UndefinedDirectionError : public std::runtime_error {
public:
    UndefinedDirectionError()
        : std::runtime_error("mean projected point coincides with the origin") {}
};
class EmptyCloudError : public std::runtime_error {
public:
    EmptyCloudError() : std::runtime_error("metric requires at least one point") {}
};

struct PlumeMetrics {
    int segment_index = 0;
    double t_start = 0.0;
    double volume_m3 = 0.0;             // V_s
    double deviation_deg = 0.0;         // Delta theta_s, (-180, 180]
    double average_height_m = 0.0;      // H-bar_s
    std::size_t point_count = 0;
    bool degenerate = false;            // hull undefined (empty / flat cloud)
};

struct HullVolume {
    double volume = 0.0;
    bool degenerate = false;
};

// Convex hull volume of the point positions. Throws TooFewPointsError below
// 4 points; coplanar clouds report zero with the degeneracy flag.
HullVolume convex_hull_volume(const std::vector<Vec3>& points);

// Signed angle (degrees, CCW positive) between the mean ground projection of
// the points relative to `origin` and the reference ground axis.
double angle_of_deviation(const std::vector<Vec3>& points, const Vec2& origin,
                          const Vec2& reference_axis);

double average_height(const std::vector<Vec3>& points);

PlumeMetrics compute_metrics(const PointCloud& cloud, int segment_index, double t_start,
                             const Vec2& origin, const Vec2& reference_axis);

std::vector<PlumeMetrics> metrics_timeseries(const std::vector<PointCloud>& clouds,
                                             const std::vector<double>& segment_starts,
                                             const Vec2& origin, const Vec2& reference_axis);

// Delimited table mirroring the three characterization panels.
std::string metrics_table(const std::vector<PlumeMetrics>& series);
std::vector<PlumeMetrics> parse_metrics_table(const std::string& text);

}  // namespace plume
