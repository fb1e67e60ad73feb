#include "plumeswarm/plume_metrics.hpp"

#include <cmath>
#include <sstream>

namespace plume {

HullVolume convex_hull_volume(const std::vector<Vec3>& points) {
    ConvexHull hull = convex_hull_3d(points);
    return {hull.volume, hull.degenerate};
}

double angle_of_deviation(const std::vector<Vec3>& points, const Vec2& origin,
                          const Vec2& reference_axis) {
    if (points.empty()) throw EmptyCloudError();
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx = mx / points.size() - origin.x;
    my = my / points.size() - origin.y;
    if (std::sqrt(mx * mx + my * my) < 1e-9) throw UndefinedDirectionError();
    double angle = std::atan2(my, mx) - std::atan2(reference_axis.y, reference_axis.x);
    return wrap_deg(rad2deg(angle));
}

double average_height(const std::vector<Vec3>& points) {
    if (points.empty()) throw EmptyCloudError();
    double s = 0.0;
    for (const auto& p : points) s += p.z;
    return s / points.size();
}

PlumeMetrics compute_metrics(const PointCloud& cloud, int segment_index, double t_start,
                             const Vec2& origin, const Vec2& reference_axis) {
    PlumeMetrics m;
    m.segment_index = segment_index;
    m.t_start = t_start;
    m.point_count = cloud.points.size();

    std::vector<Vec3> pts;
    pts.reserve(cloud.points.size());
    for (const auto& p : cloud.points) pts.push_back(p.position);

    // Near-empty segments at duty-cycle troughs carry a flag, never abort.
    if (pts.size() < 4) {
        m.degenerate = true;
        return m;
    }
    HullVolume hv = convex_hull_volume(pts);
    m.volume_m3 = hv.volume;
    m.degenerate = hv.degenerate;
    m.average_height_m = average_height(pts);
    try {
        m.deviation_deg = angle_of_deviation(pts, origin, reference_axis);
    } catch (const UndefinedDirectionError&) {
        m.degenerate = true;
    }
    return m;
}

std::vector<PlumeMetrics> metrics_timeseries(const std::vector<PointCloud>& clouds,
                                             const std::vector<double>& segment_starts,
                                             const Vec2& origin, const Vec2& reference_axis) {
    std::vector<PlumeMetrics> out;
    out.reserve(clouds.size());
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        double t = i < segment_starts.size() ? segment_starts[i] : static_cast<double>(i);
        out.push_back(compute_metrics(clouds[i], static_cast<int>(i), t, origin, reference_axis));
    }
    return out;
}

std::string metrics_table(const std::vector<PlumeMetrics>& series) {
    std::ostringstream os;
    os << "segment\tt_start\tvolume_m3\tdeviation_deg\tavg_height_m\tpoints\tflags\n";
    os.precision(9);
    for (const auto& m : series)
        os << m.segment_index << '\t' << m.t_start << '\t' << m.volume_m3 << '\t'
           << m.deviation_deg << '\t' << m.average_height_m << '\t' << m.point_count << '\t'
           << (m.degenerate ? "degenerate" : "-") << '\n';
    return os.str();
}

std::vector<PlumeMetrics> parse_metrics_table(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    std::vector<PlumeMetrics> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        PlumeMetrics m;
        std::string flags;
        ls >> m.segment_index >> m.t_start >> m.volume_m3 >> m.deviation_deg >>
            m.average_height_m >> m.point_count >> flags;
        m.degenerate = flags == "degenerate";
        out.push_back(m);
    }
    return out;
}

}  // namespace plume
