#include "plumeswarm/geodesy.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace plume {

double haversine_distance(const GeoCoord& a, const GeoCoord& b) {
    a.validate();
    b.validate();
    double lat1 = deg2rad(a.latitude), lat2 = deg2rad(b.latitude);
    double dlat = lat2 - lat1;
    double dlon = deg2rad(b.longitude - a.longitude);
    double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

double distance_3d(const GeoCoord& a, const GeoCoord& b) {
    double horiz = haversine_distance(a, b);
    double dz = b.altitude - a.altitude;
    return std::sqrt(horiz * horiz + dz * dz);
}

GeoCoord offset_geocoord(const GeoCoord& origin, double east_m, double north_m) {
    origin.validate();
    if (std::abs(origin.latitude) > 89.0) throw PolarSingularityError();
    if (std::abs(east_m) >= 10000.0 || std::abs(north_m) >= 10000.0)
        throw std::invalid_argument("offset exceeds tangent-plane validity (10 km)");
    GeoCoord out = origin;
    out.latitude += rad2deg(north_m / kEarthRadius);
    out.longitude += rad2deg(east_m / (kEarthRadius * std::cos(deg2rad(origin.latitude))));
    return out;
}

std::pair<double, double> image_footprint(double altitude_m, const CameraIntrinsics& intr) {
    intr.validate();
    if (altitude_m <= 0.0) throw std::invalid_argument("footprint requires altitude > 0");
    return {altitude_m * intr.width / intr.focal, altitude_m * intr.height / intr.focal};
}

AffineTransform2D fit_pixel_to_gps(const std::vector<PixelGeoCorrespondence>& corr) {
    if (corr.size() < 3) throw DegenerateConfigurationError();

    // Collinearity check: all points within 1e-9 of a single pixel-space line.
    double area_max = 0.0;
    for (std::size_t i = 1; i + 1 < corr.size(); ++i) {
        double ax = corr[i].u - corr[0].u, ay = corr[i].v - corr[0].v;
        double bx = corr[i + 1].u - corr[0].u, by = corr[i + 1].v - corr[0].v;
        area_max = std::max(area_max, std::abs(ax * by - ay * bx));
    }
    if (area_max < 1e-9) throw DegenerateConfigurationError();

    Eigen::MatrixXd A(corr.size(), 3);
    Eigen::MatrixXd rhs(corr.size(), 2);
    for (std::size_t i = 0; i < corr.size(); ++i) {
        A(i, 0) = corr[i].u;
        A(i, 1) = corr[i].v;
        A(i, 2) = 1.0;
        rhs(i, 0) = corr[i].geo.latitude;
        rhs(i, 1) = corr[i].geo.longitude;
    }
    Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(rhs);

    AffineTransform2D t;
    for (int j = 0; j < 3; ++j) {
        t.lat_row[j] = sol(j, 0);
        t.lon_row[j] = sol(j, 1);
    }
    return t;
}

double fit_rms_residual(const AffineTransform2D& t,
                        const std::vector<PixelGeoCorrespondence>& corr) {
    if (corr.empty()) return 0.0;
    double ss = 0.0;
    for (const auto& c : corr) {
        auto [lat, lon] = t.apply(c.u, c.v);
        double dlat = lat - c.geo.latitude;
        double dlon = lon - c.geo.longitude;
        ss += dlat * dlat + dlon * dlon;
    }
    return std::sqrt(ss / corr.size());
}

}  // namespace plume
