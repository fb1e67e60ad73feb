#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "plumeswarm/geometry.hpp"
#include "plumeswarm/sensing.hpp"

namespace plume {

inline constexpr double kEarthRadius = 6371000.0;  // meters, spherical model

struct GeoCoord {
    double latitude = 0.0;   // degrees, [-90, 90]
    double longitude = 0.0;  // degrees, [-180, 180)
    double altitude = 0.0;   // meters above the ground origin

    void validate() const {
        if (latitude < -90.0 || latitude > 90.0) throw std::invalid_argument("latitude out of range");
        if (longitude < -180.0 || longitude >= 180.0) throw std::invalid_argument("longitude out of range");
    }
};

class PolarSingularityError : public std::runtime_error {
public:
    PolarSingularityError() : std::runtime_error("tangent-plane offset undefined above 89 degrees latitude") {}
};
class DegenerateConfigurationError : public std::runtime_error {
public:
    DegenerateConfigurationError() : std::runtime_error("pixel-to-gps fit needs >= 3 non-collinear points") {}
};

// 2x3 affine map from pixel (u, v) to (lat, lon) degrees:
//   lat = a[0]*u + a[1]*v + a[2],  lon = b[0]*u + b[1]*v + b[2]
struct AffineTransform2D {
    std::array<double, 3> lat_row{};
    std::array<double, 3> lon_row{};

    std::pair<double, double> apply(double u, double v) const {
        return {lat_row[0] * u + lat_row[1] * v + lat_row[2],
                lon_row[0] * u + lon_row[1] * v + lon_row[2]};
    }
};

// Great-circle distance; altitude is ignored.
double haversine_distance(const GeoCoord& a, const GeoCoord& b);

// Horizontal haversine combined with the altitude difference, Euclidean.
double distance_3d(const GeoCoord& a, const GeoCoord& b);

// Small-offset tangent-plane inverse around origin.
GeoCoord offset_geocoord(const GeoCoord& origin, double east_m, double north_m);

// Ground coverage of a nadir camera: (width, height) in meters.
std::pair<double, double> image_footprint(double altitude_m, const CameraIntrinsics& intr);

struct PixelGeoCorrespondence {
    double u = 0.0, v = 0.0;
    GeoCoord geo{};
};

// Least-squares affine fit over the correspondences (the canonical input is
// the image center plus the four corners).
AffineTransform2D fit_pixel_to_gps(const std::vector<PixelGeoCorrespondence>& correspondences);

double fit_rms_residual(const AffineTransform2D& t,
                        const std::vector<PixelGeoCorrespondence>& correspondences);

// Shared ENU <-> GPS anchoring for the whole simulation. ENU is anchored at
// the smoke source GPS coordinate; GPS appears only at the swarm protocol
// boundary.
struct GeoAnchor {
    GeoCoord origin{44.97, -93.23, 0.0};

    GeoCoord to_geo(const Vec3& enu) const {
        GeoCoord g = offset_geocoord(origin, enu.x, enu.y);
        g.altitude = enu.z;
        return g;
    }
    Vec3 to_enu(const GeoCoord& g) const {
        double lat0 = deg2rad(origin.latitude);
        double east = deg2rad(g.longitude - origin.longitude) * kEarthRadius * std::cos(lat0);
        double north = deg2rad(g.latitude - origin.latitude) * kEarthRadius;
        return {east, north, g.altitude};
    }
};

}  // namespace plume
