#pragma once

#include <stdexcept>
#include <vector>

#include "plumeswarm/geodesy.hpp"
#include "plumeswarm/geometry.hpp"

namespace plume {

class OrbitCompleteError : public std::runtime_error {
public:
    OrbitCompleteError() : std::runtime_error("time beyond the orbit plan") {}
};

struct OrbitPlan {
    Vec3 center{};                 // ENU ground point
    double radius = 21.0;          // meters
    double period = 32.0;          // seconds per revolution
    std::vector<double> phase_offsets_deg{0.0, 90.0, 180.0, 270.0};  // per drone
    double capture_fps = 8.0;
    int revolutions = 5;

    void validate() const;
    double duration() const { return revolutions * period; }
};

inline constexpr double kArrivalToleranceMeters = 0.5;

// True when the 3D distance (horizontal haversine combined with the altitude
// difference) is within the 0.5 m arrival offset.
bool arrival_check(const GeoCoord& current, const GeoCoord& target);

struct OrbitWaypoint {
    Vec3 position{};
    double yaw_deg = 0.0;  // facing the orbit center
};

OrbitWaypoint orbit_waypoint(const OrbitPlan& plan, double phase_deg, double t_since_start);

struct CaptureSlot {
    int drone = 0;
    double timestamp = 0.0;   // seconds since orbit start
    int quarter = 0;          // quarter-circle index within the revolution
    int revolution = 0;
};

// Per-drone capture timestamps over the whole plan. Endpoints are inclusive,
// so a quarter at rate*period/4 frames gains one shared boundary frame; the
// schedule lists each boundary timestamp once, assigned to the earlier quarter.
std::vector<CaptureSlot> capture_schedule(const OrbitPlan& plan);

// Frames per quarter-circle per drone, counting both endpoints.
int records_per_quarter(const OrbitPlan& plan);

// Records forming one full 360-degree circle of combined coverage: all four
// drones' quarters over one segment duration (period / 4).
int records_per_circle(const OrbitPlan& plan);

}  // namespace plume
