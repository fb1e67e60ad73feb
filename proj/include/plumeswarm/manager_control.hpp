#pragma once

#include <array>
#include <stdexcept>

#include "plumeswarm/geodesy.hpp"
#include "plumeswarm/geometry.hpp"
#include "plumeswarm/sensing.hpp"

namespace plume {

class NotStabilizedError : public std::runtime_error {
public:
    NotStabilizedError() : std::runtime_error("worker targets require a stabilized manager") {}
};

enum class DroneMode { Manual, GuidedSearch, Centering, Stabilized, Orbiting };

class InvalidModeTransition : public std::runtime_error {
public:
    InvalidModeTransition() : std::runtime_error("disallowed drone mode transition") {}
};

// Allowed transitions of the manager state machine. Orbiting is reachable
// only from Stabilized.
bool mode_transition_allowed(DroneMode from, DroneMode to);

struct DroneState {
    int id = 0;
    Vec3 position{};
    double yaw_deg = 0.0;  // CCW from East
    Vec3 velocity{};
    DroneMode mode = DroneMode::Manual;
    double battery_seconds = 300.0;

    void set_mode(DroneMode m) {
        if (!mode_transition_allowed(mode, m)) throw InvalidModeTransition();
        mode = m;
    }
};

struct ControlThresholds {
    double centroid_tolerance_px = 25.0;
    double area_low = 0.08;
    double area_high = 0.12;
    double yaw_tolerance_deg = 5.0;
    double centering_gain = 1.0;   // (m/s) per meter of ground error
    double climb_rate = 2.0;       // m/s
    double yaw_rate_deg = 45.0;    // deg/s

    void validate() const {
        if (area_low >= area_high) throw std::invalid_argument("area band lower must be < upper");
        if (centering_gain <= 0.0 || climb_rate <= 0.0 || yaw_rate_deg <= 0.0)
            throw std::invalid_argument("control gains must be > 0");
    }
};

// Proportional planar velocity command steering the plume centroid to the
// image center. Zero inside the centroid tolerance.
Vec2 centering_command(const Vec2& centroid_px, const CameraIntrinsics& intr, double altitude,
                       double heading_deg, const ControlThresholds& th);

enum class AltitudeCommand { Climb, Descend, Hold };

AltitudeCommand altitude_command(double area_fraction, const ControlThresholds& th);

// Target heading perpendicular to the plume's major axis, choosing the 90
// degree rotation with the smaller turn. Isotropic masks hold heading.
double yaw_command(const Vec2& principal_axis_image, bool isotropic, double heading_deg,
                   const CameraIntrinsics& intr);

bool stabilized(const MaskMoments& moments, double heading_deg, const CameraIntrinsics& intr,
                const ControlThresholds& th);

struct WorkerTarget {
    GeoCoord target{};       // includes altitude
    double facing_yaw_deg = 0.0;  // toward the manager's ground position
    double phase_deg = 0.0;       // orbit phase at the target bearing
};

// Four targets at compass N/E/S/W bearings around the manager's nadir point,
// at the radius implied by the image's vertical extreme points.
std::array<WorkerTarget, 4> compute_worker_targets(const Vec3& manager_pos,
                                                   const CameraIntrinsics& intr,
                                                   const GeoAnchor& anchor,
                                                   double worker_altitude, bool is_stabilized);

// Ground radius from image center to the vertical frame extremes.
double worker_ring_radius(double altitude, const CameraIntrinsics& intr);

struct KinematicLimits {
    double max_speed = 5.0;      // m/s, horizontal
    double max_climb = 2.0;      // m/s
    double max_yaw_rate = 90.0;  // deg/s
};

// First-order velocity model; commands apply over one tick.
void step_kinematics(DroneState& state, const Vec3& velocity_cmd, double yaw_target_deg,
                     const KinematicLimits& limits, double dt);

}  // namespace plume
