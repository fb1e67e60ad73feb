#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "plumeswarm/coordination.hpp"
#include "plumeswarm/manager_control.hpp"
#include "plumeswarm/plume_field.hpp"
#include "plumeswarm/segment_batcher.hpp"
#include "plumeswarm/sensing.hpp"
#include "plumeswarm/worker_control.hpp"

namespace plume {

class StabilizationTimeout : public std::runtime_error {
public:
    StabilizationTimeout() : std::runtime_error("manager failed to stabilize in time") {}
};
class BarrierTimeout : public std::runtime_error {
public:
    BarrierTimeout() : std::runtime_error("not every worker reported readiness in time") {}
};

struct ManagerConfig {
    Vec3 start_position{0, 0, 10};
    double start_yaw_deg = 0.0;
    Vec3 search_waypoint{0, 0, 10};  // flown toward until smoke enters the frame
    CameraIntrinsics intrinsics{};   // nadir camera
    ControlThresholds thresholds{};
    int hold_ticks = 20;             // consecutive in-threshold ticks before stabilized
};

struct WorkerConfig {
    CameraIntrinsics intrinsics{600.0, 640.0, 360.0, 1280, 720};
    double altitude = 10.0;
    double travel_gain = 1.0;        // (m/s) per meter toward the target
    double rtk_noise_sigma = 0.0;    // meters, on reported/recorded positions
    std::vector<Vec3> start_positions{{-30, -30, 0}, {30, -30, 0}, {30, 30, 0}, {-30, 30, 0}};
};

struct SimTimeouts {
    double stabilization = 60.0;  // seconds
    double barrier = 60.0;        // from target assignment to all-ready
};

struct SimConfig {
    PlumeFieldParams plume;
    ManagerConfig manager;
    WorkerConfig workers;
    OrbitPlan orbit;              // center/radius overwritten from the stabilized manager
    bool orbit_radius_from_ring = true;
    BusConfig bus;
    KinematicLimits limits;
    GeoAnchor anchor;
    SimTimeouts timeouts;
    double start_time = 0.0;      // plume age at sim t = 0 (pre-developed plume)
    double flight_time = 600.0;   // hard cap on sim duration, seconds
    double orbit_start_lead = 2.0;  // orbit command start time minus publish time
    int control_render_scale = 4; // manager control frames rendered 1/N resolution
    bool render_captures = true;  // false: protocol-only run, images left empty
    RenderOptions capture_render{};
    std::uint64_t seed = 0;
};

struct ManagerTickLog {
    double t = 0.0;
    DroneMode mode = DroneMode::Manual;
    Vec3 position{};
    double yaw_deg = 0.0;
    double centroid_error_px = -1.0;  // -1 when the mask was empty
    double area_fraction = 0.0;
    double yaw_error_deg = 0.0;
};

std::string manager_log_text(const std::vector<ManagerTickLog>& log);

struct SimResult {
    std::vector<CaptureRecord> records;  // image_path empty; images parallel
    std::vector<Image> images;           // empty Images when render_captures is off
    OrbitPlan plan;                      // the plan actually flown
    double stabilized_time = 0.0;
    double barrier_ready_time = 0.0;
    double orbit_publish_time = 0.0;
    double orbit_start_time = 0.0;
    std::array<Vec3, 4> worker_targets_enu{};
    Vec3 manager_position{};             // at stabilization
    std::vector<ManagerTickLog> manager_log;
    std::string bus_transcript;
};

// Full protocol run: guided search, centering until stabilized, worker
// dispersal, readiness barrier, synchronized orbit with scheduled captures.
// Deterministic for a given config.
SimResult run_swarm_sim(const SimConfig& config, const DensityField& field);

// Convenience overload constructing the plume from config.plume.
SimResult run_swarm_sim(const SimConfig& config);

}  // namespace plume
