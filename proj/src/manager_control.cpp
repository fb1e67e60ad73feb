#include "plumeswarm/manager_control.hpp"

#include <cmath>

namespace plume {

bool mode_transition_allowed(DroneMode from, DroneMode to) {
    if (from == to) return true;
    switch (to) {
        case DroneMode::Manual: return true;  // operator override from anywhere
        case DroneMode::GuidedSearch: return from == DroneMode::Manual;
        case DroneMode::Centering:
            return from == DroneMode::GuidedSearch || from == DroneMode::Stabilized;
        case DroneMode::Stabilized: return from == DroneMode::Centering;
        case DroneMode::Orbiting: return from == DroneMode::Stabilized;
    }
    return false;
}

namespace {

// Image axes of a nadir camera in the ground plane: +u is the heading rotated
// -90 degrees, +v points opposite the heading.
Vec2 heading_vec(double heading_deg) {
    double h = deg2rad(heading_deg);
    return {std::cos(h), std::sin(h)};
}

}  // namespace

Vec2 centering_command(const Vec2& centroid_px, const CameraIntrinsics& intr, double altitude,
                       double heading_deg, const ControlThresholds& th) {
    th.validate();
    double du = centroid_px.x - intr.cx;
    double dv = centroid_px.y - intr.cy;
    if (std::sqrt(du * du + dv * dv) <= th.centroid_tolerance_px) return {};
    double m_per_px = altitude / intr.focal;
    Vec2 h = heading_vec(heading_deg);
    Vec2 right{h.y, -h.x};
    Vec2 ground{(du * right.x - dv * h.x) * m_per_px, (du * right.y - dv * h.y) * m_per_px};
    return {th.centering_gain * ground.x, th.centering_gain * ground.y};
}

AltitudeCommand altitude_command(double area_fraction, const ControlThresholds& th) {
    th.validate();
    if (area_fraction > th.area_high) return AltitudeCommand::Climb;
    if (area_fraction < th.area_low) return AltitudeCommand::Descend;
    return AltitudeCommand::Hold;
}

double yaw_command(const Vec2& axis_image, bool isotropic, double heading_deg,
                   const CameraIntrinsics&) {
    if (isotropic) return heading_deg;
    Vec2 h = heading_vec(heading_deg);
    Vec2 right{h.y, -h.x};
    // Image (u, v) with v downward maps to right and -heading in the world.
    Vec2 world{axis_image.x * right.x - axis_image.y * h.x,
               axis_image.x * right.y - axis_image.y * h.y};
    if (world.norm() < 1e-12) return heading_deg;
    double axis_deg = rad2deg(std::atan2(world.y, world.x));
    double cand1 = wrap_deg(axis_deg + 90.0);
    double cand2 = wrap_deg(axis_deg - 90.0);
    return std::abs(wrap_deg(cand1 - heading_deg)) <= std::abs(wrap_deg(cand2 - heading_deg))
               ? cand1
               : cand2;
}

bool stabilized(const MaskMoments& m, double heading_deg, const CameraIntrinsics& intr,
                const ControlThresholds& th) {
    double du = m.centroid_u - intr.cx;
    double dv = m.centroid_v - intr.cy;
    if (std::sqrt(du * du + dv * dv) > th.centroid_tolerance_px) return false;
    if (m.area_fraction < th.area_low || m.area_fraction > th.area_high) return false;
    double target = yaw_command(m.axis1, m.isotropic, heading_deg, intr);
    return std::abs(wrap_deg(target - heading_deg)) <= th.yaw_tolerance_deg;
}

double worker_ring_radius(double altitude, const CameraIntrinsics& intr) {
    return altitude * (intr.height / 2.0) / intr.focal;
}

std::array<WorkerTarget, 4> compute_worker_targets(const Vec3& manager_pos,
                                                   const CameraIntrinsics& intr,
                                                   const GeoAnchor& anchor,
                                                   double worker_altitude, bool is_stabilized) {
    if (!is_stabilized) throw NotStabilizedError();
    double r = worker_ring_radius(manager_pos.z, intr);
    // Compass N, E, S, W with the matching orbit phase (east = 0 degrees CCW).
    const std::array<std::pair<Vec2, double>, 4> bearings{{
        {{0.0, 1.0}, 90.0},
        {{1.0, 0.0}, 0.0},
        {{0.0, -1.0}, 270.0},
        {{-1.0, 0.0}, 180.0},
    }};
    std::array<WorkerTarget, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        Vec2 offset = bearings[i].first * r;
        Vec3 enu{manager_pos.x + offset.x, manager_pos.y + offset.y, worker_altitude};
        out[i].target = anchor.to_geo(enu);
        out[i].facing_yaw_deg = wrap_deg(rad2deg(std::atan2(-offset.y, -offset.x)));
        out[i].phase_deg = bearings[i].second;
    }
    return out;
}

void step_kinematics(DroneState& state, const Vec3& velocity_cmd, double yaw_target_deg,
                     const KinematicLimits& limits, double dt) {
    Vec2 planar{velocity_cmd.x, velocity_cmd.y};
    double speed = planar.norm();
    if (speed > limits.max_speed) planar = planar * (limits.max_speed / speed);
    double climb = std::clamp(velocity_cmd.z, -limits.max_climb, limits.max_climb);

    state.velocity = {planar.x, planar.y, climb};
    state.position += state.velocity * dt;
    if (state.position.z < 0.0) state.position.z = 0.0;

    double err = wrap_deg(yaw_target_deg - state.yaw_deg);
    double max_step = limits.max_yaw_rate * dt;
    state.yaw_deg = wrap_deg(state.yaw_deg + std::clamp(err, -max_step, max_step));
    state.battery_seconds -= dt;
}

}  // namespace plume
