#include "plumeswarm/worker_control.hpp"

#include <cmath>

namespace plume {

void OrbitPlan::validate() const {
    if (radius <= 0.0) throw std::invalid_argument("orbit radius must be > 0");
    if (period <= 0.0) throw std::invalid_argument("orbit period must be > 0");
    if (capture_fps <= 0.0) throw std::invalid_argument("capture rate must be > 0");
    if (revolutions < 1) throw std::invalid_argument("revolutions must be >= 1");
    if (phase_offsets_deg.empty()) throw std::invalid_argument("at least one drone phase required");
    for (std::size_t i = 0; i < phase_offsets_deg.size(); ++i)
        for (std::size_t j = i + 1; j < phase_offsets_deg.size(); ++j) {
            double d = std::fmod(std::abs(phase_offsets_deg[i] - phase_offsets_deg[j]), 360.0);
            if (d < 1e-9 || std::abs(d - 360.0) < 1e-9)
                throw std::invalid_argument("drone phase offsets must be distinct mod 360");
        }
    double frames = capture_fps * period / 4.0;
    if (std::abs(frames - std::round(frames)) > 1e-9)
        throw std::invalid_argument("capture rate times quarter duration must be integral");
}

bool arrival_check(const GeoCoord& current, const GeoCoord& target) {
    return distance_3d(current, target) <= kArrivalToleranceMeters;
}

OrbitWaypoint orbit_waypoint(const OrbitPlan& plan, double phase_deg, double t_since_start) {
    if (t_since_start < 0.0 || t_since_start > plan.duration() + 1e-9) throw OrbitCompleteError();
    double alpha = deg2rad(phase_deg) + 2.0 * kPi * t_since_start / plan.period;
    OrbitWaypoint wp;
    wp.position = plan.center + Vec3{plan.radius * std::cos(alpha), plan.radius * std::sin(alpha), 0.0};
    wp.yaw_deg = wrap_deg(rad2deg(alpha) + 180.0);  // look back at the center
    return wp;
}

int records_per_quarter(const OrbitPlan& plan) {
    return static_cast<int>(std::lround(plan.capture_fps * plan.period / 4.0)) + 1;
}

int records_per_circle(const OrbitPlan& plan) {
    return static_cast<int>(plan.phase_offsets_deg.size()) * records_per_quarter(plan);
}

std::vector<CaptureSlot> capture_schedule(const OrbitPlan& plan) {
    plan.validate();
    std::vector<CaptureSlot> out;
    long frames_per_quarter = records_per_quarter(plan) - 1;  // without the shared endpoint
    long total = static_cast<long>(std::lround(plan.capture_fps * plan.duration()));
    for (std::size_t d = 0; d < plan.phase_offsets_deg.size(); ++d) {
        for (long j = 0; j <= total; ++j) {
            long quarter_global = (j == 0) ? 0 : (j - 1) / frames_per_quarter;
            CaptureSlot slot;
            slot.drone = static_cast<int>(d);
            slot.timestamp = j / plan.capture_fps;
            slot.quarter = static_cast<int>(quarter_global % 4);
            slot.revolution = static_cast<int>(quarter_global / 4);
            out.push_back(slot);
        }
    }
    return out;
}

}  // namespace plume
