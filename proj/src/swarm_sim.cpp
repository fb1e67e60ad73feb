#include "plumeswarm/swarm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace plume {

namespace {

const char* mode_name(DroneMode m) {
    switch (m) {
        case DroneMode::Manual: return "manual";
        case DroneMode::GuidedSearch: return "guided_search";
        case DroneMode::Centering: return "centering";
        case DroneMode::Stabilized: return "stabilized";
        case DroneMode::Orbiting: return "orbiting";
    }
    return "?";
}

CameraIntrinsics scaled_intrinsics(const CameraIntrinsics& intr, int scale) {
    CameraIntrinsics s = intr;
    s.focal /= scale;
    s.cx /= scale;
    s.cy /= scale;
    s.width = std::max(1, intr.width / scale);
    s.height = std::max(1, intr.height / scale);
    return s;
}

struct WorkerAgent {
    int id = 0;
    DroneState state{};
    Vec3 target_enu{};
    GeoCoord target_geo{};
    double facing_yaw = 0.0;
    double phase_deg = 0.0;
    bool has_target = false;
    bool arrived = false;
    bool has_orbit = false;
    OrbitPlan plan{};
    double orbit_start = 0.0;
    std::vector<CaptureSlot> slots;  // this drone's schedule, ascending
    std::size_t next_slot = 0;
    double last_update = 0.0;
};

}  // namespace

std::string manager_log_text(const std::vector<ManagerTickLog>& log) {
    std::ostringstream os;
    os << "t\tmode\tx\ty\tz\tyaw\tcentroid_err_px\tarea_fraction\tyaw_err_deg\n";
    os.precision(10);
    for (const auto& e : log) {
        os << e.t << '\t' << mode_name(e.mode) << '\t' << e.position.x << '\t' << e.position.y
           << '\t' << e.position.z << '\t' << e.yaw_deg << '\t' << e.centroid_error_px << '\t'
           << e.area_fraction << '\t' << e.yaw_error_deg << '\n';
    }
    return os.str();
}

SimResult run_swarm_sim(const SimConfig& config) {
    PlumeField field(config.plume);
    return run_swarm_sim(config, field);
}

SimResult run_swarm_sim(const SimConfig& config, const DensityField& field) {
    config.bus.validate();
    config.manager.thresholds.validate();
    config.manager.intrinsics.validate();
    config.workers.intrinsics.validate();
    if (config.workers.start_positions.size() != 4)
        throw std::invalid_argument("exactly four workers are flown");

    SimResult result;
    MessageBus bus(config.bus);
    const double dt = bus.tick();
    const int manager_id = 0;
    std::vector<int> worker_ids{1, 2, 3, 4};
    bus.register_drone(manager_id);
    for (int id : worker_ids) bus.register_drone(id);

    std::mt19937_64 rtk_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> rtk(0.0, 1.0);
    auto noised = [&](const Vec3& p) {
        if (config.workers.rtk_noise_sigma <= 0.0) return p;
        double s = config.workers.rtk_noise_sigma;
        return Vec3{p.x + s * rtk(rtk_rng), p.y + s * rtk(rtk_rng), p.z + s * rtk(rtk_rng)};
    };

    DroneState manager;
    manager.id = manager_id;
    manager.position = config.manager.start_position;
    manager.yaw_deg = config.manager.start_yaw_deg;
    manager.battery_seconds = config.flight_time;
    manager.set_mode(DroneMode::GuidedSearch);

    std::array<WorkerAgent, 4> workers;
    for (int i = 0; i < 4; ++i) {
        workers[i].id = worker_ids[i];
        workers[i].state.id = worker_ids[i];
        workers[i].state.position = config.workers.start_positions[i];
        workers[i].state.battery_seconds = config.flight_time;
        workers[i].state.set_mode(DroneMode::GuidedSearch);
    }

    CameraIntrinsics ctrl_intr =
        scaled_intrinsics(config.manager.intrinsics, std::max(1, config.control_render_scale));
    ControlThresholds ctrl_th = config.manager.thresholds;
    ctrl_th.centroid_tolerance_px /= std::max(1, config.control_render_scale);
    RenderOptions ctrl_opts;
    ctrl_opts.shade_rgb = false;

    bool targets_sent = false;
    bool barrier_ready = false;
    bool orbit_published = false;
    double targets_sent_time = 0.0;
    int stable_streak = 0;
    std::vector<bool> ready_seen(5, false);
    std::array<TargetAssignment, 4> assignments{};
    OrbitPlan plan = config.orbit;
    double orbit_start = 0.0;

    auto worker_capture = [&](WorkerAgent& w, const CaptureSlot& slot, double sim_time) {
        CaptureRecord rec;
        rec.drone = w.id;
        rec.timestamp = slot.timestamp;
        rec.quarter = slot.quarter;
        rec.revolution = slot.revolution;
        rec.intrinsics = config.workers.intrinsics;
        Vec3 reported = noised(w.state.position);
        Vec3 aim{w.plan.center.x, w.plan.center.y, reported.z};
        rec.pose = CameraPose::look_at(reported, aim);
        result.records.push_back(rec);
        if (config.render_captures) {
            result.images.push_back(render(rec.intrinsics, rec.pose, field,
                                           config.start_time + sim_time, config.capture_render));
        } else {
            result.images.emplace_back();
        }
        bus.publish({kTopicCapture, w.id,
                     CaptureNotice{w.id, slot.timestamp, slot.quarter, slot.revolution}, sim_time});
    };

    // Advances one worker through (w.last_update, to], capturing at any
    // scheduled timestamps inside the span so capture poses sit at the exact
    // schedule time rather than the nearest control tick.
    auto advance_worker = [&](WorkerAgent& w, double to) {
        while (w.last_update < to - 1e-12) {
            double step_end = to;
            const CaptureSlot* due = nullptr;
            if (w.has_orbit && w.next_slot < w.slots.size()) {
                double cap_t = w.orbit_start + w.slots[w.next_slot].timestamp;
                if (cap_t > w.last_update + 1e-12 && cap_t <= to + 1e-12) {
                    step_end = cap_t;
                    due = &w.slots[w.next_slot];
                }
            }
            double h = step_end - w.last_update;
            Vec3 cmd{};
            double yaw_target = w.state.yaw_deg;
            if (w.has_orbit && step_end >= w.orbit_start - 1e-12) {
                double tau = std::min(step_end - w.orbit_start, w.plan.duration());
                OrbitWaypoint wp = orbit_waypoint(w.plan, w.phase_deg, std::max(tau, 0.0));
                wp.position.z += config.workers.altitude;  // plan center is a ground point
                cmd = (wp.position - w.state.position) * (1.0 / h);
                yaw_target = wp.yaw_deg;
            } else if (w.has_target) {
                Vec3 err = w.target_enu - w.state.position;
                cmd = err * config.workers.travel_gain;
                yaw_target = w.facing_yaw;
            }
            step_kinematics(w.state, cmd, yaw_target, config.limits, h);
            w.last_update = step_end;
            if (due) {
                worker_capture(w, *due, step_end);
                ++w.next_slot;
            }
        }
    };

    const int max_ticks = static_cast<int>(std::ceil(config.flight_time / dt));
    bool all_captured = false;
    for (int tick = 0; tick <= max_ticks && !all_captured; ++tick) {
        double t = tick * dt;

        // --- manager ---
        if (manager.mode == DroneMode::GuidedSearch || manager.mode == DroneMode::Centering) {
            if (t > config.timeouts.stabilization) throw StabilizationTimeout();
            CameraPose pose = CameraPose::nadir(manager.position, manager.yaw_deg);
            Image frame = render(ctrl_intr, pose, field, config.start_time + t, ctrl_opts);
            Mask mask = segment_smoke(frame);
            ManagerTickLog log{t, manager.mode, manager.position, manager.yaw_deg, -1.0, 0.0, 0.0};
            if (mask.count() == 0) {
                if (manager.mode == DroneMode::GuidedSearch) {
                    Vec3 err = config.manager.search_waypoint - manager.position;
                    step_kinematics(manager, err, manager.yaw_deg, config.limits, dt);
                }
                stable_streak = 0;
            } else {
                if (manager.mode == DroneMode::GuidedSearch) manager.set_mode(DroneMode::Centering);
                MaskMoments mm = mask_moments(mask);
                Vec2 planar = centering_command({mm.centroid_u, mm.centroid_v}, ctrl_intr,
                                                manager.position.z, manager.yaw_deg, ctrl_th);
                AltitudeCommand ac = altitude_command(mm.area_fraction, ctrl_th);
                double vz = ac == AltitudeCommand::Climb ? ctrl_th.climb_rate
                            : ac == AltitudeCommand::Descend ? -ctrl_th.climb_rate
                                                             : 0.0;
                double yaw_target = yaw_command(mm.axis1, mm.isotropic, manager.yaw_deg, ctrl_intr);
                double du = mm.centroid_u - ctrl_intr.cx, dv = mm.centroid_v - ctrl_intr.cy;
                log.mode = manager.mode;
                log.centroid_error_px =
                    std::sqrt(du * du + dv * dv) * std::max(1, config.control_render_scale);
                log.area_fraction = mm.area_fraction;
                log.yaw_error_deg = std::abs(wrap_deg(yaw_target - manager.yaw_deg));
                bool ok = stabilized(mm, manager.yaw_deg, ctrl_intr, ctrl_th);
                stable_streak = ok ? stable_streak + 1 : 0;
                if (stable_streak >= config.manager.hold_ticks) {
                    manager.set_mode(DroneMode::Stabilized);
                    result.stabilized_time = t;
                    result.manager_position = manager.position;
                } else {
                    step_kinematics(manager, {planar.x, planar.y, vz}, yaw_target, config.limits,
                                    dt);
                }
            }
            result.manager_log.push_back(log);
        } else {
            result.manager_log.push_back(
                {t, manager.mode, manager.position, manager.yaw_deg, 0.0, 0.0, 0.0});
        }

        if (manager.mode == DroneMode::Stabilized && !barrier_ready) {
            if (!targets_sent) {
                auto targets = compute_worker_targets(manager.position, config.manager.intrinsics,
                                                      config.anchor, config.workers.altitude, true);
                plan.center = {manager.position.x, manager.position.y, 0.0};
                if (config.orbit_radius_from_ring)
                    plan.radius = worker_ring_radius(manager.position.z, config.manager.intrinsics);
                plan.phase_offsets_deg = {targets[0].phase_deg, targets[1].phase_deg,
                                          targets[2].phase_deg, targets[3].phase_deg};
                plan.validate();
                for (int i = 0; i < 4; ++i) {
                    assignments[i] = TargetAssignment{worker_ids[i], targets[i].target,
                                                      targets[i].facing_yaw_deg,
                                                      targets[i].phase_deg};
                    result.worker_targets_enu[i] = config.anchor.to_enu(targets[i].target);
                }
                targets_sent = true;
                targets_sent_time = t;
            }
            // Re-broadcast until all-ready so dropped assignments recover.
            for (int i = 0; i < 4; ++i)
                bus.publish({kTopicTargets, manager_id, assignments[i], t});
        }

        if (targets_sent && !barrier_ready) {
            for (auto& m : bus.fetch(manager_id, kTopicReadiness))
                ready_seen[std::get<Readiness>(m.payload).worker_id] = true;
            if (ready_seen[1] && ready_seen[2] && ready_seen[3] && ready_seen[4]) {
                barrier_ready = true;
                result.barrier_ready_time = t;
            } else if (t - targets_sent_time > config.timeouts.barrier) {
                throw BarrierTimeout();
            }
        }

        if (barrier_ready && !orbit_published) {
            orbit_start = std::ceil((t + config.orbit_start_lead) / dt) * dt;
            result.orbit_publish_time = t;
            result.orbit_start_time = orbit_start;
        }
        if (barrier_ready && t <= orbit_start) {
            // Re-broadcast until the start time passes so a dropped command
            // cannot strand a worker.
            bus.publish({kTopicOrbit, manager_id, OrbitCommand{plan, orbit_start}, t});
            orbit_published = true;
        }

        // --- workers ---
        for (auto& w : workers) {
            for (auto& m : bus.fetch(w.id, kTopicTargets)) {
                const auto& ta = std::get<TargetAssignment>(m.payload);
                if (ta.worker_id != w.id || w.has_target) continue;
                w.has_target = true;
                w.target_geo = ta.target;
                w.target_enu = config.anchor.to_enu(ta.target);
                w.facing_yaw = ta.facing_yaw_deg;
                w.phase_deg = ta.phase_deg;
            }
            for (auto& m : bus.fetch(w.id, kTopicOrbit)) {
                if (w.has_orbit) continue;
                const auto& oc = std::get<OrbitCommand>(m.payload);
                w.has_orbit = true;
                w.plan = oc.plan;
                w.orbit_start = oc.start_time;
                auto all = capture_schedule(w.plan);
                int drone_index = w.id - 1;
                for (const auto& s : all)
                    if (s.drone == drone_index) w.slots.push_back(s);
                if (w.state.mode == DroneMode::Stabilized) w.state.set_mode(DroneMode::Orbiting);
            }
            if (w.has_target && !w.arrived &&
                arrival_check(config.anchor.to_geo(noised(w.state.position)), w.target_geo)) {
                w.arrived = true;
                w.state.set_mode(DroneMode::Centering);
                w.state.set_mode(DroneMode::Stabilized);
                if (w.has_orbit) w.state.set_mode(DroneMode::Orbiting);
            }
            if (w.arrived && !w.has_orbit)
                bus.publish({kTopicReadiness, w.id, Readiness{w.id}, t});
            advance_worker(w, t + dt);
        }

        bus.advance_to(t + dt);

        if (orbit_published) {
            all_captured = true;
            for (const auto& w : workers)
                if (!w.has_orbit || w.next_slot < w.slots.size()) all_captured = false;
        }
    }

    result.plan = plan;
    result.bus_transcript = bus.transcript_text();
    std::vector<std::size_t> order(result.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &ra = result.records[a], &rb = result.records[b];
        return ra.timestamp != rb.timestamp ? ra.timestamp < rb.timestamp : ra.drone < rb.drone;
    });
    std::vector<CaptureRecord> recs;
    std::vector<Image> imgs;
    recs.reserve(order.size());
    imgs.reserve(order.size());
    for (std::size_t i : order) {
        recs.push_back(std::move(result.records[i]));
        imgs.push_back(std::move(result.images[i]));
    }
    result.records = std::move(recs);
    result.images = std::move(imgs);
    return result;
}

}  // namespace plume
