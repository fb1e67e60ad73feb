#include "plumeswarm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace plume {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

Vec3 get_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + " must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec2 get_vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Rgb get_rgb(const json& j, const std::string& where) {
    Vec3 v = get_vec3(j, where);
    return {v.x, v.y, v.z};
}

AABB get_box(const json& j, const std::string& where) {
    check_keys(j, where, {"lo", "hi"});
    AABB b;
    b.expand(get_vec3(j.at("lo"), where + ".lo"));
    b.expand(get_vec3(j.at("hi"), where + ".hi"));
    return b;
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

CameraIntrinsics get_intrinsics(const json& j, const std::string& where) {
    check_keys(j, where, {"focal", "cx", "cy", "width", "height"});
    CameraIntrinsics intr;
    opt(j, "focal", intr.focal);
    opt(j, "width", intr.width);
    opt(j, "height", intr.height);
    intr.cx = intr.width / 2.0;
    intr.cy = intr.height / 2.0;
    opt(j, "cx", intr.cx);
    opt(j, "cy", intr.cy);
    return intr;
}

void parse_plume(const json& j, PlumeFieldParams& p) {
    check_keys(j, "plume", {"emitters", "wind", "buoyancy", "smoke_color", "seed"});
    if (j.contains("emitters")) {
        p.emitters.clear();
        for (const auto& je : j.at("emitters")) {
            check_keys(je, "plume.emitters[]",
                       {"source", "rate", "on_seconds", "off_seconds", "initial_radius",
                        "growth_rate", "amplitude"});
            Emitter e;
            if (je.contains("source")) e.source = get_vec3(je.at("source"), "emitter source");
            opt(je, "rate", e.rate);
            opt(je, "on_seconds", e.on_seconds);
            opt(je, "off_seconds", e.off_seconds);
            opt(je, "initial_radius", e.initial_radius);
            opt(je, "growth_rate", e.growth_rate);
            opt(je, "amplitude", e.amplitude);
            p.emitters.push_back(e);
        }
    }
    if (j.contains("wind")) {
        p.wind.clear();
        for (const auto& jw : j.at("wind")) {
            check_keys(jw, "plume.wind[]", {"t", "velocity"});
            WindSample w;
            opt(jw, "t", w.t);
            if (jw.contains("velocity")) w.velocity = get_vec2(jw.at("velocity"), "wind velocity");
            p.wind.push_back(w);
        }
    }
    opt(j, "buoyancy", p.buoyancy);
    opt(j, "seed", p.seed);
    if (j.contains("smoke_color")) p.smoke_color = get_rgb(j.at("smoke_color"), "smoke_color");
}

void parse_manager(const json& j, ManagerConfig& m) {
    check_keys(j, "manager",
               {"start_position", "start_yaw_deg", "search_waypoint", "intrinsics", "thresholds",
                "hold_ticks"});
    if (j.contains("start_position"))
        m.start_position = get_vec3(j.at("start_position"), "manager.start_position");
    opt(j, "start_yaw_deg", m.start_yaw_deg);
    if (j.contains("search_waypoint"))
        m.search_waypoint = get_vec3(j.at("search_waypoint"), "manager.search_waypoint");
    if (j.contains("intrinsics")) m.intrinsics = get_intrinsics(j.at("intrinsics"), "manager.intrinsics");
    if (j.contains("thresholds")) {
        const auto& jt = j.at("thresholds");
        check_keys(jt, "manager.thresholds",
                   {"centroid_tolerance_px", "area_low", "area_high", "yaw_tolerance_deg",
                    "centering_gain", "climb_rate", "yaw_rate_deg"});
        opt(jt, "centroid_tolerance_px", m.thresholds.centroid_tolerance_px);
        opt(jt, "area_low", m.thresholds.area_low);
        opt(jt, "area_high", m.thresholds.area_high);
        opt(jt, "yaw_tolerance_deg", m.thresholds.yaw_tolerance_deg);
        opt(jt, "centering_gain", m.thresholds.centering_gain);
        opt(jt, "climb_rate", m.thresholds.climb_rate);
        opt(jt, "yaw_rate_deg", m.thresholds.yaw_rate_deg);
    }
    opt(j, "hold_ticks", m.hold_ticks);
}

void parse_workers(const json& j, WorkerConfig& w) {
    check_keys(j, "workers",
               {"intrinsics", "altitude", "travel_gain", "rtk_noise_sigma", "start_positions"});
    if (j.contains("intrinsics")) w.intrinsics = get_intrinsics(j.at("intrinsics"), "workers.intrinsics");
    opt(j, "altitude", w.altitude);
    opt(j, "travel_gain", w.travel_gain);
    opt(j, "rtk_noise_sigma", w.rtk_noise_sigma);
    if (j.contains("start_positions")) {
        w.start_positions.clear();
        for (const auto& jp : j.at("start_positions"))
            w.start_positions.push_back(get_vec3(jp, "workers.start_positions[]"));
    }
}

void parse_orbit(const json& j, SimConfig& sim) {
    check_keys(j, "orbit", {"radius", "period", "capture_fps", "revolutions", "from_ring"});
    opt(j, "radius", sim.orbit.radius);
    opt(j, "period", sim.orbit.period);
    opt(j, "capture_fps", sim.orbit.capture_fps);
    opt(j, "revolutions", sim.orbit.revolutions);
    opt(j, "from_ring", sim.orbit_radius_from_ring);
}

void parse_bus(const json& j, BusConfig& b) {
    check_keys(j, "bus", {"latency", "jitter", "drop_probability", "tick", "seed", "link_overrides"});
    opt(j, "latency", b.latency);
    opt(j, "jitter", b.jitter);
    opt(j, "drop_probability", b.drop_probability);
    opt(j, "tick", b.tick);
    opt(j, "seed", b.seed);
    if (j.contains("link_overrides")) {
        for (auto it = j.at("link_overrides").begin(); it != j.at("link_overrides").end(); ++it) {
            const auto& jl = it.value();
            check_keys(jl, "bus.link_overrides[]", {"latency", "jitter", "drop_probability"});
            LinkConfig lc;
            opt(jl, "latency", lc.latency);
            opt(jl, "jitter", lc.jitter);
            opt(jl, "drop_probability", lc.drop_probability);
            b.link_overrides[std::stoi(it.key())] = lc;
        }
    }
}

void parse_sim_misc(const json& j, SimConfig& sim, SimTimeouts& timeouts) {
    check_keys(j, "sim",
               {"start_time", "flight_time", "stabilization_timeout", "barrier_timeout",
                "control_render_scale", "render_captures", "capture_step", "orbit_start_lead"});
    opt(j, "start_time", sim.start_time);
    opt(j, "flight_time", sim.flight_time);
    opt(j, "stabilization_timeout", timeouts.stabilization);
    opt(j, "barrier_timeout", timeouts.barrier);
    opt(j, "control_render_scale", sim.control_render_scale);
    opt(j, "render_captures", sim.render_captures);
    opt(j, "capture_step", sim.capture_render.step);
    opt(j, "orbit_start_lead", sim.orbit_start_lead);
}

void parse_grid(const json& j, GridConfig& g) {
    check_keys(j, "grid",
               {"max_cells", "max_iterations", "epsilon_photo", "ray_stride", "export_threshold",
                "enclosure_inflation", "sigma_init", "max_views"});
    opt(j, "max_cells", g.max_cells);
    opt(j, "max_iterations", g.max_iterations);
    opt(j, "epsilon_photo", g.epsilon_photo);
    opt(j, "ray_stride", g.ray_stride);
    opt(j, "export_threshold", g.export_threshold);
    opt(j, "enclosure_inflation", g.enclosure_inflation);
    opt(j, "sigma_init", g.sigma_init);
    opt(j, "max_views", g.max_views);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (schema_version != 1) throw ConfigError("unsupported schema_version");
    if (scene != "plume" && scene != "box") throw ConfigError("scene must be 'plume' or 'box'");
    if (scene == "box" && box.empty()) throw ConfigError("scene 'box' requires a box");
    try {
        sim.plume.validate();
        sim.bus.validate();
        sim.manager.thresholds.validate();
        sim.manager.intrinsics.validate();
        sim.workers.intrinsics.validate();
        if (!sim.orbit_radius_from_ring) sim.orbit.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (segments.duration <= 0.0) throw ConfigError("segment duration must be > 0");
    for (double f : segments.overlap_fractions)
        if (f <= 0.0 || f >= 1.0) throw ConfigError("overlap fractions must be in (0, 1)");
    if (metrics.training_frames < 1) throw ConfigError("training_frames must be >= 1");
}

std::unique_ptr<DensityField> ScenarioConfig::make_field() const {
    if (scene == "box") return std::make_unique<BoxField>(box, box_sigma, box_color);
    return std::make_unique<PlumeField>(sim.plume);
}

AABB ScenarioConfig::effective_enclosure(const OrbitPlan& plan, double worker_altitude) const {
    if (!enclosure.empty()) return enclosure;
    AABB e;
    double r = plan.radius * 0.75;
    e.expand(plan.center - Vec3{r, r, 0.0});
    e.expand(plan.center + Vec3{r, r, worker_altitude * 1.5});
    return e;
}

ScenarioConfig parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        check_keys(j, "scenario",
                   {"schema_version", "seed", "output_dir", "scene", "box", "plume", "manager",
                    "workers", "orbit", "bus", "limits", "sim", "anchor", "grid", "enclosure",
                    "segments", "metrics"});
        if (!j.contains("schema_version")) throw ConfigError("schema_version is required");
        if (!j.contains("seed")) throw ConfigError("seed is required");

        ScenarioConfig c;
        c.schema_version = j.at("schema_version").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.sim.seed = c.seed;
        opt(j, "output_dir", c.output_dir);
        opt(j, "scene", c.scene);
        if (j.contains("box")) {
            const auto& jb = j.at("box");
            check_keys(jb, "box", {"lo", "hi", "sigma", "color"});
            AABB b;
            b.expand(get_vec3(jb.at("lo"), "box.lo"));
            b.expand(get_vec3(jb.at("hi"), "box.hi"));
            c.box = b;
            opt(jb, "sigma", c.box_sigma);
            if (jb.contains("color")) c.box_color = get_rgb(jb.at("color"), "box.color");
        }
        if (j.contains("plume")) parse_plume(j.at("plume"), c.sim.plume);
        if (j.contains("manager")) parse_manager(j.at("manager"), c.sim.manager);
        if (j.contains("workers")) parse_workers(j.at("workers"), c.sim.workers);
        if (j.contains("orbit")) parse_orbit(j.at("orbit"), c.sim);
        if (j.contains("bus")) parse_bus(j.at("bus"), c.sim.bus);
        if (c.sim.bus.seed == 0) c.sim.bus.seed = c.seed;
        if (j.contains("limits")) {
            const auto& jl = j.at("limits");
            check_keys(jl, "limits", {"max_speed", "max_climb", "max_yaw_rate"});
            opt(jl, "max_speed", c.sim.limits.max_speed);
            opt(jl, "max_climb", c.sim.limits.max_climb);
            opt(jl, "max_yaw_rate", c.sim.limits.max_yaw_rate);
        }
        if (j.contains("sim")) parse_sim_misc(j.at("sim"), c.sim, c.sim.timeouts);
        if (j.contains("anchor")) {
            const auto& ja = j.at("anchor");
            check_keys(ja, "anchor", {"latitude", "longitude"});
            opt(ja, "latitude", c.sim.anchor.origin.latitude);
            opt(ja, "longitude", c.sim.anchor.origin.longitude);
        }
        if (j.contains("grid")) parse_grid(j.at("grid"), c.grid);
        if (j.contains("enclosure")) c.enclosure = get_box(j.at("enclosure"), "enclosure");
        if (j.contains("segments")) {
            const auto& js = j.at("segments");
            check_keys(js, "segments", {"duration", "overlap_fractions"});
            opt(js, "duration", c.segments.duration);
            if (js.contains("overlap_fractions"))
                c.segments.overlap_fractions =
                    js.at("overlap_fractions").get<std::vector<double>>();
        }
        if (j.contains("metrics")) {
            const auto& jm = j.at("metrics");
            check_keys(jm, "metrics", {"training_frames", "reference_axis_deg", "background_stride"});
            opt(jm, "training_frames", c.metrics.training_frames);
            opt(jm, "reference_axis_deg", c.metrics.reference_axis_deg);
            opt(jm, "background_stride", c.metrics.background_stride);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string default_scenario_json() {
    return R"({
  "schema_version": 1,
  "seed": 7,
  "output_dir": "out",
  "plume": {
    "emitters": [{"source": [0, 0, 0], "rate": 0.25, "on_seconds": 12.0, "off_seconds": 12.0,
                  "initial_radius": 0.6, "growth_rate": 0.35, "amplitude": 6.0}],
    "wind": [{"t": 0, "velocity": [0.25, 0.15]}],
    "buoyancy": 0.15
  },
  "manager": {
    "start_position": [6, -5, 14],
    "search_waypoint": [0, 0, 14],
    "intrinsics": {"focal": 600, "width": 640, "height": 480},
    "thresholds": {"centroid_tolerance_px": 25, "yaw_tolerance_deg": 15, "centering_gain": 2.0}
  },
  "workers": {
    "intrinsics": {"focal": 240, "width": 320, "height": 240},
    "altitude": 8.0
  },
  "orbit": {"period": 32.0, "capture_fps": 1.0, "revolutions": 5, "from_ring": true},
  "bus": {"latency": 0.1, "tick": 0.1},
  "sim": {"start_time": 60.0, "flight_time": 400.0, "control_render_scale": 4},
  "grid": {"max_cells": 40, "ray_stride": 2, "max_views": 16},
  "segments": {"duration": 8.0, "overlap_fractions": [0.25, 0.5, 0.75]}
})";
}

}  // namespace plume
