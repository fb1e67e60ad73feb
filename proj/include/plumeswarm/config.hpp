#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "plumeswarm/reconstruction.hpp"
#include "plumeswarm/swarm_sim.hpp"

namespace plume {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SegmentsConfig {
    double duration = 8.0;
    std::vector<double> overlap_fractions{0.25, 0.5, 0.75};
};

struct MetricsConfig {
    int training_frames = 3;
    double reference_axis_deg = 0.0;  // AOD reference, degrees CCW from East
    int background_stride = 7;
};

// One scenario file drives the whole pipeline. The imaged scene is either the
// synthetic plume ("plume") or a static opaque box ("box", the accuracy
// validation target).
struct ScenarioConfig {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string scene = "plume";
    AABB box{};            // scene == "box"
    double box_sigma = 50.0;
    Rgb box_color{0.85, 0.1, 0.1};

    SimConfig sim;
    GridConfig grid;
    AABB enclosure{};      // reconstruction/crop region; empty = derive from orbit
    SegmentsConfig segments;
    MetricsConfig metrics;

    void validate() const;  // throws ConfigError
    std::unique_ptr<DensityField> make_field() const;
    AABB effective_enclosure(const OrbitPlan& plan, double worker_altitude) const;
};

// Strict parse: unknown keys anywhere are rejected, schema_version must match.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string default_scenario_json();

}  // namespace plume
