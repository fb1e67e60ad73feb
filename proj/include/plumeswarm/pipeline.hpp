#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plumeswarm/config.hpp"
#include "plumeswarm/segment_batcher.hpp"
#include "plumeswarm/swarm_sim.hpp"

namespace plume {

class StageError : public std::runtime_error {
public:
    explicit StageError(const std::string& what) : std::runtime_error(what) {}
};

struct SimulateSummary {
    std::size_t record_count = 0;
    double stabilized_time = 0.0;
    double barrier_ready_time = 0.0;
    OrbitPlan plan{};
};

// Runs the closed-loop swarm protocol and writes captures (PPM + opacity
// sidecar + pose sidecar), a capture manifest, the manager tick log, the bus
// transcript, and a small run-metadata file under <out>/.
SimulateSummary run_simulate(const ScenarioConfig& config, const std::string& out_dir);

// Loads the capture manifest back from a simulate output directory.
std::vector<CaptureRecord> load_capture_manifest(const std::string& out_dir);
OrbitPlan load_run_plan(const std::string& out_dir);

struct ReconstructSummary {
    std::size_t segment_count = 0;
    std::size_t reconstructed = 0;  // segments actually recomputed this run
    std::size_t skipped = 0;        // resumed from existing cloud files
};

// Builds time segments, reconstructs each into a PLY cloud under
// <out>/clouds/, and writes the segment manifest. Per-segment resume: a
// segment is skipped when its cloud file exists and its sidecar hash matches.
ReconstructSummary run_reconstruct(const ScenarioConfig& config, const std::string& out_dir,
                                   std::optional<std::pair<int, int>> segment_range = {},
                                   int jobs = 1);

struct MetricsSummary {
    std::size_t segment_count = 0;
    std::string table_path;
};

// Trains the color classifier on seeded capture frames, filters every cloud,
// computes the volume / deviation / height series, and writes the metrics
// table plus three plot images under <out>/metrics/.
MetricsSummary run_metrics(const ScenarioConfig& config, const std::string& out_dir);

// Human-readable summary of whatever manifests exist under <out>/.
std::string inspect_output(const std::string& out_dir);

struct StaticValidationResult {
    double mean_dimension_error = 0.0;          // fraction over the reference pairs
    std::vector<double> per_pair_error;
    std::size_t cloud_points = 0;
};

// Accuracy scenario: a known static box imaged from a circular trajectory,
// reconstructed, scaled by the known trajectory diameter, and measured
// against the true dimensions along eight reference directions.
StaticValidationResult run_validate_static(int views, int max_cells, int image_size);

}  // namespace plume
