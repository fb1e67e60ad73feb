#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plumeswarm/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

plume::ScenarioConfig load(const CommonOpts& o) {
    plume::ScenarioConfig cfg =
        o.config_path.empty() ? plume::parse_scenario(plume::default_scenario_json())
                              : plume::load_scenario(o.config_path);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.sim.seed = *o.seed;
        if (cfg.sim.bus.seed == 0) cfg.sim.bus.seed = *o.seed;
    }
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    return cfg;
}

std::optional<std::pair<int, int>> parse_range(const std::string& spec) {
    if (spec.empty()) return {};
    auto dash = spec.find('-');
    if (dash == std::string::npos) {
        int v = std::stoi(spec);
        return std::make_pair(v, v);
    }
    return std::make_pair(std::stoi(spec.substr(0, dash)), std::stoi(spec.substr(dash + 1)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drone-swarm smoke plume simulation and reconstruction pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string segments_range;
    int jobs = 1;
    std::uint64_t seed_arg = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "scenario config file (JSON)");
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed_arg, "rng seed (overrides config)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* sim = app.add_subcommand("simulate", "run the swarm protocol and write captures");
    add_common(sim);
    auto* rec = app.add_subcommand("reconstruct", "reconstruct per-segment point clouds");
    add_common(rec);
    rec->add_option("--segments", segments_range, "segment index range, e.g. 3 or 0-9");
    rec->add_option("--jobs", jobs, "parallel segment workers");
    auto* met = app.add_subcommand("metrics", "filter clouds and compute metric series");
    add_common(met);
    auto* all = app.add_subcommand("all", "simulate, reconstruct, and metrics in order");
    add_common(all);
    all->add_option("--jobs", jobs, "parallel segment workers");
    auto* ins = app.add_subcommand("inspect", "print manifests of an output directory");
    add_common(ins);
    int vs_views = 64, vs_cells = 64, vs_size = 160;
    auto* vs = app.add_subcommand("validate-static",
                                  "reconstruct a known static box and report dimension error");
    vs->add_option("--views", vs_views, "camera count on the circular trajectory");
    vs->add_option("--cells", vs_cells, "voxel cells along the longest axis");
    vs->add_option("--image-size", vs_size, "rendered image width in pixels");

    CLI11_PARSE(app, argc, argv);
    if (seed_given) opts.seed = seed_arg;

    try {
        if (vs->parsed()) {
            auto r = plume::run_validate_static(vs_views, vs_cells, vs_size);
            std::printf("cloud points: %zu\n", r.cloud_points);
            for (std::size_t i = 0; i < r.per_pair_error.size(); ++i)
                std::printf("pair %zu error: %.3f%%\n", i, 100.0 * r.per_pair_error[i]);
            std::printf("mean dimension error: %.3f%%\n", 100.0 * r.mean_dimension_error);
            return kExitOk;
        }

        plume::ScenarioConfig cfg;
        try {
            cfg = load(opts);
        } catch (const plume::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfig;
        }
        const std::string& out = cfg.output_dir;

        if (ins->parsed()) {
            std::cout << plume::inspect_output(out);
            return kExitOk;
        }
        if (sim->parsed() || all->parsed()) {
            auto s = plume::run_simulate(cfg, out);
            std::printf("simulate: %zu capture records, stabilized at %.1f s, ready at %.1f s\n",
                        s.record_count, s.stabilized_time, s.barrier_ready_time);
        }
        if (rec->parsed() || all->parsed()) {
            auto r = plume::run_reconstruct(cfg, out, parse_range(segments_range), jobs);
            std::printf("reconstruct: %zu segments (%zu computed, %zu resumed)\n",
                        r.segment_count, r.reconstructed, r.skipped);
        }
        if (met->parsed() || all->parsed()) {
            auto m = plume::run_metrics(cfg, out);
            std::printf("metrics: %zu rows -> %s\n", m.segment_count, m.table_path.c_str());
        }
        return kExitOk;
    } catch (const plume::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return kExitStage;
    }
}
