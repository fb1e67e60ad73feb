#include "plumeswarm/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "plumeswarm/cloud_segmentation.hpp"
#include "plumeswarm/image_io.hpp"
#include "plumeswarm/plume_metrics.hpp"
#include "plumeswarm/reconstruction.hpp"

namespace plume {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StageError("cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string segment_hash(const TimeSegment& seg, const GridConfig& g, const AABB& enclosure) {
    std::ostringstream ss;
    ss.precision(17);
    ss << g.max_cells << ' ' << g.max_iterations << ' ' << g.ray_stride << ' '
       << g.export_threshold << ' ' << g.sigma_init << ' ' << g.max_views << ' ' << enclosure.lo.x
       << ' ' << enclosure.lo.y << ' ' << enclosure.lo.z << ' ' << enclosure.hi.x << ' '
       << enclosure.hi.y << ' ' << enclosure.hi.z;
    for (const auto& r : seg.records) ss << '\n' << r.image_path << ' ' << r.timestamp << ' ' << r.drone;
    std::ostringstream hex;
    hex << std::hex << fnv1a(ss.str());
    return hex.str();
}

std::string cloud_path(const std::string& out_dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "segment_%03d.ply", index);
    return (fs::path(out_dir) / "clouds" / buf).string();
}

AABB reconstruction_enclosure(const ScenarioConfig& config, const OrbitPlan& plan) {
    AABB e = config.effective_enclosure(plan, config.sim.workers.altitude)
                 .inflated(config.grid.enclosure_inflation);
    e.lo.z = std::max(e.lo.z, 0.0);
    return e;
}

}  // namespace

SimulateSummary run_simulate(const ScenarioConfig& config, const std::string& out_dir) {
    config.validate();
    auto field = config.make_field();
    SimResult res = run_swarm_sim(config.sim, *field);

    fs::create_directories(fs::path(out_dir) / "captures");
    std::ostringstream manifest;
    manifest.precision(17);
    manifest << "drone\ttimestamp\tquarter\trevolution\tpx\tpy\tpz\tfx\tfy\tfz\tux\tuy\tuz\t"
                "focal\tcx\tcy\twidth\theight\tpath\n";
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        auto& rec = res.records[i];
        char name[48];
        std::snprintf(name, sizeof name, "cap_%05zu_d%d.ppm", i, rec.drone);
        rec.image_path = (fs::path(out_dir) / "captures" / name).string();
        if (config.sim.render_captures) {
            write_ppm(res.images[i], rec.image_path);
            CaptureSidecar sc{rec.timestamp, rec.drone, rec.pose, rec.intrinsics};
            write_sidecar(sc, rec.image_path + ".meta.txt");
        }
        const auto& p = rec.pose;
        manifest << rec.drone << '\t' << rec.timestamp << '\t' << rec.quarter << '\t'
                 << rec.revolution << '\t' << p.position.x << '\t' << p.position.y << '\t'
                 << p.position.z << '\t' << p.forward.x << '\t' << p.forward.y << '\t'
                 << p.forward.z << '\t' << p.up.x << '\t' << p.up.y << '\t' << p.up.z << '\t'
                 << rec.intrinsics.focal << '\t' << rec.intrinsics.cx << '\t' << rec.intrinsics.cy
                 << '\t' << rec.intrinsics.width << '\t' << rec.intrinsics.height << '\t'
                 << rec.image_path << '\n';
    }
    write_text((fs::path(out_dir) / "capture_manifest.tsv").string(), manifest.str());
    write_text((fs::path(out_dir) / "manager_log.tsv").string(), manager_log_text(res.manager_log));
    write_text((fs::path(out_dir) / "bus_transcript.log").string(), res.bus_transcript);

    json meta;
    meta["record_count"] = res.records.size();
    meta["stabilized_time"] = res.stabilized_time;
    meta["barrier_ready_time"] = res.barrier_ready_time;
    meta["orbit_start_time"] = res.orbit_start_time;
    meta["plan"] = {{"center", {res.plan.center.x, res.plan.center.y, res.plan.center.z}},
                    {"radius", res.plan.radius},
                    {"period", res.plan.period},
                    {"capture_fps", res.plan.capture_fps},
                    {"revolutions", res.plan.revolutions},
                    {"phase_offsets_deg", res.plan.phase_offsets_deg}};
    write_text((fs::path(out_dir) / "sim_meta.json").string(), meta.dump(2) + "\n");

    return {res.records.size(), res.stabilized_time, res.barrier_ready_time, res.plan};
}

std::vector<CaptureRecord> load_capture_manifest(const std::string& out_dir) {
    std::istringstream in(read_text((fs::path(out_dir) / "capture_manifest.tsv").string()));
    std::string line;
    std::getline(in, line);  // header
    std::vector<CaptureRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        CaptureRecord r;
        ls >> r.drone >> r.timestamp >> r.quarter >> r.revolution >> r.pose.position.x >>
            r.pose.position.y >> r.pose.position.z >> r.pose.forward.x >> r.pose.forward.y >>
            r.pose.forward.z >> r.pose.up.x >> r.pose.up.y >> r.pose.up.z >> r.intrinsics.focal >>
            r.intrinsics.cx >> r.intrinsics.cy >> r.intrinsics.width >> r.intrinsics.height;
        std::getline(ls, r.image_path);
        if (!r.image_path.empty() && r.image_path.front() == '\t') r.image_path.erase(0, 1);
        if (!ls && r.image_path.empty()) throw StageError("malformed capture manifest line");
        records.push_back(r);
    }
    return records;
}

OrbitPlan load_run_plan(const std::string& out_dir) {
    json meta = json::parse(read_text((fs::path(out_dir) / "sim_meta.json").string()));
    const auto& jp = meta.at("plan");
    OrbitPlan plan;
    plan.center = {jp.at("center")[0], jp.at("center")[1], jp.at("center")[2]};
    plan.radius = jp.at("radius");
    plan.period = jp.at("period");
    plan.capture_fps = jp.at("capture_fps");
    plan.revolutions = jp.at("revolutions");
    plan.phase_offsets_deg = jp.at("phase_offsets_deg").get<std::vector<double>>();
    return plan;
}

ReconstructSummary run_reconstruct(const ScenarioConfig& config, const std::string& out_dir,
                                   std::optional<std::pair<int, int>> segment_range, int jobs) {
    auto records = load_capture_manifest(out_dir);
    OrbitPlan plan = load_run_plan(out_dir);
    auto segments =
        build_segments(records, config.segments.duration, config.segments.overlap_fractions);
    fs::create_directories(fs::path(out_dir) / "clouds");
    write_text((fs::path(out_dir) / "segments.tsv").string(), segment_manifest(segments));

    std::ostringstream index;
    index.precision(17);
    index << "segment\tt_start\tt_end\trecords\tcloud\n";
    for (const auto& seg : segments)
        index << seg.index << '\t' << seg.start << '\t' << seg.end << '\t' << seg.records.size()
              << '\t' << cloud_path(out_dir, seg.index) << '\n';
    write_text((fs::path(out_dir) / "clouds" / "index.tsv").string(), index.str());

    AABB enclosure = reconstruction_enclosure(config, plan);

    ReconstructSummary summary;
    summary.segment_count = segments.size();
    std::mutex mtx;
    std::atomic<std::size_t> next{0};
    std::string first_error;

    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= segments.size()) return;
            const auto& seg = segments[i];
            if (segment_range &&
                (seg.index < segment_range->first || seg.index > segment_range->second))
                continue;
            std::string ply = cloud_path(out_dir, seg.index);
            std::string meta = ply + ".meta";
            std::string hash = segment_hash(seg, config.grid, enclosure);
            if (fs::exists(ply) && fs::exists(meta) && read_text(meta) == hash) {
                std::lock_guard<std::mutex> lk(mtx);
                ++summary.skipped;
                continue;
            }
            try {
                std::vector<Image> images;
                std::vector<ViewObservation> views;
                images.reserve(seg.records.size());
                for (const auto& r : seg.records) images.push_back(read_ppm(r.image_path));
                for (std::size_t k = 0; k < seg.records.size(); ++k)
                    views.push_back({seg.records[k].pose, seg.records[k].intrinsics, &images[k]});
                VoxelGrid grid = reconstruct_segment(views, enclosure, config.grid);
                grid = crop_enclosure(grid, enclosure);
                PointCloud cloud = export_point_cloud(grid, config.grid.export_threshold);
                cloud = scale_to_world(cloud, plan.radius * 2.0, plan.radius * 2.0, plan.center);
                write_ply(cloud, ply, {"segment " + std::to_string(seg.index)});
                write_text(meta, hash);
                std::lock_guard<std::mutex> lk(mtx);
                ++summary.reconstructed;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(mtx);
                if (first_error.empty())
                    first_error =
                        "segment " + std::to_string(seg.index) + ": " + e.what();
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw StageError(first_error);
    return summary;
}

MetricsSummary run_metrics(const ScenarioConfig& config, const std::string& out_dir) {
    auto records = load_capture_manifest(out_dir);
    if (records.empty()) throw StageError("no capture records to train on");
    OrbitPlan plan = load_run_plan(out_dir);

    auto frame_ids =
        sample_training_frames(records.size(), config.metrics.training_frames, config.seed);
    std::vector<Rgb> smoke, background;
    for (std::size_t idx : frame_ids) {
        Image img = read_ppm(records[idx].image_path);
        Mask mask = segment_smoke(img);
        TrainingPixels px = collect_training_pixels(img, mask, config.metrics.background_stride);
        smoke.insert(smoke.end(), px.smoke.begin(), px.smoke.end());
        background.insert(background.end(), px.background.begin(), px.background.end());
    }
    GaussianNBModel model = train_classifier(smoke, background);

    fs::create_directories(fs::path(out_dir) / "metrics");
    write_text((fs::path(out_dir) / "metrics" / "nb_model.txt").string(), model.serialize());

    Vec2 origin{plan.center.x, plan.center.y};
    if (!config.sim.plume.emitters.empty()) {
        const Vec3& s = config.sim.plume.emitters.front().source;
        origin = {s.x, s.y};
    }
    double ref = deg2rad(config.metrics.reference_axis_deg);
    Vec2 reference{std::cos(ref), std::sin(ref)};

    std::istringstream idx(read_text((fs::path(out_dir) / "clouds" / "index.tsv").string()));
    std::string line;
    std::getline(idx, line);
    std::vector<PlumeMetrics> series;
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int seg;
        double t0, t1;
        std::size_t nrec;
        std::string path;
        ls >> seg >> t0 >> t1 >> nrec;
        std::getline(ls, path);
        if (!path.empty() && path.front() == '\t') path.erase(0, 1);
        if (!fs::exists(path)) continue;  // partial reconstruct runs are fine
        PointCloud cloud = filter_cloud(read_ply(path), model);
        series.push_back(compute_metrics(cloud, seg, t0, origin, reference));
    }

    std::string table = metrics_table(series);
    std::string table_path = (fs::path(out_dir) / "metrics" / "metrics.tsv").string();
    write_text(table_path, table);

    std::vector<double> xs, vol, dev, hgt;
    for (const auto& m : series) {
        xs.push_back(m.t_start);
        vol.push_back(m.volume_m3);
        dev.push_back(m.deviation_deg);
        hgt.push_back(m.average_height_m);
    }
    write_line_plot_png((fs::path(out_dir) / "metrics" / "volume.png").string(), xs, vol,
                        "Vs m3");
    write_line_plot_png((fs::path(out_dir) / "metrics" / "deviation.png").string(), xs, dev,
                        "dTheta deg");
    write_line_plot_png((fs::path(out_dir) / "metrics" / "height.png").string(), xs, hgt,
                        "Hbar m");
    return {series.size(), table_path};
}

std::string inspect_output(const std::string& out_dir) {
    std::ostringstream os;
    auto count_lines = [](const std::string& path) {
        std::ifstream in(path);
        std::string l;
        long n = -1;  // minus header
        while (std::getline(in, l)) ++n;
        return std::max(0L, n);
    };
    fs::path root(out_dir);
    os << "output: " << out_dir << '\n';
    if (fs::exists(root / "capture_manifest.tsv"))
        os << "captures: " << count_lines((root / "capture_manifest.tsv").string()) << " records\n";
    if (fs::exists(root / "sim_meta.json")) {
        OrbitPlan plan = load_run_plan(out_dir);
        os << "orbit: radius " << plan.radius << " m, period " << plan.period << " s, "
           << plan.revolutions << " revolutions at " << plan.capture_fps << " fps\n";
    }
    if (fs::exists(root / "segments.tsv"))
        os << "segments: " << count_lines((root / "segments.tsv").string()) << '\n';
    if (fs::exists(root / "clouds")) {
        std::size_t n = 0;
        for (const auto& e : fs::directory_iterator(root / "clouds"))
            if (e.path().extension() == ".ply") ++n;
        os << "clouds: " << n << " files\n";
    }
    if (fs::exists(root / "metrics" / "metrics.tsv"))
        os << "metrics rows: " << count_lines((root / "metrics" / "metrics.tsv").string()) << '\n';
    return os.str();
}

StaticValidationResult run_validate_static(int views, int max_cells, int image_size) {
    AABB truth;
    truth.expand(Vec3{-3.0, -1.25, 0.0});
    truth.expand(Vec3{3.0, 1.25, 2.0});
    BoxField field(truth, 50.0, {0.85, 0.1, 0.1});

    CameraIntrinsics intr;
    intr.width = image_size;
    intr.height = image_size * 3 / 4;
    intr.cx = intr.width / 2.0;
    intr.cy = intr.height / 2.0;
    intr.focal = image_size * 1.1;

    const double orbit_radius = 10.0, altitude = 10.0;
    Vec3 aim = truth.center();
    std::vector<Image> images(views);
    std::vector<ViewObservation> obs(views);
    RenderOptions opts;
    opts.step = 0.05;
    for (int i = 0; i < views; ++i) {
        double a = 2.0 * kPi * i / views;
        Vec3 pos{orbit_radius * std::cos(a), orbit_radius * std::sin(a), altitude};
        CameraPose pose = CameraPose::look_at(pos, aim);
        images[i] = render(intr, pose, field, 0.0, opts);
        obs[i] = {pose, intr, &images[i]};
    }

    AABB enclosure;
    enclosure.expand(Vec3{-4.2, -4.2, 0.0});
    enclosure.expand(Vec3{4.2, 4.2, 3.2});
    GridConfig grid;
    grid.max_cells = max_cells;
    grid.ray_stride = 2;
    grid.max_views = 0;
    VoxelGrid vg = reconstruct_segment(obs, enclosure, grid);
    vg = crop_enclosure(vg, enclosure);
    PointCloud cloud = export_point_cloud(vg, grid.export_threshold);
    cloud = scale_to_world(cloud, orbit_radius * 2.0, orbit_radius * 2.0, {0, 0, 0});

    StaticValidationResult result;
    result.cloud_points = cloud.points.size();
    if (cloud.points.empty()) throw StageError("static validation produced an empty cloud");

    // Reference point pairs with known true separations: edges and diagonals
    // between box corners, measured between the nearest reconstructed points.
    const std::pair<Vec3, Vec3> pairs[8] = {
        {{-3, -1.25, 0}, {3, -1.25, 0}},  // bottom edge along x
        {{-3, 1.25, 2}, {3, 1.25, 2}},    // top edge along x
        {{-3, -1.25, 0}, {-3, 1.25, 0}},  // bottom edge along y
        {{3, -1.25, 2}, {3, 1.25, 2}},    // top edge along y
        {{3, 1.25, 0}, {3, 1.25, 2}},     // vertical edge
        {{-3, -1.25, 0}, {-3, -1.25, 2}}, // vertical edge
        {{-3, -1.25, 0}, {3, 1.25, 0}},   // bottom face diagonal
        {{-3, -1.25, 0}, {3, 1.25, 2}},   // body diagonal
    };
    // Each exported point stands for a voxel cube; measure against the point
    // of that cube nearest the reference so corner measurements are not
    // biased inward by half a voxel.
    double h2 = vg.voxel_size * 0.5;
    auto nearest = [&](const Vec3& ref) {
        Vec3 best{};
        double best_d = 1e18;
        for (const auto& p : cloud.points) {
            Vec3 q{std::clamp(ref.x, p.position.x - h2, p.position.x + h2),
                   std::clamp(ref.y, p.position.y - h2, p.position.y + h2),
                   std::clamp(ref.z, p.position.z - h2, p.position.z + h2)};
            double d = (q - ref).norm2();
            if (d < best_d) {
                best_d = d;
                best = q;
            }
        }
        return best;
    };
    for (const auto& [a, b] : pairs) {
        double expected = (b - a).norm();
        double measured = (nearest(b) - nearest(a)).norm();
        result.per_pair_error.push_back(std::abs(measured - expected) / expected);
    }
    double sum = 0.0;
    for (double e : result.per_pair_error) sum += e;
    result.mean_dimension_error = sum / result.per_pair_error.size();
    return result;
}

}  // namespace plume
