#include "plumeswarm/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace plume {

DensitySample VoxelGrid::sample(const Vec3& p, double) const {
    Vec3 rel = (p - origin) / voxel_size;
    int i = static_cast<int>(std::floor(rel.x));
    int j = static_cast<int>(std::floor(rel.y));
    int k = static_cast<int>(std::floor(rel.z));
    if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return {};
    std::size_t idx = index(i, j, k);
    DensitySample s;
    s.sigma = sigma[idx];
    s.rgb = {rgb[3 * idx], rgb[3 * idx + 1], rgb[3 * idx + 2]};
    return s;
}

void VoxelGrid::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "VXGRID1\n" << nx << ' ' << ny << ' ' << nz << ' ' << voxel_size << ' ' << origin.x
        << ' ' << origin.y << ' ' << origin.z << '\n';
    out.write(reinterpret_cast<const char*>(sigma.data()), sigma.size() * sizeof(float));
    out.write(reinterpret_cast<const char*>(rgb.data()), rgb.size() * sizeof(float));
}

VoxelGrid VoxelGrid::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "VXGRID1") throw std::runtime_error("bad grid checkpoint: " + path);
    VoxelGrid g;
    in >> g.nx >> g.ny >> g.nz >> g.voxel_size >> g.origin.x >> g.origin.y >> g.origin.z;
    in.get();
    g.sigma.resize(g.cell_count());
    g.rgb.resize(3 * g.cell_count());
    in.read(reinterpret_cast<char*>(g.sigma.data()), g.sigma.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(g.rgb.data()), g.rgb.size() * sizeof(float));
    if (!in) throw std::runtime_error("truncated grid checkpoint: " + path);
    return g;
}

namespace {

// Amanatides-Woo voxel traversal; visitor(index, chord_length).
template <typename F>
void traverse(const VoxelGrid& g, const Vec3& origin, const Vec3& dir, F&& visit) {
    double t0 = 1e-6, t1 = 1e9;
    if (!g.bounds().clip_ray(origin, dir, &t0, &t1) || t1 <= t0) return;

    Vec3 entry = origin + dir * t0;
    Vec3 rel = (entry - g.origin) / g.voxel_size;
    int i = std::clamp(static_cast<int>(std::floor(rel.x)), 0, g.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor(rel.y)), 0, g.ny - 1);
    int k = std::clamp(static_cast<int>(std::floor(rel.z)), 0, g.nz - 1);

    const double d[3] = {dir.x, dir.y, dir.z};
    const double o[3] = {origin.x, origin.y, origin.z};
    const double go[3] = {g.origin.x, g.origin.y, g.origin.z};
    int idx3[3] = {i, j, k};
    const int n[3] = {g.nx, g.ny, g.nz};
    int step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            step[a] = 0;
            t_max[a] = 1e18;
            t_delta[a] = 1e18;
        } else {
            step[a] = d[a] > 0 ? 1 : -1;
            double next_bound = go[a] + (idx3[a] + (step[a] > 0 ? 1 : 0)) * g.voxel_size;
            t_max[a] = (next_bound - o[a]) / d[a];
            t_delta[a] = g.voxel_size / std::abs(d[a]);
        }
    }
    double t = t0;
    while (t < t1 - 1e-12) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        double t_next = std::min(t_max[axis], t1);
        double len = t_next - t;
        if (len > 0.0)
            visit(g.index(idx3[0], idx3[1], idx3[2]), len);
        t = t_next;
        if (t_next >= t1 - 1e-12) break;
        idx3[axis] += step[axis];
        if (idx3[axis] < 0 || idx3[axis] >= n[axis]) break;
        t_max[axis] += t_delta[axis];
    }
}

constexpr double kTauEmpty = 1e-4;   // observed optical depth treated as smoke-free
constexpr double kTauCap = 6.9;      // opacity saturates; cap -ln(1-O)
constexpr float kSigmaMax = 100.0f;

double observed_tau(float opacity) {
    double o = std::clamp(static_cast<double>(opacity), 0.0, 1.0 - 1e-3);
    return -std::log(1.0 - o);
}

}  // namespace

double view_angular_span_deg(const std::vector<ViewObservation>& views, const Vec3& center) {
    std::vector<double> angles;
    for (const auto& v : views)
        angles.push_back(std::atan2(v.pose.position.y - center.y, v.pose.position.x - center.x));
    if (angles.size() < 2) return 0.0;
    std::sort(angles.begin(), angles.end());
    double max_gap = angles.front() + 2.0 * kPi - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i)
        max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
    return rad2deg(2.0 * kPi - max_gap);
}

VoxelGrid reconstruct_segment(const std::vector<ViewObservation>& views_in, const AABB& enclosure,
                              const GridConfig& config) {
    if (enclosure.empty()) throw std::invalid_argument("empty enclosure");

    std::vector<ViewObservation> views = views_in;
    if (config.max_views > 0 && static_cast<int>(views.size()) > config.max_views) {
        std::vector<ViewObservation> kept;
        double stride = static_cast<double>(views.size()) / config.max_views;
        for (int i = 0; i < config.max_views; ++i)
            kept.push_back(views[static_cast<std::size_t>(i * stride)]);
        views = std::move(kept);
    }
    if (views.size() < 8 || view_angular_span_deg(views, enclosure.center()) < 180.0)
        throw InsufficientCoverageError();

    VoxelGrid grid;
    Vec3 size = enclosure.size();
    double max_dim = std::max({size.x, size.y, size.z});
    grid.voxel_size = max_dim / config.max_cells;
    grid.origin = enclosure.lo;
    grid.nx = std::max(1, static_cast<int>(std::ceil(size.x / grid.voxel_size - 1e-9)));
    grid.ny = std::max(1, static_cast<int>(std::ceil(size.y / grid.voxel_size - 1e-9)));
    grid.nz = std::max(1, static_cast<int>(std::ceil(size.z / grid.voxel_size - 1e-9)));
    std::size_t ncell = grid.cell_count();
    grid.sigma.assign(ncell, static_cast<float>(config.sigma_init));
    grid.rgb.assign(3 * ncell, 0.5f);

    const int stride = std::max(1, config.ray_stride);

    // Carving pass: smoke-free rays zero everything they cross; voxels seen
    // by no ray at all are also zeroed.
    std::vector<std::uint8_t> covered(ncell, 0), carved(ncell, 0);
    for (const auto& view : views) {
        for (int v = stride / 2; v < view.intrinsics.height; v += stride) {
            for (int u = stride / 2; u < view.intrinsics.width; u += stride) {
                Vec3 dir = view.pose.pixel_ray(view.intrinsics, u + 0.5, v + 0.5);
                bool empty_ray = observed_tau(view.image->opacity_at(u, v)) < kTauEmpty;
                traverse(grid, view.pose.position, dir, [&](std::size_t idx, double len) {
                    covered[idx] = 1;
                    // Carve only when the empty ray passes near the voxel
                    // center; grazing rays would erode the true surface.
                    if (empty_ray && len > 0.5 * grid.voxel_size) carved[idx] = 1;
                });
            }
        }
    }
    for (std::size_t i = 0; i < ncell; ++i)
        if (!covered[i] || carved[i]) grid.sigma[i] = 0.0f;

    // Multiplicative algebraic iterations on the smoke rays.
    std::vector<double> num(ncell), den(ncell);
    std::vector<std::pair<std::size_t, double>> path;
    double prev_error = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        double err_sum = 0.0;
        std::size_t ray_count = 0;
        for (const auto& view : views) {
            for (int v = stride / 2; v < view.intrinsics.height; v += stride) {
                for (int u = stride / 2; u < view.intrinsics.width; u += stride) {
                    double tau_obs = observed_tau(view.image->opacity_at(u, v));
                    if (tau_obs > kTauCap) tau_obs = kTauCap;
                    Vec3 dir = view.pose.pixel_ray(view.intrinsics, u + 0.5, v + 0.5);
                    double tau_pred = 0.0;
                    path.clear();
                    traverse(grid, view.pose.position, dir, [&](std::size_t idx, double len) {
                        if (grid.sigma[idx] > 0.0f) {
                            path.emplace_back(idx, len);
                            tau_pred += grid.sigma[idx] * len;
                        }
                    });
                    ++ray_count;
                    err_sum += std::abs(std::exp(-tau_pred) - std::exp(-std::min(tau_obs, kTauCap)));
                    if (tau_obs < kTauEmpty || path.empty()) continue;
                    for (const auto& [idx, len] : path) {
                        num[idx] += len * tau_obs;
                        den[idx] += len * tau_pred;
                    }
                }
            }
        }
        double error = ray_count ? err_sum / ray_count : 0.0;
        if (error > prev_error + 1e-12) {
            if (++rising >= 10) throw DivergenceError();
        } else {
            rising = 0;
        }
        bool converged = error < 0.002 || (std::isfinite(prev_error) &&
                                           prev_error - error < 1e-4 * std::max(prev_error, 1e-9));
        prev_error = std::min(prev_error, error);
        if (converged) break;

        for (std::size_t i = 0; i < ncell; ++i) {
            if (grid.sigma[i] <= 0.0f || den[i] <= 0.0) continue;
            double ratio = std::clamp(num[i] / den[i], 0.1, 10.0);
            grid.sigma[i] = std::min(static_cast<float>(grid.sigma[i] * ratio), kSigmaMax);
        }
    }

    // Color pass: unmix the background from each smoke pixel and distribute
    // the smoke color along the ray, weighted by per-voxel opacity share.
    std::vector<double> col(3 * ncell), colw(ncell);
    for (const auto& view : views) {
        for (int v = stride / 2; v < view.intrinsics.height; v += stride) {
            for (int u = stride / 2; u < view.intrinsics.width; u += stride) {
                float opac = view.image->opacity_at(u, v);
                if (opac < 0.05f) continue;
                Vec3 dir = view.pose.pixel_ray(view.intrinsics, u + 0.5, v + 0.5);
                path.clear();
                double tau_pred = 0.0;
                traverse(grid, view.pose.position, dir, [&](std::size_t idx, double len) {
                    if (grid.sigma[idx] > 0.0f) {
                        path.emplace_back(idx, len);
                        tau_pred += grid.sigma[idx] * len;
                    }
                });
                if (path.empty()) continue;
                double trans_end = std::exp(-tau_pred);
                Rgb pix = view.image->at(u, v);
                Rgb bg = background_color(view.pose.position, dir);
                double denom = std::max(1.0 - trans_end, 1e-3);
                Rgb smoke{std::clamp((pix.r - bg.r * trans_end) / denom, 0.0, 1.0),
                          std::clamp((pix.g - bg.g * trans_end) / denom, 0.0, 1.0),
                          std::clamp((pix.b - bg.b * trans_end) / denom, 0.0, 1.0)};
                double trans = 1.0;
                for (const auto& [idx, len] : path) {
                    double alpha = 1.0 - std::exp(-grid.sigma[idx] * len);
                    double w = trans * alpha;
                    trans *= 1.0 - alpha;
                    col[3 * idx] += w * smoke.r;
                    col[3 * idx + 1] += w * smoke.g;
                    col[3 * idx + 2] += w * smoke.b;
                    colw[idx] += w;
                }
            }
        }
    }
    for (std::size_t i = 0; i < ncell; ++i) {
        if (colw[i] > 1e-9) {
            grid.rgb[3 * i] = static_cast<float>(col[3 * i] / colw[i]);
            grid.rgb[3 * i + 1] = static_cast<float>(col[3 * i + 1] / colw[i]);
            grid.rgb[3 * i + 2] = static_cast<float>(col[3 * i + 2] / colw[i]);
        }
    }
    return grid;
}

VoxelGrid crop_enclosure(const VoxelGrid& grid, const AABB& enclosure) {
    if (!grid.bounds().intersects(enclosure)) throw EmptyIntersectionError();
    VoxelGrid out = grid;
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i)
                if (!enclosure.contains(out.voxel_center(i, j, k)))
                    out.sigma[out.index(i, j, k)] = 0.0f;
    return out;
}

PointCloud export_point_cloud(const VoxelGrid& grid, double density_threshold) {
    if (density_threshold <= 0.0) throw std::invalid_argument("export threshold must be > 0");
    PointCloud cloud;
    cloud.scale = ScaleStatus::ReconstructionUnits;
    for (int k = 0; k < grid.nz; ++k)
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                std::size_t idx = grid.index(i, j, k);
                if (grid.sigma[idx] > density_threshold) {
                    cloud.points.push_back({grid.voxel_center(i, j, k),
                                            Rgb{grid.rgb[3 * idx], grid.rgb[3 * idx + 1],
                                                grid.rgb[3 * idx + 2]}});
                }
            }
    return cloud;
}

PointCloud scale_to_world(const PointCloud& cloud, double reconstructed_diameter,
                          double real_diameter_m, const Vec3& trajectory_center) {
    if (reconstructed_diameter <= 0.0) throw NonPositiveDiameterError();
    double s = real_diameter_m / reconstructed_diameter;
    PointCloud out;
    out.scale = ScaleStatus::WorldMeters;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points)
        out.points.push_back({trajectory_center + (p.position - trajectory_center) * s, p.color});
    return out;
}

double mean_photometric_error(const VoxelGrid& grid, const ViewObservation& view,
                              int pixel_stride) {
    RenderOptions opts;
    opts.step = grid.voxel_size * 0.5;
    double err = 0.0;
    std::size_t n = 0;
    const auto& intr = view.intrinsics;
    AABB box = grid.bounds();
    for (int v = 0; v < intr.height; v += pixel_stride) {
        for (int u = 0; u < intr.width; u += pixel_stride) {
            Vec3 dir = view.pose.pixel_ray(intr, u + 0.5, v + 0.5);
            double t0 = 0.0, t1 = opts.max_distance;
            double trans = 1.0;
            Rgb accum{};
            if (box.clip_ray(view.pose.position, dir, &t0, &t1)) {
                for (double s = t0 + 0.5 * opts.step; s < t1; s += opts.step) {
                    DensitySample d = grid.sample(view.pose.position + dir * s, 0.0);
                    if (d.sigma <= 0.0) continue;
                    double alpha = 1.0 - std::exp(-d.sigma * opts.step);
                    accum += d.rgb * (trans * alpha);
                    trans *= 1.0 - alpha;
                    if (trans < 1e-4) break;
                }
            }
            Rgb bg = background_color(view.pose.position, dir);
            Rgb rendered = accum + bg * trans;
            Rgb truth = view.image->at(u, v);
            err += (std::abs(rendered.r - truth.r) + std::abs(rendered.g - truth.g) +
                    std::abs(rendered.b - truth.b)) /
                   3.0;
            ++n;
        }
    }
    return n ? err / n : 0.0;
}

}  // namespace plume
