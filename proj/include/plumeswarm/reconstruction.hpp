#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "plumeswarm/geometry.hpp"
#include "plumeswarm/plume_field.hpp"
#include "plumeswarm/point_cloud.hpp"
#include "plumeswarm/sensing.hpp"

namespace plume {

class InsufficientCoverageError : public std::runtime_error {
public:
    InsufficientCoverageError()
        : std::runtime_error("reconstruction needs >= 8 views spanning >= 180 degrees") {}
};
class DivergenceError : public std::runtime_error {
public:
    DivergenceError() : std::runtime_error("photometric error increased for 10 iterations") {}
};
class EmptyIntersectionError : public std::runtime_error {
public:
    EmptyIntersectionError() : std::runtime_error("enclosure does not intersect the grid") {}
};
class NonPositiveDiameterError : public std::runtime_error {
public:
    NonPositiveDiameterError() : std::runtime_error("reconstructed diameter must be > 0") {}
};

// Dense emission-absorption volume: per-voxel extinction and color.
// Doubles as a DensityField so the shared renderer can forward-render it.
class VoxelGrid : public DensityField {
public:
    Vec3 origin{};
    double voxel_size = 0.25;
    int nx = 0, ny = 0, nz = 0;
    std::vector<float> sigma;      // nx*ny*nz, x-fastest
    std::vector<float> rgb;        // 3 * nx*ny*nz

    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    Vec3 voxel_center(int i, int j, int k) const {
        return origin + Vec3{(i + 0.5) * voxel_size, (j + 0.5) * voxel_size, (k + 0.5) * voxel_size};
    }
    AABB bounds() const {
        AABB b;
        b.expand(origin);
        b.expand(origin + Vec3{nx * voxel_size, ny * voxel_size, nz * voxel_size});
        return b;
    }

    DensitySample sample(const Vec3& p, double t) const override;
    AABB extent(double t) const override { return bounds(); }

    void save(const std::string& path) const;  // flat binary checkpoint
    static VoxelGrid load(const std::string& path);
};

struct GridConfig {
    int max_cells = 64;            // cells along the longest enclosure axis
    int max_iterations = 100;
    double epsilon_photo = 0.08;   // mean per-pixel absolute rgb error bound
    int ray_stride = 2;            // pixel subsampling for the inversion
    double export_threshold = 0.05;
    double enclosure_inflation = 0.1;
    double sigma_init = 0.5;
    int max_views = 0;             // 0 = use every view
};

struct ViewObservation {
    CameraPose pose{};
    CameraIntrinsics intrinsics{};
    const Image* image = nullptr;  // rendered frame with opacity channel
};

// Iterative multiplicative algebraic update of per-voxel extinction against
// the observed per-ray optical depths, preceded by a carving pass along
// smoke-free rays; per-voxel color by opacity-weighted back-projection.
// Deterministic given inputs and config.
VoxelGrid reconstruct_segment(const std::vector<ViewObservation>& views, const AABB& enclosure,
                              const GridConfig& config);

// Zeroes voxels outside the enclosure; inside voxels are untouched.
VoxelGrid crop_enclosure(const VoxelGrid& grid, const AABB& enclosure);

// One point per voxel with sigma above the threshold, at the voxel center.
PointCloud export_point_cloud(const VoxelGrid& grid, double density_threshold);

// Uniform similarity transform about the trajectory center, converting
// reconstruction units to world meters via the known orbit diameter.
PointCloud scale_to_world(const PointCloud& cloud, double reconstructed_diameter,
                          double real_diameter_m, const Vec3& trajectory_center);

// Mean per-pixel absolute rgb error of the grid forward-rendered at a
// training view, on a pixel-stride subgrid.
double mean_photometric_error(const VoxelGrid& grid, const ViewObservation& view,
                              int pixel_stride = 4);

// Angular span (degrees) of view positions around a center, for the
// coverage precondition.
double view_angular_span_deg(const std::vector<ViewObservation>& views, const Vec3& center);

}  // namespace plume
