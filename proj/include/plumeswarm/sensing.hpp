#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "plumeswarm/geometry.hpp"
#include "plumeswarm/plume_field.hpp"

namespace plume {

struct CameraIntrinsics {
    double focal = 600.0;  // pixels
    double cx = 320.0, cy = 240.0;
    int width = 640, height = 480;

    void validate() const {
        if (focal <= 0.0 || width <= 0 || height <= 0)
            throw std::invalid_argument("invalid camera intrinsics");
        if (cx < 0.0 || cx > width || cy < 0.0 || cy > height)
            throw std::invalid_argument("principal point outside image");
    }
};

struct CameraPose {
    Vec3 position{};
    Vec3 forward{0, 0, -1};  // look direction
    Vec3 up{0, 1, 0};

    // Right-handed basis; image +u along right, +v downward (along -up).
    Vec3 right() const { return forward.cross(up).normalized(); }
    Vec3 ortho_up() const { return right().cross(forward).normalized(); }
    Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v) const {
        Vec3 r = right(), o = ortho_up(), f = forward.normalized();
        return (f + r * ((u - intr.cx) / intr.focal) - o * ((v - intr.cy) / intr.focal)).normalized();
    }

    static CameraPose nadir(const Vec3& position, double heading_deg);
    static CameraPose look_at(const Vec3& position, const Vec3& target);
};

// Rendered frame. The opacity channel (1 - transmittance through the density
// field, before background compositing) is the segmentation oracle's input.
struct Image {
    int width = 0, height = 0;
    std::vector<Rgb> rgb;         // row-major
    std::vector<float> opacity;   // row-major, [0, 1]

    Rgb& at(int u, int v) { return rgb[static_cast<std::size_t>(v) * width + u]; }
    const Rgb& at(int u, int v) const { return rgb[static_cast<std::size_t>(v) * width + u]; }
    float opacity_at(int u, int v) const { return opacity[static_cast<std::size_t>(v) * width + u]; }
};

struct Mask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> bits;

    bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
    std::size_t count() const;
};

class EmptyMaskError : public std::runtime_error {
public:
    EmptyMaskError() : std::runtime_error("mask has no smoke pixels") {}
};
class DegenerateMaskError : public std::runtime_error {
public:
    DegenerateMaskError() : std::runtime_error("mask too small for principal axes") {}
};

struct MaskMoments {
    double area_fraction = 0.0;
    double centroid_u = 0.0, centroid_v = 0.0;
    // Eigenvalues descending; axes unit length, axis1 is the major axis.
    double eigenvalue1 = 0.0, eigenvalue2 = 0.0;
    Vec2 axis1{1, 0}, axis2{0, 1};
    bool isotropic = false;  // eigenvalue tie; axes reported as image x/y
};

// Procedural two-tone ground checker + sky, used both as render background
// and by the reconstruction photometric check.
Rgb background_color(const Vec3& origin, const Vec3& dir);

struct RenderOptions {
    double step = 0.1;            // ray-march step, meters
    bool shade_rgb = true;        // false: opacity channel only (control loop path)
    double max_distance = 500.0;
};

Image render(const CameraIntrinsics& intr, const CameraPose& pose, const DensityField& field,
             double t, const RenderOptions& opts = {});

inline constexpr double kSegmentationThreshold = 0.05;

Mask segment_smoke(const Image& img, double threshold = kSegmentationThreshold);
MaskMoments mask_moments(const Mask& m);

}  // namespace plume
