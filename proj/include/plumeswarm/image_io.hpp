#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plumeswarm/sensing.hpp"

namespace plume {

// Binary PPM (P6) for the rgb channels; the opacity channel is stored next
// to it as a binary PGM (P5) with the extension ".opacity.pgm".
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);  // also loads the opacity sidecar if present

// Capture sidecar: one "key value..." line each for time, drone, position,
// forward, up, focal, principal point, and image size.
struct CaptureSidecar {
    double time = 0.0;
    int drone = 0;
    CameraPose pose{};
    CameraIntrinsics intrinsics{};
};
void write_sidecar(const CaptureSidecar& s, const std::string& path);
CaptureSidecar read_sidecar(const std::string& path);

// Minimal RGB8 PNG writer (zlib-deflated, filter 0).
void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);

// Simple line plot of (x, y) series with axes and numeric tick labels.
void write_line_plot_png(const std::string& path, const std::vector<double>& xs,
                         const std::vector<double>& ys, const std::string& label);

}  // namespace plume
