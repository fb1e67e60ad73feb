#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "plumeswarm/point_cloud.hpp"
#include "plumeswarm/segment_batcher.hpp"

namespace plume {

class InsufficientSamplesError : public std::runtime_error {
public:
    InsufficientSamplesError()
        : std::runtime_error("classifier training needs >= 10 samples per class") {}
};

// Two-class diagonal-covariance Gaussian model over rgb. Posterior ties go
// to background.
struct GaussianNBModel {
    struct ClassStats {
        double prior = 0.5;
        std::array<double, 3> mean{};
        std::array<double, 3> variance{};  // floored at kVarianceFloor
    };
    ClassStats smoke;
    ClassStats background;

    static constexpr double kVarianceFloor = 1e-4;

    double log_posterior_smoke(const Rgb& c) const;      // unnormalized
    double log_posterior_background(const Rgb& c) const;
    bool is_smoke(const Rgb& c) const {
        return log_posterior_smoke(c) > log_posterior_background(c);
    }

    std::string serialize() const;  // small delimited text, pipeline resume
    static GaussianNBModel deserialize(const std::string& text);
};

GaussianNBModel train_classifier(const std::vector<Rgb>& smoke_pixels,
                                 const std::vector<Rgb>& background_pixels);

// Keeps exactly the points classified as smoke, order preserved.
PointCloud filter_cloud(const PointCloud& cloud, const GaussianNBModel& model);

// Deterministic seeded selection of k distinct record indices.
std::vector<std::size_t> sample_training_frames(std::size_t segment_size, std::size_t k,
                                                std::uint64_t seed);

// Collects per-class training pixels from capture images using the
// segmentation oracle masks. Background pixels are subsampled on a stride.
struct TrainingPixels {
    std::vector<Rgb> smoke;
    std::vector<Rgb> background;
};
TrainingPixels collect_training_pixels(const Image& img, const Mask& mask, int background_stride = 7);

}  // namespace plume
