#include "plumeswarm/cloud_segmentation.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace plume {

namespace {

double log_gaussian(double x, double mean, double var) {
    double d = x - mean;
    return -0.5 * std::log(2.0 * kPi * var) - 0.5 * d * d / var;
}

double class_log_likelihood(const GaussianNBModel::ClassStats& s, const Rgb& c) {
    return std::log(s.prior) + log_gaussian(c.r, s.mean[0], s.variance[0]) +
           log_gaussian(c.g, s.mean[1], s.variance[1]) +
           log_gaussian(c.b, s.mean[2], s.variance[2]);
}

GaussianNBModel::ClassStats fit_class(const std::vector<Rgb>& samples, double prior) {
    GaussianNBModel::ClassStats s;
    s.prior = prior;
    double n = static_cast<double>(samples.size());
    // Fixed index-order accumulation keeps the model bit-reproducible.
    for (const auto& c : samples) {
        s.mean[0] += c.r;
        s.mean[1] += c.g;
        s.mean[2] += c.b;
    }
    for (auto& m : s.mean) m /= n;
    for (const auto& c : samples) {
        double dr = c.r - s.mean[0], dg = c.g - s.mean[1], db = c.b - s.mean[2];
        s.variance[0] += dr * dr;
        s.variance[1] += dg * dg;
        s.variance[2] += db * db;
    }
    for (auto& v : s.variance) v = std::max(v / n, GaussianNBModel::kVarianceFloor);
    return s;
}

}  // namespace

double GaussianNBModel::log_posterior_smoke(const Rgb& c) const {
    return class_log_likelihood(smoke, c);
}
double GaussianNBModel::log_posterior_background(const Rgb& c) const {
    return class_log_likelihood(background, c);
}

GaussianNBModel train_classifier(const std::vector<Rgb>& smoke_pixels,
                                 const std::vector<Rgb>& background_pixels) {
    if (smoke_pixels.size() < 10 || background_pixels.size() < 10)
        throw InsufficientSamplesError();
    double total = static_cast<double>(smoke_pixels.size() + background_pixels.size());
    GaussianNBModel m;
    m.smoke = fit_class(smoke_pixels, smoke_pixels.size() / total);
    m.background = fit_class(background_pixels, background_pixels.size() / total);
    return m;
}

PointCloud filter_cloud(const PointCloud& cloud, const GaussianNBModel& model) {
    PointCloud out;
    out.scale = cloud.scale;
    for (const auto& p : cloud.points)
        if (model.is_smoke(p.color)) out.points.push_back(p);
    return out;
}

std::vector<std::size_t> sample_training_frames(std::size_t segment_size, std::size_t k,
                                                std::uint64_t seed) {
    k = std::min(k, segment_size);
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates over the index vector.
    std::vector<std::size_t> idx(segment_size);
    for (std::size_t i = 0; i < segment_size; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> dist(i, segment_size - 1);
        std::swap(idx[i], idx[dist(rng)]);
    }
    idx.resize(k);
    return idx;
}

TrainingPixels collect_training_pixels(const Image& img, const Mask& mask, int background_stride) {
    TrainingPixels out;
    int count = 0;
    for (int v = 0; v < img.height; ++v)
        for (int u = 0; u < img.width; ++u) {
            if (mask.at(u, v)) {
                out.smoke.push_back(img.at(u, v));
            } else if (count++ % background_stride == 0) {
                out.background.push_back(img.at(u, v));
            }
        }
    return out;
}

std::string GaussianNBModel::serialize() const {
    std::ostringstream os;
    os.precision(17);
    auto row = [&](const char* name, const ClassStats& s) {
        os << name << '\t' << s.prior;
        for (double m : s.mean) os << '\t' << m;
        for (double v : s.variance) os << '\t' << v;
        os << '\n';
    };
    row("smoke", smoke);
    row("background", background);
    return os.str();
}

GaussianNBModel GaussianNBModel::deserialize(const std::string& text) {
    std::istringstream is(text);
    GaussianNBModel model;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name;
        ClassStats s;
        ls >> name >> s.prior;
        for (auto& m : s.mean) ls >> m;
        for (auto& v : s.variance) ls >> v;
        if (name == "smoke")
            model.smoke = s;
        else if (name == "background")
            model.background = s;
        else
            throw std::runtime_error("unknown classifier row: " + name);
    }
    return model;
}

}  // namespace plume
