#pragma once

#include <cstdint>
#include <vector>

#include "plumeswarm/geometry.hpp"

namespace plume {

// A volumetric scene the cameras can image: extinction density plus emitted
// color at any point and time. Implemented by the synthetic plume and, in
// tests and the static-validation scenario, by simple solid objects.
struct DensitySample {
    double sigma = 0.0;  // extinction per meter, >= 0
    Rgb rgb{};           // emitted color, components in [0, 1]
};

class DensityField {
public:
    virtual ~DensityField() = default;
    virtual DensitySample sample(const Vec3& p, double t) const = 0;
    // Box containing every point with sigma > 0 at time t.
    virtual AABB extent(double t) const = 0;
};

struct Emitter {
    Vec3 source{};               // ENU meters
    double rate = 1.0;           // puffs per second while "on"
    double on_seconds = 1.0;     // duty cycle on phase
    double off_seconds = 0.0;    // duty cycle off phase
    double initial_radius = 0.5; // meters
    double growth_rate = 0.0;    // meters per second
    double amplitude = 1.0;      // peak extinction of a fresh puff
};

struct WindSample {
    double t = 0.0;   // schedule entry applies from this time onward
    Vec2 velocity{};  // horizontal, m/s
};

struct PlumeFieldParams {
    std::vector<Emitter> emitters;
    std::vector<WindSample> wind;  // piecewise-constant; empty means calm
    double buoyancy = 0.0;         // vertical velocity, m/s
    std::uint64_t seed = 0;        // per-puff source jitter
    Rgb smoke_color{0.8, 0.8, 0.8};

    void validate() const;  // throws std::invalid_argument on bad parameters
};

// One emitted smoke parcel, fully determined by its emitter and emission time.
struct Puff {
    Vec3 source{};        // jittered emission point
    double emit_time = 0.0;
    double initial_radius = 0.5;
    double growth_rate = 0.0;
    double amplitude = 1.0;
};

// Gaussian-puff plume. Puffs are emitted on a deterministic schedule during
// the emitter's on phases, advect with wind + buoyancy, grow linearly, and
// dilute mass-conservingly as they grow. Contributions are truncated to zero
// beyond 6 standard deviations so extents and emptiness tests are exact.
class PlumeField : public DensityField {
public:
    explicit PlumeField(PlumeFieldParams params);

    DensitySample sample(const Vec3& p, double t) const override;
    AABB extent(double t) const override;

    const PlumeFieldParams& params() const { return params_; }

    // Puffs emitted by time t whose peak density is still above the
    // liveness floor. Centers/radii evaluated lazily by callers.
    struct ActivePuff {
        Vec3 center{};
        double radius = 0.0;
        double peak = 0.0;  // diluted peak extinction
    };
    std::vector<ActivePuff> active_puffs(double t) const;

    Vec3 puff_center(const Puff& p, double t) const;
    static double puff_radius(const Puff& p, double t);
    double puff_peak(const Puff& p, double t) const;

    // Peak density below this is treated as fully dissipated.
    static constexpr double kAmplitudeFloor = 1e-3;
    static constexpr double kTruncationSigmas = 6.0;

private:
    void ensure_schedule(double t) const;
    Vec2 wind_displacement(double from, double to) const;

    PlumeFieldParams params_;
    mutable std::vector<Puff> puffs_;        // emission schedule cache, sorted by time
    mutable double schedule_until_ = 0.0;
};

// Opaque axis-aligned box, used by the static-object validation scenario.
class BoxField : public DensityField {
public:
    BoxField(const AABB& box, double sigma, Rgb color) : box_(box), sigma_(sigma), color_(color) {}
    DensitySample sample(const Vec3& p, double) const override {
        return box_.contains(p) ? DensitySample{sigma_, color_} : DensitySample{};
    }
    AABB extent(double) const override { return box_; }

private:
    AABB box_;
    double sigma_;
    Rgb color_;
};

}  // namespace plume
