#include "plumeswarm/plume_field.hpp"

#include <cmath>
#include <stdexcept>

namespace plume {

void PlumeFieldParams::validate() const {
    for (const auto& e : emitters) {
        if (e.initial_radius <= 0.0) throw std::invalid_argument("puff initial radius must be > 0");
        if (e.growth_rate < 0.0) throw std::invalid_argument("puff growth rate must be >= 0");
        if (e.on_seconds <= 0.0 || e.off_seconds < 0.0)
            throw std::invalid_argument("duty cycle periods must be > 0");
        if (e.amplitude < 0.0) throw std::invalid_argument("density amplitude must be >= 0");
        if (e.rate <= 0.0) throw std::invalid_argument("emission rate must be > 0");
    }
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(smoke_color.r) || !in01(smoke_color.g) || !in01(smoke_color.b))
        throw std::invalid_argument("smoke color components must be in [0,1]");
}

PlumeField::PlumeField(PlumeFieldParams params) : params_(std::move(params)) {
    params_.validate();
}

Vec2 PlumeField::wind_displacement(double from, double to) const {
    if (params_.wind.empty() || to <= from) return {};
    Vec2 disp{};
    // Piecewise-constant schedule; entry i applies on [wind[i].t, wind[i+1].t).
    // Time before the first entry is calm.
    for (std::size_t i = 0; i < params_.wind.size(); ++i) {
        double seg_start = std::max(from, params_.wind[i].t);
        double seg_end = (i + 1 < params_.wind.size()) ? params_.wind[i + 1].t : to;
        seg_end = std::min(seg_end, to);
        if (seg_end > seg_start) {
            double dt = seg_end - seg_start;
            disp = disp + params_.wind[i].velocity * dt;
        }
    }
    return disp;
}

Vec3 PlumeField::puff_center(const Puff& p, double t) const {
    double age = t - p.emit_time;
    Vec2 w = wind_displacement(p.emit_time, t);
    return {p.source.x + w.x, p.source.y + w.y, p.source.z + params_.buoyancy * age};
}

double PlumeField::puff_radius(const Puff& p, double t) {
    return p.initial_radius + p.growth_rate * (t - p.emit_time);
}

double PlumeField::puff_peak(const Puff& p, double t) const {
    double r = puff_radius(p, t);
    double dilution = p.initial_radius / r;
    return p.amplitude * dilution * dilution * dilution;
}

void PlumeField::ensure_schedule(double t) const {
    if (!puffs_.empty() || schedule_until_ > 0.0) {
        if (t <= schedule_until_) return;
    }
    // Rebuild the whole emission schedule up to t; puff counts are small.
    puffs_.clear();
    for (const auto& e : params_.emitters) {
        double cycle = e.on_seconds + e.off_seconds;
        for (long c = 0; c * cycle <= t; ++c) {
            double on_start = c * cycle;
            for (long k = 0;; ++k) {
                double te = on_start + k / e.rate;
                if (te >= on_start + e.on_seconds || te > t) break;
                puffs_.push_back({e.source, te, e.initial_radius, e.growth_rate, e.amplitude});
            }
        }
    }
    std::sort(puffs_.begin(), puffs_.end(),
              [](const Puff& a, const Puff& b) { return a.emit_time < b.emit_time; });
    schedule_until_ = t;
}

std::vector<PlumeField::ActivePuff> PlumeField::active_puffs(double t) const {
    ensure_schedule(t);
    std::vector<ActivePuff> out;
    for (const auto& p : puffs_) {
        if (p.emit_time > t) break;
        double peak = puff_peak(p, t);
        if (peak < kAmplitudeFloor) continue;
        out.push_back({puff_center(p, t), puff_radius(p, t), peak});
    }
    return out;
}

DensitySample PlumeField::sample(const Vec3& pos, double t) const {
    if (t < 0.0) return {};
    double sigma = 0.0;
    for (const auto& ap : active_puffs(t)) {
        Vec3 d = pos - ap.center;
        double r2 = d.norm2();
        double cut = kTruncationSigmas * ap.radius;
        if (r2 > cut * cut) continue;
        sigma += ap.peak * std::exp(-0.5 * r2 / (ap.radius * ap.radius));
    }
    if (sigma <= 0.0) return {};
    return {sigma, params_.smoke_color};
}

AABB PlumeField::extent(double t) const {
    AABB box;
    if (t < 0.0) return box;
    for (const auto& ap : active_puffs(t)) {
        double m = kTruncationSigmas * ap.radius;
        box.expand(ap.center - Vec3{m, m, m});
        box.expand(ap.center + Vec3{m, m, m});
    }
    return box;
}

}  // namespace plume
