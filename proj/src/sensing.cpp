#include "plumeswarm/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace plume {

std::size_t Mask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
}

CameraPose CameraPose::nadir(const Vec3& position, double heading_deg) {
    CameraPose p;
    p.position = position;
    p.forward = {0, 0, -1};
    double h = deg2rad(heading_deg);
    p.up = {std::cos(h), std::sin(h), 0};  // image "up" is the drone heading
    return p;
}

CameraPose CameraPose::look_at(const Vec3& position, const Vec3& target) {
    CameraPose p;
    p.position = position;
    p.forward = (target - position).normalized();
    p.up = std::abs(p.forward.z) > 0.999 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
    return p;
}

Rgb background_color(const Vec3& origin, const Vec3& dir) {
    if (dir.z >= -1e-9) {
        double s = std::clamp(dir.z, 0.0, 1.0);
        return {0.62 + 0.05 * s, 0.72 + 0.04 * s, 0.88 + 0.04 * s};  // sky
    }
    double t = -origin.z / dir.z;
    Vec3 g = origin + dir * t;
    bool check = (static_cast<long>(std::floor(g.x / 2.0)) +
                  static_cast<long>(std::floor(g.y / 2.0))) % 2 == 0;
    return check ? Rgb{0.13, 0.35, 0.15} : Rgb{0.36, 0.27, 0.14};
}

namespace {

struct PuffInterval {
    double t0, t1;
    Vec3 center;
    double radius;
    double peak;
};

// Exact parametric interval where the ray is within the 6-sigma support.
bool puff_ray_interval(const Vec3& o, const Vec3& d, const PlumeField::ActivePuff& p,
                       double tmin, double tmax, PuffInterval* out) {
    double cut = PlumeField::kTruncationSigmas * p.radius;
    Vec3 oc = o - p.center;
    double b = oc.dot(d);
    double c = oc.norm2() - cut * cut;
    double disc = b * b - c;
    if (disc <= 0.0) return false;
    double s = std::sqrt(disc);
    double t0 = std::max(-b - s, tmin);
    double t1 = std::min(-b + s, tmax);
    if (t0 >= t1) return false;
    *out = {t0, t1, p.center, p.radius, p.peak};
    return true;
}

}  // namespace

Image render(const CameraIntrinsics& intr, const CameraPose& pose, const DensityField& field,
             double t, const RenderOptions& opts) {
    intr.validate();
    if (pose.forward.norm() < 1e-12 || pose.right().norm() < 1e-12)
        throw std::invalid_argument("camera direction and up must be unit and non-parallel");

    Image img;
    img.width = intr.width;
    img.height = intr.height;
    img.rgb.assign(static_cast<std::size_t>(intr.width) * intr.height, Rgb{});
    img.opacity.assign(static_cast<std::size_t>(intr.width) * intr.height, 0.0f);

    AABB box = field.extent(t);
    const auto* plume_field = dynamic_cast<const PlumeField*>(&field);
    std::vector<PlumeField::ActivePuff> puffs;
    if (plume_field) puffs = plume_field->active_puffs(t);
    Rgb smoke = plume_field ? plume_field->params().smoke_color : Rgb{};

    const double ds = opts.step;
    std::vector<PuffInterval> intervals;
    std::vector<int> active;

    for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
            Vec3 dir = pose.pixel_ray(intr, u + 0.5, v + 0.5);
            std::size_t idx = static_cast<std::size_t>(v) * intr.width + u;

            double trans = 1.0;
            Rgb accum{};
            double t0 = 0.0, t1 = opts.max_distance;
            if (!box.empty() && box.clip_ray(pose.position, dir, &t0, &t1)) {
                if (plume_field) {
                    intervals.clear();
                    for (const auto& p : puffs) {
                        PuffInterval pi;
                        if (puff_ray_interval(pose.position, dir, p, t0, t1, &pi))
                            intervals.push_back(pi);
                    }
                    std::sort(intervals.begin(), intervals.end(),
                              [](const PuffInterval& a, const PuffInterval& b) { return a.t0 < b.t0; });
                    active.clear();
                    std::size_t next = 0;
                    double s = t0 + 0.5 * ds;
                    // Skip empty stretches by jumping to the next interval start.
                    while (s < t1 && (next < intervals.size() || !active.empty())) {
                        if (active.empty() && next < intervals.size() && intervals[next].t0 > s)
                            s = intervals[next].t0 + 0.5 * ds;
                        while (next < intervals.size() && intervals[next].t0 <= s)
                            active.push_back(static_cast<int>(next++));
                        double sigma = 0.0;
                        Vec3 pos = pose.position + dir * s;
                        for (std::size_t a = 0; a < active.size();) {
                            const auto& pi = intervals[active[a]];
                            if (pi.t1 < s) {
                                active[a] = active.back();
                                active.pop_back();
                                continue;
                            }
                            Vec3 dp = pos - pi.center;
                            double r2 = dp.norm2();
                            double cut = PlumeField::kTruncationSigmas * pi.radius;
                            if (r2 <= cut * cut)
                                sigma += pi.peak * std::exp(-0.5 * r2 / (pi.radius * pi.radius));
                            ++a;
                        }
                        if (sigma > 0.0) {
                            double alpha = 1.0 - std::exp(-sigma * ds);
                            if (opts.shade_rgb) accum += smoke * (trans * alpha);
                            trans *= 1.0 - alpha;
                            if (trans < 1e-4) break;
                        }
                        s += ds;
                    }
                } else {
                    for (double s = t0 + 0.5 * ds; s < t1; s += ds) {
                        DensitySample d = field.sample(pose.position + dir * s, t);
                        if (d.sigma <= 0.0) continue;
                        double alpha = 1.0 - std::exp(-d.sigma * ds);
                        if (opts.shade_rgb) accum += d.rgb * (trans * alpha);
                        trans *= 1.0 - alpha;
                        if (trans < 1e-4) break;
                    }
                }
            }
            img.opacity[idx] = static_cast<float>(1.0 - trans);
            if (opts.shade_rgb) {
                Rgb bg = background_color(pose.position, dir);
                Rgb c = accum + bg * trans;
                img.rgb[idx] = {std::clamp(c.r, 0.0, 1.0), std::clamp(c.g, 0.0, 1.0),
                                std::clamp(c.b, 0.0, 1.0)};
            }
        }
    }
    return img;
}

Mask segment_smoke(const Image& img, double threshold) {
    Mask m;
    m.width = img.width;
    m.height = img.height;
    m.bits.resize(img.opacity.size());
    for (std::size_t i = 0; i < img.opacity.size(); ++i)
        m.bits[i] = img.opacity[i] > threshold ? 1 : 0;
    return m;
}

MaskMoments mask_moments(const Mask& m) {
    double n = 0, su = 0, sv = 0;
    for (int v = 0; v < m.height; ++v)
        for (int u = 0; u < m.width; ++u)
            if (m.at(u, v)) {
                n += 1;
                su += u;
                sv += v;
            }
    if (n == 0) throw EmptyMaskError();

    MaskMoments out;
    out.area_fraction = n / (static_cast<double>(m.width) * m.height);
    out.centroid_u = su / n;
    out.centroid_v = sv / n;
    if (n < 3) throw DegenerateMaskError();

    double cuu = 0, cuv = 0, cvv = 0;
    for (int v = 0; v < m.height; ++v)
        for (int u = 0; u < m.width; ++u)
            if (m.at(u, v)) {
                double du = u - out.centroid_u, dv = v - out.centroid_v;
                cuu += du * du;
                cuv += du * dv;
                cvv += dv * dv;
            }
    cuu /= n;
    cuv /= n;
    cvv /= n;

    double tr = cuu + cvv;
    double gap = std::sqrt((cuu - cvv) * (cuu - cvv) + 4.0 * cuv * cuv);
    out.eigenvalue1 = 0.5 * (tr + gap);
    out.eigenvalue2 = 0.5 * (tr - gap);
    if (out.eigenvalue1 < 1e-12) throw DegenerateMaskError();

    if (gap < 1e-9 * std::max(out.eigenvalue1, 1.0)) {
        out.isotropic = true;
        out.axis1 = {1, 0};
        out.axis2 = {0, 1};
    } else if (std::abs(cuv) > 1e-15) {
        Vec2 a1{out.eigenvalue1 - cvv, cuv};
        double l = a1.norm();
        out.axis1 = {a1.x / l, a1.y / l};
        out.axis2 = {-out.axis1.y, out.axis1.x};
    } else if (cuu >= cvv) {
        out.axis1 = {1, 0};
        out.axis2 = {0, 1};
    } else {
        out.axis1 = {0, 1};
        out.axis2 = {-1, 0};
    }
    return out;
}

}  // namespace plume
