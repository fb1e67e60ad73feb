#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "plumeswarm/plume_field.hpp"
#include "plumeswarm/sensing.hpp"

using namespace plume;

namespace {

CameraIntrinsics small_intr(int w = 64, int h = 48, double focal = 80.0) {
    CameraIntrinsics intr;
    intr.width = w;
    intr.height = h;
    intr.cx = w / 2.0;
    intr.cy = h / 2.0;
    intr.focal = focal;
    return intr;
}

// Thin opaque disk on the ground, used as an exactly-known mask source.
class DiskField : public DensityField {
public:
    DiskField(Vec2 center, double radius) : c_(center), r_(radius) {}
    DensitySample sample(const Vec3& p, double) const override {
        double dx = p.x - c_.x, dy = p.y - c_.y;
        if (p.z >= 0.0 && p.z <= 0.1 && dx * dx + dy * dy <= r_ * r_)
            return {1000.0, {0.8, 0.8, 0.8}};
        return {};
    }
    AABB extent(double) const override {
        AABB b;
        b.expand(Vec3{c_.x - r_, c_.y - r_, 0.0});
        b.expand(Vec3{c_.x + r_, c_.y + r_, 0.1});
        return b;
    }

private:
    Vec2 c_;
    double r_;
};

Mask make_mask(int w, int h, const std::vector<std::pair<int, int>>& px) {
    Mask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, 0);
    for (auto [u, v] : px) m.bits[static_cast<std::size_t>(v) * w + u] = 1;
    return m;
}

}  // namespace

TEST_CASE("empty field renders the pure background") {
    AABB empty;
    BoxField field(empty, 0.0, {});
    auto intr = small_intr();
    CameraPose pose = CameraPose::nadir({0, 0, 10}, 90.0);
    Image img = render(intr, pose, field, 0.0);
    for (int v = 0; v < intr.height; ++v)
        for (int u = 0; u < intr.width; ++u) {
            Rgb expected = background_color(pose.position, pose.pixel_ray(intr, u + 0.5, v + 0.5));
            CHECK(img.at(u, v).r == doctest::Approx(expected.r).epsilon(1e-12));
            CHECK(img.at(u, v).g == doctest::Approx(expected.g).epsilon(1e-12));
            CHECK(img.opacity_at(u, v) == 0.0f);
        }
}

TEST_CASE("an opaque slab filling the frustum renders the smoke color") {
    AABB slab;
    slab.expand(Vec3{-100, -100, 0});
    slab.expand(Vec3{100, 100, 8});
    BoxField field(slab, 500.0, {0.8, 0.8, 0.8});
    auto intr = small_intr();
    Image img = render(intr, CameraPose::nadir({0, 0, 20}, 0.0), field, 0.0);
    for (int v = 0; v < intr.height; v += 7)
        for (int u = 0; u < intr.width; u += 7) {
            CHECK(img.at(u, v).r == doctest::Approx(0.8).epsilon(1e-3));
            CHECK(img.opacity_at(u, v) == doctest::Approx(1.0).epsilon(1e-3));
        }
}

TEST_CASE("doubling puff amplitude never decreases pixel opacity") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(-3.0, 3.0), amp(0.5, 2.0);
    auto intr = small_intr(48, 36, 60.0);
    for (int trial = 0; trial < 10; ++trial) {
        PlumeFieldParams p;
        Emitter e;
        e.source = {pos(rng), pos(rng), 0.0};
        e.rate = 2.0;
        e.on_seconds = 1.0;
        e.off_seconds = 1e9;
        e.initial_radius = 1.0;
        e.amplitude = amp(rng);
        p.emitters = {e};
        auto p2 = p;
        p2.emitters[0].amplitude *= 2.0;
        Image a = render(intr, CameraPose::nadir({0, 0, 12}, 0.0), PlumeField(p), 2.0);
        Image b = render(intr, CameraPose::nadir({0, 0, 12}, 0.0), PlumeField(p2), 2.0);
        for (std::size_t i = 0; i < a.opacity.size(); ++i)
            CHECK(b.opacity[i] >= a.opacity[i] - 1e-6f);
    }
}

TEST_CASE("segmented disk area matches the rasterized-disk oracle") {
    // Altitude 10 m, focal 600 px: 1 m on the ground is 60 px, so a 1 m disk
    // projects to a 60 px disk in a 640x480 frame.
    CameraIntrinsics intr;
    DiskField field({0, 0}, 1.0);
    Image img = render(intr, CameraPose::nadir({0, 0, 10}, 90.0), field, 0.0);
    Mask m = segment_smoke(img);

    std::size_t oracle = 0;  // independent rasterization of the same disk
    for (int v = 0; v < 480; ++v)
        for (int u = 0; u < 640; ++u) {
            double du = (u + 0.5) - intr.cx, dv = (v + 0.5) - intr.cy;
            if (du * du + dv * dv <= 60.0 * 60.0) ++oracle;
        }
    CHECK(std::abs(static_cast<double>(m.count()) - static_cast<double>(oracle)) /
              oracle <
          0.02);
    double fraction = static_cast<double>(m.count()) / (640.0 * 480.0);
    CHECK(fraction == doctest::Approx(kPi * 60.0 * 60.0 / (640.0 * 480.0)).epsilon(0.02));
}

TEST_CASE("mask depends only on the opacity channel") {
    DiskField field({0, 0}, 1.0);
    auto intr = small_intr();
    Image img = render(intr, CameraPose::nadir({0, 0, 10}, 0.0), field, 0.0);
    Mask before = segment_smoke(img);
    for (auto& c : img.rgb) c = {0.0, 0.0, 1.0};  // recolor everything
    Mask after = segment_smoke(img);
    CHECK(before.bits == after.bits);
}

TEST_CASE("mask moments: strip, full frame, rotated ellipse") {
    SUBCASE("horizontal strip aligns with the image x axis") {
        std::vector<std::pair<int, int>> px;
        for (int u = 10; u < 110; ++u)
            for (int v = 20; v < 24; ++v) px.push_back({u, v});
        auto mm = mask_moments(make_mask(128, 64, px));
        CHECK(std::abs(std::atan2(mm.axis1.y, mm.axis1.x)) * 180.0 / kPi < 1.0);
        CHECK(mm.eigenvalue1 > mm.eigenvalue2);
    }
    SUBCASE("full frame has area one and centered centroid") {
        std::vector<std::pair<int, int>> px;
        for (int u = 0; u < 32; ++u)
            for (int v = 0; v < 16; ++v) px.push_back({u, v});
        auto mm = mask_moments(make_mask(32, 16, px));
        CHECK(mm.area_fraction == doctest::Approx(1.0));
        CHECK(mm.centroid_u == doctest::Approx(15.5));
        CHECK(mm.centroid_v == doctest::Approx(7.5));
    }
    SUBCASE("ellipse rotated 30 degrees recovers its major axis") {
        std::vector<std::pair<int, int>> px;
        double c = std::cos(kPi / 6.0), s = std::sin(kPi / 6.0);
        for (int u = 0; u < 320; ++u)
            for (int v = 0; v < 240; ++v) {
                double x = (u - 160.0), y = (v - 120.0);
                double a = c * x + s * y, b = -s * x + c * y;
                if ((a * a) / (80.0 * 80.0) + (b * b) / (20.0 * 20.0) <= 1.0) px.push_back({u, v});
            }
        auto mm = mask_moments(make_mask(320, 240, px));
        double angle = std::atan2(mm.axis1.y, mm.axis1.x) * 180.0 / kPi;
        if (angle < 0) angle += 180.0;
        CHECK(angle == doctest::Approx(30.0).epsilon(0.07));
    }
}

TEST_CASE("mask moment invariants on random masks") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> du(0, 63), dv(0, 47), n(3, 200);
        std::vector<std::pair<int, int>> px;
        int count = n(rng);
        for (int i = 0; i < count; ++i) px.push_back({du(rng), dv(rng)});
        Mask m = make_mask(64, 48, px);
        MaskMoments mm;
        try {
            mm = mask_moments(m);
        } catch (const DegenerateMaskError&) {
            continue;
        }
        CHECK(mm.eigenvalue1 >= mm.eigenvalue2);
        CHECK(mm.eigenvalue2 >= -1e-9);
        CHECK(mm.axis1.norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(mm.axis1.dot(mm.axis2)) < 1e-9);
        int ulo = 64, uhi = -1, vlo = 48, vhi = -1;
        for (auto [u, v] : px) {
            ulo = std::min(ulo, u); uhi = std::max(uhi, u);
            vlo = std::min(vlo, v); vhi = std::max(vhi, v);
        }
        CHECK(mm.centroid_u >= ulo);
        CHECK(mm.centroid_u <= uhi);
        CHECK(mm.centroid_v >= vlo);
        CHECK(mm.centroid_v <= vhi);
    }
}

TEST_CASE("empty and degenerate masks throw") {
    CHECK_THROWS_AS(mask_moments(make_mask(8, 8, {})), EmptyMaskError);
    CHECK_THROWS_AS(mask_moments(make_mask(8, 8, {{1, 1}, {2, 2}})), DegenerateMaskError);
    CHECK_THROWS_AS(mask_moments(make_mask(8, 8, {{3, 3}})), DegenerateMaskError);
}

TEST_CASE("render is translation-equivariant (bit identical)") {
    // Integer translation that is a multiple of the 4 m checker period keeps
    // the background pattern and all arithmetic exact.
    Vec3 delta{4, 8, 0};
    AABB b1;
    b1.expand(Vec3{-1, -1, 0});
    b1.expand(Vec3{1, 1, 2});
    AABB b2;
    b2.expand(b1.lo + delta);
    b2.expand(b1.hi + delta);
    BoxField f1(b1, 3.0, {0.8, 0.8, 0.8});
    BoxField f2(b2, 3.0, {0.8, 0.8, 0.8});
    auto intr = small_intr();
    Image a = render(intr, CameraPose::nadir({0, 0, 9}, 0.0), f1, 0.0);
    Image b = render(intr, CameraPose::nadir(delta + Vec3{0, 0, 9}, 0.0), f2, 0.0);
    CHECK(a.rgb.size() == b.rgb.size());
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        CHECK(a.rgb[i].r == b.rgb[i].r);
        CHECK(a.rgb[i].g == b.rgb[i].g);
        CHECK(a.rgb[i].b == b.rgb[i].b);
        CHECK(a.opacity[i] == b.opacity[i]);
    }
}

TEST_CASE("nadir pose maps image axes to heading-relative ground axes") {
    CameraPose p = CameraPose::nadir({0, 0, 10}, 90.0);  // heading north
    Vec3 r = p.right();
    CHECK(r.x == doctest::Approx(1.0));  // +u is east when heading north
    CHECK(r.y == doctest::Approx(0.0));
    Vec3 center = p.pixel_ray(small_intr(), small_intr().cx, small_intr().cy);
    CHECK(center.z == doctest::Approx(-1.0));
    CHECK_THROWS_AS([] {
        CameraIntrinsics bad;
        bad.focal = -1.0;
        bad.validate();
    }(), std::invalid_argument);
}
