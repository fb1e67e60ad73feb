#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "plumeswarm/plume_metrics.hpp"

using namespace plume;

namespace {

std::vector<Vec3> unit_cube() {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i)
        pts.push_back({static_cast<double>(i & 1), static_cast<double>((i >> 1) & 1),
                       static_cast<double>((i >> 2) & 1)});
    return pts;
}

// Point-in-hull oracle from the face planes: a point is inside when it lies
// on the centroid side of every face plane.
struct HullTester {
    std::vector<Vec3> normals;
    std::vector<double> offsets;

    HullTester(const ConvexHull& hull, const std::vector<Vec3>& pts) {
        Vec3 centroid{};
        for (const auto& p : pts) centroid += p;
        centroid = centroid / static_cast<double>(pts.size());
        for (const auto& f : hull.faces) {
            Vec3 a = pts[f.vertices[0]], b = pts[f.vertices[1]], c = pts[f.vertices[2]];
            Vec3 n = (b - a).cross(c - a);
            double d = n.dot(a);
            if (n.dot(centroid) > d) {  // flip so the centroid is on the negative side
                n = -n;
                d = -d;
            }
            normals.push_back(n);
            offsets.push_back(d);
        }
    }
    bool inside(const Vec3& p) const {
        for (std::size_t i = 0; i < normals.size(); ++i)
            if (normals[i].dot(p) > offsets[i] + 1e-12) return false;
        return true;
    }
};

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    return pts;
}

}  // namespace

TEST_CASE("hull volume closed forms: cube and regular tetrahedron") {
    HullVolume cube = convex_hull_volume(unit_cube());
    CHECK_FALSE(cube.degenerate);
    CHECK(cube.volume == doctest::Approx(1.0).epsilon(1e-9));

    // Regular tetrahedron with edge 1: vertices of alternating cube corners
    // scaled so edges are unit length.
    double s = 1.0 / std::sqrt(2.0);
    std::vector<Vec3> tetra{{0, 0, 0}, {s, s, 0}, {s, 0, s}, {0, s, s}};
    HullVolume tv = convex_hull_volume(tetra);
    CHECK(tv.volume == doctest::Approx(1.0 / (6.0 * std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("hull volume matches the Monte-Carlo containment oracle") {
    std::mt19937_64 rng(31);
    auto pts = random_points(rng, 50);
    ConvexHull hull = convex_hull_3d(pts);
    REQUIRE_FALSE(hull.degenerate);
    HullTester tester(hull, pts);

    AABB box;
    for (const auto& p : pts) box.expand(p);
    Vec3 size = box.size();
    double box_volume = size.x * size.y * size.z;

    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y),
        uz(box.lo.z, box.hi.z);
    std::size_t inside = 0, total = 1000000;
    for (std::size_t i = 0; i < total; ++i)
        inside += tester.inside({ux(rng), uy(rng), uz(rng)});
    double mc_volume = box_volume * inside / static_cast<double>(total);
    CHECK(hull.volume == doctest::Approx(mc_volume).epsilon(0.02));

    // Every input point must be inside or on its own hull.
    for (const auto& p : pts) CHECK(tester.inside(p));
}

TEST_CASE("degenerate and undersized hulls") {
    CHECK_THROWS_AS(convex_hull_volume({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), TooFewPointsError);
    HullVolume flat = convex_hull_volume({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 3, 0}});
    CHECK(flat.degenerate);
    CHECK(flat.volume == 0.0);
    HullVolume line = convex_hull_volume({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    CHECK(line.degenerate);
}

TEST_CASE("hull volume invariances: rigid motion, scaling, monotonicity") {
    std::mt19937_64 rng(37);
    auto pts = random_points(rng, 30);
    double base = convex_hull_volume(pts).volume;

    double a = 0.7;
    Vec3 shift{5.0, -2.0, 11.0};
    std::vector<Vec3> moved;
    for (const auto& p : pts)
        moved.push_back({std::cos(a) * p.x - std::sin(a) * p.y + shift.x,
                         std::sin(a) * p.x + std::cos(a) * p.y + shift.y, p.z + shift.z});
    CHECK(convex_hull_volume(moved).volume == doctest::Approx(base).epsilon(1e-9));

    std::vector<Vec3> scaled;
    for (const auto& p : pts) scaled.push_back(p * 2.5);
    CHECK(convex_hull_volume(scaled).volume ==
          doctest::Approx(base * 2.5 * 2.5 * 2.5).epsilon(1e-9));

    auto more = pts;
    more.push_back({10.0, 10.0, 10.0});
    CHECK(convex_hull_volume(more).volume >= base - 1e-12);
}

TEST_CASE("angle of deviation reference cases") {
    std::vector<Vec3> sym{{2, 1, 0}, {2, -1, 0}, {4, 0.5, 1}, {4, -0.5, 1}};
    CHECK(angle_of_deviation(sym, {0, 0}, {1, 0}) == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<Vec3> north{{0, 1, 0}, {0, 2, 0}, {0, 3, 5}};
    CHECK(angle_of_deviation(north, {0, 0}, {1, 0}) == doctest::Approx(90.0).epsilon(1e-12));

    std::vector<Vec3> diag{{1, 1, 0}};
    CHECK(angle_of_deviation(diag, {0, 0}, {1, 0}) == doctest::Approx(45.0).epsilon(1e-9));

    // Shifted origin.
    CHECK(angle_of_deviation(diag, {1, 0}, {1, 0}) == doctest::Approx(90.0).epsilon(1e-9));
    // Non-x reference axis.
    CHECK(angle_of_deviation(diag, {0, 0}, {0, 1}) == doctest::Approx(-45.0).epsilon(1e-9));

    CHECK_THROWS_AS(angle_of_deviation({{0, 0, 3}}, {0, 0}, {1, 0}), UndefinedDirectionError);
    CHECK_THROWS_AS(angle_of_deviation({}, {0, 0}, {1, 0}), EmptyCloudError);
}

TEST_CASE("angle of deviation: scale invariance and rotation equivariance") {
    std::mt19937_64 rng(41);
    auto pts = random_points(rng, 25);
    for (auto& p : pts) p.x += 10.0;  // keep the mean away from the origin
    double base = angle_of_deviation(pts, {0, 0}, {1, 0});

    std::vector<Vec3> scaled;
    for (const auto& p : pts) scaled.push_back(p * 3.0);
    CHECK(angle_of_deviation(scaled, {0, 0}, {1, 0}) == doctest::Approx(base).epsilon(1e-9));

    for (double phi : {30.0, -120.0, 177.0}) {
        double c = std::cos(deg2rad(phi)), s = std::sin(deg2rad(phi));
        std::vector<Vec3> rot;
        for (const auto& p : pts) rot.push_back({c * p.x - s * p.y, s * p.x + c * p.y, p.z});
        double got = angle_of_deviation(rot, {0, 0}, {1, 0});
        CHECK(std::abs(wrap_deg(got - base - phi)) < 1e-9);
    }
}

TEST_CASE("average height: constants, mixture, large-sample mean, linearity") {
    CHECK(average_height({{1, 2, 7.5}, {0, 0, 7.5}}) == doctest::Approx(7.5));
    CHECK(average_height({{0, 0, 0}, {0, 0, 2}, {1, 1, 0}, {1, 1, 2}}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(average_height({}), EmptyCloudError);

    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> uz(0.0, 10.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100000; ++i) pts.push_back({0, 0, uz(rng)});
    CHECK(average_height(pts) == doctest::Approx(5.0).epsilon(0.01));

    double before = average_height(pts);
    for (auto& p : pts) p.z += 3.25;
    CHECK(average_height(pts) == doctest::Approx(before + 3.25).epsilon(1e-12));
}

TEST_CASE("per-segment metrics flag degenerate clouds instead of aborting") {
    PointCloud empty;
    PlumeMetrics m = compute_metrics(empty, 3, 24.0, {0, 0}, {1, 0});
    CHECK(m.degenerate);
    CHECK(m.volume_m3 == 0.0);
    CHECK(m.point_count == 0);
    CHECK(m.segment_index == 3);
    CHECK(m.t_start == 24.0);

    PointCloud flat;
    for (int i = 0; i < 6; ++i) flat.points.push_back({{1.0 * i, 2.0, 0.0}, {}});
    PlumeMetrics f = compute_metrics(flat, 0, 0.0, {0, 0}, {1, 0});
    CHECK(f.degenerate);
    CHECK(f.volume_m3 == 0.0);
    CHECK(f.point_count == 6);
}

TEST_CASE("timeseries over replicated clouds is constant and ordered") {
    PointCloud cloud;
    for (const auto& p : unit_cube()) cloud.points.push_back({p + Vec3{5, 0, 1}, {}});
    std::vector<PointCloud> clouds(4, cloud);
    std::vector<double> starts{0.0, 2.0, 4.0, 6.0};
    auto series = metrics_timeseries(clouds, starts, {0, 0}, {1, 0});
    REQUIRE(series.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(series[i].segment_index == static_cast<int>(i));
        CHECK(series[i].t_start == starts[i]);
        CHECK(series[i].volume_m3 == doctest::Approx(series[0].volume_m3));
        CHECK(series[i].average_height_m == doctest::Approx(1.5));
        CHECK_FALSE(series[i].degenerate);
    }
}

TEST_CASE("metrics table round-trips") {
    PointCloud cloud;
    for (const auto& p : unit_cube()) cloud.points.push_back({p, {}});
    std::vector<PlumeMetrics> series{
        compute_metrics(cloud, 0, 0.0, {-1, 0}, {1, 0}),
        compute_metrics(PointCloud{}, 1, 2.0, {-1, 0}, {1, 0}),
    };
    auto back = parse_metrics_table(metrics_table(series));
    REQUIRE(back.size() == 2);
    CHECK(back[0].volume_m3 == doctest::Approx(series[0].volume_m3).epsilon(1e-6));
    CHECK(back[0].deviation_deg == doctest::Approx(series[0].deviation_deg).epsilon(1e-6));
    CHECK(back[0].point_count == 8);
    CHECK_FALSE(back[0].degenerate);
    CHECK(back[1].degenerate);
    CHECK(back[1].t_start == 2.0);
}
