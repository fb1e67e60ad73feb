#include "plumeswarm/convex_hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace plume {

namespace {

struct Face {
    std::array<int, 3> v{};
    Vec3 normal{};
    double offset = 0.0;  // plane: normal . x = offset
    std::vector<int> outside;
    bool alive = true;

    double dist(const Vec3& p) const { return normal.dot(p) - offset; }
};

Vec3 face_normal(const std::vector<Vec3>& pts, int a, int b, int c) {
    return (pts[b] - pts[a]).cross(pts[c] - pts[a]);
}

}  // namespace

ConvexHull convex_hull_3d(const std::vector<Vec3>& points) {
    if (points.size() < 4) throw TooFewPointsError();
    ConvexHull hull;

    AABB box;
    for (const auto& p : points) box.expand(p);
    double diag = box.size().norm();
    if (diag <= 0.0) {
        hull.degenerate = true;
        return hull;
    }
    const double eps = std::max(1e-12, 1e-10 * diag);

    // Initial simplex: the most distant pair along an axis, then the point
    // farthest from that line, then the point farthest from that plane.
    int i0 = 0, i1 = 0;
    {
        double best = -1.0;
        std::array<int, 6> ext{0, 0, 0, 0, 0, 0};
        for (int i = 0; i < static_cast<int>(points.size()); ++i) {
            const Vec3& p = points[i];
            if (p.x < points[ext[0]].x) ext[0] = i;
            if (p.x > points[ext[1]].x) ext[1] = i;
            if (p.y < points[ext[2]].y) ext[2] = i;
            if (p.y > points[ext[3]].y) ext[3] = i;
            if (p.z < points[ext[4]].z) ext[4] = i;
            if (p.z > points[ext[5]].z) ext[5] = i;
        }
        for (int a : ext)
            for (int b : ext) {
                double d = (points[a] - points[b]).norm2();
                if (d > best) {
                    best = d;
                    i0 = a;
                    i1 = b;
                }
            }
        if (best <= eps * eps) {
            hull.degenerate = true;
            return hull;
        }
    }
    int i2 = -1;
    {
        Vec3 dir = (points[i1] - points[i0]).normalized();
        double best = eps;
        for (int i = 0; i < static_cast<int>(points.size()); ++i) {
            Vec3 rel = points[i] - points[i0];
            double d = (rel - dir * rel.dot(dir)).norm();
            if (d > best) {
                best = d;
                i2 = i;
            }
        }
        if (i2 < 0) {
            hull.degenerate = true;  // collinear
            return hull;
        }
    }
    int i3 = -1;
    {
        Vec3 n = face_normal(points, i0, i1, i2).normalized();
        double best = eps;
        for (int i = 0; i < static_cast<int>(points.size()); ++i) {
            double d = std::abs(n.dot(points[i] - points[i0]));
            if (d > best) {
                best = d;
                i3 = i;
            }
        }
        if (i3 < 0) {
            hull.degenerate = true;  // coplanar
            return hull;
        }
    }

    std::vector<Face> faces;
    Vec3 interior = (points[i0] + points[i1] + points[i2] + points[i3]) * 0.25;
    auto add_face = [&](int a, int b, int c) {
        Face f;
        Vec3 n = face_normal(points, a, b, c);
        if (n.dot(interior - points[a]) > 0.0) {
            std::swap(b, c);
            n = -n;
        }
        f.v = {a, b, c};
        f.normal = n.normalized();
        f.offset = f.normal.dot(points[a]);
        faces.push_back(std::move(f));
        return static_cast<int>(faces.size() - 1);
    };
    add_face(i0, i1, i2);
    add_face(i0, i1, i3);
    add_face(i0, i2, i3);
    add_face(i1, i2, i3);

    // Conflict assignment: each candidate point goes to one face it lies above.
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        for (auto& f : faces) {
            if (f.dist(points[i]) > eps) {
                f.outside.push_back(i);
                break;
            }
        }
    }

    std::vector<int> work;
    for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi)
        if (!faces[fi].outside.empty()) work.push_back(fi);

    while (!work.empty()) {
        int fi = work.back();
        work.pop_back();
        if (!faces[fi].alive || faces[fi].outside.empty()) continue;

        const auto& out = faces[fi].outside;
        int apex = out[0];
        double best = faces[fi].dist(points[apex]);
        for (int i : out) {
            double d = faces[fi].dist(points[i]);
            if (d > best) {
                best = d;
                apex = i;
            }
        }
        const Vec3& p = points[apex];

        // Visible faces and the orphaned candidate points.
        std::vector<int> visible;
        std::vector<int> orphans;
        for (int gi = 0; gi < static_cast<int>(faces.size()); ++gi) {
            if (!faces[gi].alive) continue;
            if (faces[gi].dist(p) > eps) {
                visible.push_back(gi);
                for (int q : faces[gi].outside)
                    if (q != apex) orphans.push_back(q);
                faces[gi].outside.clear();
                faces[gi].alive = false;
            }
        }

        // Horizon: directed edges of visible faces whose reverse is not visible.
        std::map<std::pair<int, int>, int> edge_count;
        for (int gi : visible) {
            const auto& v = faces[gi].v;
            for (int e = 0; e < 3; ++e) {
                int a = v[e], b = v[(e + 1) % 3];
                edge_count[{std::min(a, b), std::max(a, b)}]++;
            }
        }
        std::vector<std::pair<int, int>> horizon;
        for (int gi : visible) {
            const auto& v = faces[gi].v;
            for (int e = 0; e < 3; ++e) {
                int a = v[e], b = v[(e + 1) % 3];
                if (edge_count[{std::min(a, b), std::max(a, b)}] == 1) horizon.push_back({a, b});
            }
        }

        std::vector<int> created;
        for (auto [a, b] : horizon) created.push_back(add_face(a, b, apex));

        for (int q : orphans) {
            for (int nf : created) {
                if (faces[nf].dist(points[q]) > eps) {
                    faces[nf].outside.push_back(q);
                    break;
                }
            }
        }
        for (int nf : created)
            if (!faces[nf].outside.empty()) work.push_back(nf);
    }

    double vol6 = 0.0;
    for (const auto& f : faces) {
        if (!f.alive) continue;
        hull.faces.push_back({f.v});
        const Vec3& a = points[f.v[0]];
        const Vec3& b = points[f.v[1]];
        const Vec3& c = points[f.v[2]];
        vol6 += (a - interior).dot((b - interior).cross(c - interior));
    }
    hull.volume = std::abs(vol6) / 6.0;
    return hull;
}

}  // namespace plume
