#include "plumeswarm/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plume {

namespace {
int to_byte(double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }
}

void write_ply(const PointCloud& cloud, const std::string& path,
               const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "ply\nformat ascii 1.0\n";
    out << "comment scale "
        << (cloud.scale == ScaleStatus::WorldMeters ? "world_meters" : "reconstruction_units")
        << "\n";
    for (const auto& c : comments) out << "comment " << c << "\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    out.precision(7);
    for (const auto& p : cloud.points)
        out << p.position.x << ' ' << p.position.y << ' ' << p.position.z << ' '
            << to_byte(p.color.r) << ' ' << to_byte(p.color.g) << ' ' << to_byte(p.color.b) << '\n';
}

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::size_t count = 0;
    bool ascii = false;
    PointCloud cloud;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
        } else if (tok == "comment") {
            std::string key, val;
            ls >> key >> val;
            if (key == "scale" && val == "world_meters") cloud.scale = ScaleStatus::WorldMeters;
        } else if (tok == "element") {
            std::string what;
            ls >> what >> count;
            if (what != "vertex") throw std::runtime_error("unsupported PLY element: " + what);
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii) throw std::runtime_error("only ascii PLY supported: " + path);
    cloud.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CloudPoint p;
        int r, g, b;
        if (!(in >> p.position.x >> p.position.y >> p.position.z >> r >> g >> b))
            throw std::runtime_error("truncated PLY: " + path);
        p.color = {r / 255.0, g / 255.0, b / 255.0};
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace plume
