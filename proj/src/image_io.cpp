#include "plumeswarm/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plume {

namespace {

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string opacity_path(const std::string& ppm_path) {
    std::string p = ppm_path;
    auto dot = p.rfind(".ppm");
    if (dot != std::string::npos) p.erase(dot);
    return p + ".opacity.pgm";
}

}  // namespace

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
            const Rgb& c = img.at(u, v);
            row[u * 3 + 0] = quantize(c.r);
            row[u * 3 + 1] = quantize(c.g);
            row[u * 3 + 2] = quantize(c.b);
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }

    std::ofstream op(opacity_path(path), std::ios::binary);
    if (!op) throw std::runtime_error("cannot write " + opacity_path(path));
    op << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<std::uint8_t> orow(img.width);
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) orow[u] = quantize(img.opacity_at(u, v));
        op.write(reinterpret_cast<const char*>(orow.data()), orow.size());
    }
}

namespace {

void read_pnm_header(std::ifstream& in, const std::string& magic, int* w, int* h) {
    std::string m;
    int maxval;
    in >> m >> *w >> *h >> maxval;
    if (m != magic || maxval != 255) throw std::runtime_error("unsupported PNM header");
    in.get();  // single whitespace before binary data
}

}  // namespace

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    Image img;
    read_pnm_header(in, "P6", &img.width, &img.height);
    std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<std::uint8_t> buf(n * 3);
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!in) throw std::runtime_error("truncated PPM: " + path);
    img.rgb.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        img.rgb[i] = {buf[i * 3] / 255.0, buf[i * 3 + 1] / 255.0, buf[i * 3 + 2] / 255.0};

    img.opacity.assign(n, 0.0f);
    std::string opath = opacity_path(path);
    if (std::filesystem::exists(opath)) {
        std::ifstream op(opath, std::ios::binary);
        int w, h;
        read_pnm_header(op, "P5", &w, &h);
        if (w != img.width || h != img.height)
            throw std::runtime_error("opacity channel size mismatch: " + opath);
        std::vector<std::uint8_t> obuf(n);
        op.read(reinterpret_cast<char*>(obuf.data()), obuf.size());
        for (std::size_t i = 0; i < n; ++i) img.opacity[i] = obuf[i] / 255.0f;
    }
    return img;
}

void write_sidecar(const CaptureSidecar& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "time " << s.time << "\n";
    out << "drone " << s.drone << "\n";
    out << "position " << s.pose.position.x << ' ' << s.pose.position.y << ' '
        << s.pose.position.z << "\n";
    out << "forward " << s.pose.forward.x << ' ' << s.pose.forward.y << ' ' << s.pose.forward.z
        << "\n";
    out << "up " << s.pose.up.x << ' ' << s.pose.up.y << ' ' << s.pose.up.z << "\n";
    out << "focal " << s.intrinsics.focal << "\n";
    out << "principal " << s.intrinsics.cx << ' ' << s.intrinsics.cy << "\n";
    out << "size " << s.intrinsics.width << ' ' << s.intrinsics.height << "\n";
}

CaptureSidecar read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    CaptureSidecar s;
    std::string key;
    while (in >> key) {
        if (key == "time") in >> s.time;
        else if (key == "drone") in >> s.drone;
        else if (key == "position")
            in >> s.pose.position.x >> s.pose.position.y >> s.pose.position.z;
        else if (key == "forward") in >> s.pose.forward.x >> s.pose.forward.y >> s.pose.forward.z;
        else if (key == "up") in >> s.pose.up.x >> s.pose.up.y >> s.pose.up.z;
        else if (key == "focal") in >> s.intrinsics.focal;
        else if (key == "principal") in >> s.intrinsics.cx >> s.intrinsics.cy;
        else if (key == "size") in >> s.intrinsics.width >> s.intrinsics.height;
        else throw std::runtime_error("unknown sidecar key: " + key);
    }
    return s;
}

namespace {

void png_chunk(std::ofstream& out, const char* type, const std::vector<std::uint8_t>& data) {
    auto be32 = [&](std::uint32_t v) {
        std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    be32(static_cast<std::uint32_t>(data.size()));
    out.write(type, 4);
    if (!data.empty()) out.write(reinterpret_cast<const char*>(data.data()), data.size());
    std::uint32_t crc = crc32(0, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    be32(crc);
}

}  // namespace

void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("png buffer size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<std::uint8_t> ihdr(13);
    auto put32 = [&](std::size_t off, std::uint32_t v) {
        ihdr[off] = v >> 24;
        ihdr[off + 1] = v >> 16;
        ihdr[off + 2] = v >> 8;
        ihdr[off + 3] = v;
    };
    put32(0, width);
    put32(4, height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // truecolor
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    png_chunk(out, "IHDR", ihdr);

    // Raw scanlines with filter byte 0.
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (width * 3 + 1));
    for (int v = 0; v < height; ++v) {
        raw.push_back(0);
        raw.insert(raw.end(), rgb.begin() + static_cast<std::size_t>(v) * width * 3,
                   rgb.begin() + static_cast<std::size_t>(v + 1) * width * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("zlib compression failed");
    compressed.resize(bound);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", {});
}

namespace {

// 5x7 bitmap glyphs for tick labels.
struct Glyph {
    char ch;
    std::uint8_t rows[7];
};
const Glyph kGlyphs[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
};

class Canvas {
public:
    Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
        px_[i] = r;
        px_[i + 1] = g;
        px_[i + 2] = b;
    }
    void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, r, g, b);
            if (x0 == x1 && y0 == y1) break;
            int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }
    void text(int x, int y, const std::string& s) {
        for (char ch : s) {
            for (const auto& g : kGlyphs) {
                if (g.ch != ch) continue;
                for (int row = 0; row < 7; ++row)
                    for (int col = 0; col < 5; ++col)
                        if (g.rows[row] & (1 << (4 - col))) set(x + col, y + row, 40, 40, 40);
                break;
            }
            x += 6;
        }
    }
    const std::vector<std::uint8_t>& pixels() const { return px_; }

private:
    int w_, h_;
    std::vector<std::uint8_t> px_;
};

std::string fmt_tick(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

}  // namespace

void write_line_plot_png(const std::string& path, const std::vector<double>& xs,
                         const std::vector<double>& ys, const std::string&) {
    const int W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 40;
    Canvas cv(W, H);

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!xs.empty()) {
        xmin = *std::min_element(xs.begin(), xs.end());
        xmax = *std::max_element(xs.begin(), xs.end());
        ymin = *std::min_element(ys.begin(), ys.end());
        ymax = *std::max_element(ys.begin(), ys.end());
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    auto px = [&](double x) {
        return ml + static_cast<int>((x - xmin) / (xmax - xmin) * (W - ml - mr));
    };
    auto py = [&](double y) {
        return H - mb - static_cast<int>((y - ymin) / (ymax - ymin) * (H - mt - mb));
    };

    cv.line(ml, mt, ml, H - mb, 0, 0, 0);
    cv.line(ml, H - mb, W - mr, H - mb, 0, 0, 0);
    for (int i = 0; i <= 5; ++i) {
        double xv = xmin + (xmax - xmin) * i / 5.0;
        double yv = ymin + (ymax - ymin) * i / 5.0;
        cv.line(px(xv), H - mb, px(xv), H - mb + 4, 0, 0, 0);
        cv.text(px(xv) - 12, H - mb + 8, fmt_tick(xv));
        cv.line(ml - 4, py(yv), ml, py(yv), 0, 0, 0);
        cv.text(4, py(yv) - 3, fmt_tick(yv));
    }

    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        cv.line(px(xs[i]), py(ys[i]), px(xs[i + 1]), py(ys[i + 1]), 30, 60, 180);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cv.set(px(xs[i]), py(ys[i]), 180, 40, 40);
        cv.set(px(xs[i]) + 1, py(ys[i]), 180, 40, 40);
        cv.set(px(xs[i]), py(ys[i]) + 1, 180, 40, 40);
    }

    write_png(path, W, H, cv.pixels());
}

}  // namespace plume
