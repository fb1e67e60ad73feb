#include "plumeswarm/segment_batcher.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plume {

double max_angular_gap_deg(const std::vector<CaptureRecord>& records, const Vec2& center) {
    std::vector<double> angles;
    angles.reserve(records.size());
    for (const auto& r : records) {
        double ax = r.pose.position.x - center.x;
        double ay = r.pose.position.y - center.y;
        angles.push_back(rad2deg(std::atan2(ay, ax)));
    }
    if (angles.empty()) return 360.0;
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 360.0 - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i)
        gap = std::max(gap, angles[i] - angles[i - 1]);
    return gap;
}

namespace {

OverlapClass classify(double fraction) {
    if (std::abs(fraction - 0.25) < 1e-9) return OverlapClass::Quarter;
    if (std::abs(fraction - 0.5) < 1e-9) return OverlapClass::Half;
    return OverlapClass::ThreeQuarter;
}

// Window membership is the closed interval; boundary frames are shared
// between adjacent segments.
std::vector<CaptureRecord> collect(const std::vector<CaptureRecord>& records, double start,
                                   double end) {
    std::vector<CaptureRecord> out;
    for (const auto& r : records)
        if (r.timestamp >= start - 1e-9 && r.timestamp <= end + 1e-9) out.push_back(r);
    return out;
}

}  // namespace

std::vector<TimeSegment> build_segments(const std::vector<CaptureRecord>& records,
                                        double segment_duration,
                                        const std::vector<double>& overlap_fractions) {
    if (segment_duration <= 0.0) throw std::invalid_argument("segment duration must be > 0");
    for (double f : overlap_fractions)
        if (f <= 0.0 || f >= 1.0) throw std::invalid_argument("overlap fractions must be in (0,1)");

    double t0 = 0.0, t1 = 0.0;
    if (!records.empty()) {
        auto [lo, hi] = std::minmax_element(
            records.begin(), records.end(),
            [](const CaptureRecord& a, const CaptureRecord& b) { return a.timestamp < b.timestamp; });
        t0 = lo->timestamp;
        t1 = hi->timestamp;
    }
    long n_base = static_cast<long>(std::floor((t1 - t0) / segment_duration + 1e-9));
    if (records.empty() || n_base < 1) throw InsufficientDataError();

    std::vector<double> fractions = overlap_fractions;
    std::sort(fractions.begin(), fractions.end());

    std::vector<TimeSegment> out;
    for (long b = 0; b < n_base; ++b) {
        double start = t0 + b * segment_duration;
        TimeSegment seg;
        seg.start = start;
        seg.end = start + segment_duration;
        seg.overlap = OverlapClass::Base;
        seg.records = collect(records, seg.start, seg.end);
        out.push_back(std::move(seg));
        if (b + 1 < n_base) {
            for (double f : fractions) {
                TimeSegment mid;
                mid.start = start + f * segment_duration;
                mid.end = mid.start + segment_duration;
                mid.overlap = classify(f);
                mid.records = collect(records, mid.start, mid.end);
                out.push_back(std::move(mid));
            }
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
}

std::string segment_manifest(const std::vector<TimeSegment>& segments) {
    std::ostringstream os;
    os << "segment\tstart\tend\tclass\trecords\n";
    for (const auto& s : segments) {
        const char* cls = s.overlap == OverlapClass::Base           ? "base"
                          : s.overlap == OverlapClass::Quarter      ? "25%"
                          : s.overlap == OverlapClass::Half         ? "50%"
                                                                    : "75%";
        os << s.index << '\t' << s.start << '\t' << s.end << '\t' << cls << '\t'
           << s.records.size() << '\n';
    }
    return os.str();
}

}  // namespace plume
