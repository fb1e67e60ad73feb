#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "plumeswarm/geometry.hpp"
#include "plumeswarm/sensing.hpp"

namespace plume {

class InsufficientDataError : public std::runtime_error {
public:
    InsufficientDataError() : std::runtime_error("recording shorter than one segment duration") {}
};

// One captured frame with its ground-truth (optionally noised) pose.
struct CaptureRecord {
    int drone = 0;
    double timestamp = 0.0;  // seconds since orbit start
    int quarter = 0;
    int revolution = 0;
    CameraPose pose{};
    CameraIntrinsics intrinsics{};
    std::string image_path;   // PPM; the opacity channel lives next to it
};

enum class OverlapClass { Base, Quarter, Half, ThreeQuarter };

struct TimeSegment {
    int index = 0;
    double start = 0.0, end = 0.0;
    OverlapClass overlap = OverlapClass::Base;
    std::vector<CaptureRecord> records;  // all drones, jointly covering 360 degrees

    double duration() const { return end - start; }
};

// Largest angular gap (degrees) of the records' camera bearings around a
// center point; the full-circle coverage check.
double max_angular_gap_deg(const std::vector<CaptureRecord>& records, const Vec2& center);

// Tiles the recording into base segments of the given duration and inserts
// one intermediate segment per overlap fraction between each adjacent pair.
// With fractions {0.25, 0.5, 0.75} the total is 4N - 3 for N base segments.
std::vector<TimeSegment> build_segments(const std::vector<CaptureRecord>& records,
                                        double segment_duration,
                                        const std::vector<double>& overlap_fractions);

// Segment manifest as a delimited table: id, window, class, record count.
std::string segment_manifest(const std::vector<TimeSegment>& segments);

}  // namespace plume
