#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "plumeswarm/geodesy.hpp"
#include "plumeswarm/worker_control.hpp"

namespace plume {

class UnknownSenderError : public std::runtime_error {
public:
    UnknownSenderError() : std::runtime_error("publish from unregistered sender") {}
};

struct PoseReport {
    GeoCoord position{};
    double heading_deg = 0.0;
};
struct Readiness {
    int worker_id = 0;
};
struct TargetAssignment {
    int worker_id = 0;
    GeoCoord target{};
    double facing_yaw_deg = 0.0;
    double phase_deg = 0.0;
};
struct OrbitCommand {
    OrbitPlan plan{};
    double start_time = 0.0;  // sim seconds
};
struct CaptureNotice {
    int drone = 0;
    double timestamp = 0.0;
    int quarter = 0;
    int revolution = 0;
};

using BusPayload = std::variant<PoseReport, Readiness, TargetAssignment, OrbitCommand, CaptureNotice>;

struct BusMessage {
    std::string topic;
    int sender = 0;
    BusPayload payload{};
    double send_time = 0.0;
};

struct LinkConfig {
    double latency = 0.0;          // seconds
    double jitter = 0.0;           // uniform extra latency in [0, jitter]
    double drop_probability = 0.0; // per-link override may be 1 (dead link)
};

struct BusConfig {
    double latency = 0.0;
    double jitter = 0.0;
    double drop_probability = 0.0;  // must be < 1
    std::uint64_t seed = 0;
    double tick = 0.1;              // delivery resolved on tick boundaries
    std::map<int, LinkConfig> link_overrides;  // by sender id

    void validate() const {
        if (latency < 0.0 || jitter < 0.0) throw std::invalid_argument("latency must be >= 0");
        if (drop_probability < 0.0 || drop_probability >= 1.0)
            throw std::invalid_argument("drop probability must be in [0, 1)");
        if (tick <= 0.0) throw std::invalid_argument("tick must be > 0");
    }
};

struct TranscriptEntry {
    double time = 0.0;
    enum class Event { Published, Dropped, Delivered } event = Event::Published;
    std::string topic;
    int sender = 0;
    std::string summary;
};

std::string payload_summary(const BusPayload& payload);

// Deterministic discrete-event pub/sub bus. Every registered drone other
// than the sender receives a copy of each delivered message; delivery times
// are rounded up to the next control tick. Per-(sender, topic) FIFO order is
// preserved even under jittered latency.
class MessageBus {
public:
    explicit MessageBus(BusConfig config);

    void register_drone(int id);
    double now() const { return now_; }
    double tick() const { return config_.tick; }

    void publish(const BusMessage& msg);

    // Delivers everything due at or before t into receiver inboxes.
    void advance_to(double t);

    // Drains delivered messages on a topic for one receiver.
    std::vector<BusMessage> fetch(int receiver, const std::string& topic);

    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    std::string transcript_text() const;

private:
    struct Pending {
        double deliver_time;
        std::uint64_t seq;
        BusMessage msg;
        bool operator>(const Pending& o) const {
            return deliver_time != o.deliver_time ? deliver_time > o.deliver_time : seq > o.seq;
        }
    };

    BusConfig config_;
    std::mt19937_64 rng_;
    double now_ = 0.0;
    std::uint64_t seq_ = 0;
    std::vector<Pending> pending_;  // min-heap by (deliver_time, seq)
    std::map<int, std::deque<BusMessage>> inboxes_;
    std::map<int, double> last_send_time_;
    std::map<std::pair<int, std::string>, double> last_deliver_time_;
    std::vector<TranscriptEntry> transcript_;
};

struct BarrierResult {
    bool ready = false;
    double ready_time = 0.0;  // earliest tick with all readiness delivered
};

inline constexpr const char* kTopicReadiness = "readiness";
inline constexpr const char* kTopicOrbit = "orbit_command";
inline constexpr const char* kTopicTargets = "target_assignment";
inline constexpr const char* kTopicPose = "pose_report";
inline constexpr const char* kTopicCapture = "capture_record";

// Advances the bus tick by tick until every worker's readiness has been
// delivered to `manager_id`, or the timeout elapses.
BarrierResult barrier_all_ready(MessageBus& bus, int manager_id,
                                const std::vector<int>& worker_ids, double timeout);

}  // namespace plume
