#include "plumeswarm/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace plume {

std::string payload_summary(const BusPayload& payload) {
    std::ostringstream os;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PoseReport>) {
                os << "pose lat=" << p.position.latitude << " lon=" << p.position.longitude
                   << " alt=" << p.position.altitude;
            } else if constexpr (std::is_same_v<T, Readiness>) {
                os << "ready worker=" << p.worker_id;
            } else if constexpr (std::is_same_v<T, TargetAssignment>) {
                os << "target worker=" << p.worker_id << " alt=" << p.target.altitude
                   << " phase=" << p.phase_deg;
            } else if constexpr (std::is_same_v<T, OrbitCommand>) {
                os << "orbit r=" << p.plan.radius << " period=" << p.plan.period
                   << " start=" << p.start_time;
            } else if constexpr (std::is_same_v<T, CaptureNotice>) {
                os << "capture drone=" << p.drone << " t=" << p.timestamp << " q=" << p.quarter
                   << " rev=" << p.revolution;
            }
        },
        payload);
    return os.str();
}

MessageBus::MessageBus(BusConfig config) : config_(std::move(config)), rng_(config_.seed) {
    config_.validate();
}

void MessageBus::register_drone(int id) {
    inboxes_.emplace(id, std::deque<BusMessage>{});
}

void MessageBus::publish(const BusMessage& msg) {
    auto it = inboxes_.find(msg.sender);
    if (it == inboxes_.end()) throw UnknownSenderError();
    auto lt = last_send_time_.find(msg.sender);
    if (lt != last_send_time_.end() && msg.send_time < lt->second - 1e-12)
        throw std::invalid_argument("send time must be non-decreasing per sender");
    last_send_time_[msg.sender] = msg.send_time;

    LinkConfig link{config_.latency, config_.jitter, config_.drop_probability};
    auto ov = config_.link_overrides.find(msg.sender);
    if (ov != config_.link_overrides.end()) link = ov->second;

    // Consume the rng deterministically even for kept messages.
    double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    double jitter = link.jitter > 0.0
                        ? std::uniform_real_distribution<double>(0.0, link.jitter)(rng_)
                        : 0.0;
    if (roll < link.drop_probability) {
        transcript_.push_back({msg.send_time, TranscriptEntry::Event::Dropped, msg.topic,
                               msg.sender, payload_summary(msg.payload)});
        return;
    }

    double raw = msg.send_time + link.latency + jitter;
    // Round up to the next tick boundary; keep per-(sender, topic) FIFO.
    double ticks = std::ceil(raw / config_.tick - 1e-9);
    double deliver = ticks * config_.tick;
    auto key = std::make_pair(msg.sender, msg.topic);
    auto ld = last_deliver_time_.find(key);
    if (ld != last_deliver_time_.end()) deliver = std::max(deliver, ld->second);
    last_deliver_time_[key] = deliver;

    pending_.push_back({deliver, seq_++, msg});
    std::push_heap(pending_.begin(), pending_.end(), std::greater<>{});
    transcript_.push_back({msg.send_time, TranscriptEntry::Event::Published, msg.topic,
                           msg.sender, payload_summary(msg.payload)});
}

void MessageBus::advance_to(double t) {
    now_ = std::max(now_, t);
    while (!pending_.empty() && pending_.front().deliver_time <= now_ + 1e-9) {
        std::pop_heap(pending_.begin(), pending_.end(), std::greater<>{});
        Pending p = std::move(pending_.back());
        pending_.pop_back();
        transcript_.push_back({p.deliver_time, TranscriptEntry::Event::Delivered, p.msg.topic,
                               p.msg.sender, payload_summary(p.msg.payload)});
        for (auto& [id, box] : inboxes_) {
            if (id == p.msg.sender) continue;
            box.push_back(p.msg);
        }
    }
}

std::vector<BusMessage> MessageBus::fetch(int receiver, const std::string& topic) {
    std::vector<BusMessage> out;
    auto it = inboxes_.find(receiver);
    if (it == inboxes_.end()) return out;
    auto& box = it->second;
    for (auto m = box.begin(); m != box.end();) {
        if (m->topic == topic) {
            out.push_back(*m);
            m = box.erase(m);
        } else {
            ++m;
        }
    }
    return out;
}

std::string MessageBus::transcript_text() const {
    std::ostringstream os;
    for (const auto& e : transcript_) {
        const char* ev = e.event == TranscriptEntry::Event::Published   ? "pub"
                         : e.event == TranscriptEntry::Event::Dropped   ? "drop"
                                                                        : "dlv";
        os << e.time << '\t' << ev << '\t' << e.topic << '\t' << e.sender << '\t' << e.summary
           << '\n';
    }
    return os.str();
}

BarrierResult barrier_all_ready(MessageBus& bus, int manager_id,
                                const std::vector<int>& worker_ids, double timeout) {
    std::set<int> waiting(worker_ids.begin(), worker_ids.end());
    double start = bus.now();
    double tick = bus.tick();
    for (double t = start;; t += tick) {
        bus.advance_to(t);
        for (const auto& m : bus.fetch(manager_id, kTopicReadiness)) {
            if (const auto* r = std::get_if<Readiness>(&m.payload)) waiting.erase(r->worker_id);
        }
        if (waiting.empty()) return {true, t};
        if (t - start >= timeout) return {false, t};
    }
}

}  // namespace plume
