#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "plumeswarm/coordination.hpp"

using namespace plume;

namespace {

BusMessage readiness_msg(int sender, double t) {
    BusMessage m;
    m.topic = kTopicReadiness;
    m.sender = sender;
    m.payload = Readiness{sender};
    m.send_time = t;
    return m;
}

MessageBus make_bus(BusConfig cfg, int drones = 5) {
    MessageBus bus(cfg);
    for (int id = 0; id < drones; ++id) bus.register_drone(id);
    return bus;
}

}  // namespace

TEST_CASE("config validation") {
    BusConfig bad;
    bad.drop_probability = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.latency = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.tick = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero latency delivers on the same tick, FIFO per sender and topic") {
    MessageBus bus = make_bus({});
    for (int k = 0; k < 5; ++k) {
        BusMessage m = readiness_msg(1, 0.0);
        m.payload = Readiness{k};
        bus.publish(m);
    }
    bus.advance_to(0.0);
    auto got = bus.fetch(2, kTopicReadiness);
    REQUIRE(got.size() == 5);
    for (int k = 0; k < 5; ++k)
        CHECK(std::get<Readiness>(got[k].payload).worker_id == k);
    // Sender never receives its own message.
    CHECK(bus.fetch(1, kTopicReadiness).empty());
}

TEST_CASE("constant latency shifts delivery by exactly that much") {
    BusConfig cfg;
    cfg.latency = 0.2;
    MessageBus bus = make_bus(cfg);
    bus.publish(readiness_msg(1, 1.0));
    bus.advance_to(1.1);
    CHECK(bus.fetch(0, kTopicReadiness).empty());
    bus.advance_to(1.2);
    auto got = bus.fetch(0, kTopicReadiness);
    REQUIRE(got.size() == 1);
    CHECK(got[0].send_time == 1.0);
}

TEST_CASE("delivery is rounded up to the next tick boundary") {
    BusConfig cfg;
    cfg.latency = 0.25;  // 1.0 + 0.25 -> rounds to tick 1.3
    MessageBus bus = make_bus(cfg);
    bus.publish(readiness_msg(1, 1.0));
    bus.advance_to(1.25);
    CHECK(bus.fetch(0, kTopicReadiness).empty());
    bus.advance_to(1.3);
    CHECK(bus.fetch(0, kTopicReadiness).size() == 1);
}

TEST_CASE("unregistered sender and non-monotone send times are rejected") {
    MessageBus bus = make_bus({}, 3);
    CHECK_THROWS_AS(bus.publish(readiness_msg(9, 0.0)), UnknownSenderError);
    bus.publish(readiness_msg(1, 5.0));
    CHECK_THROWS_AS(bus.publish(readiness_msg(1, 4.9)), std::invalid_argument);
    bus.publish(readiness_msg(1, 5.0));  // equal send time is allowed
}

TEST_CASE("fixed seed reproduces the identical transcript under drops and jitter") {
    BusConfig cfg;
    cfg.latency = 0.1;
    cfg.jitter = 0.4;
    cfg.drop_probability = 0.5;
    cfg.seed = 99;

    auto run = [&] {
        MessageBus bus = make_bus(cfg);
        for (int k = 0; k < 50; ++k) bus.publish(readiness_msg(1 + k % 4, 0.1 * k));
        bus.advance_to(100.0);
        for (int id = 0; id < 5; ++id) bus.fetch(id, kTopicReadiness);
        return bus.transcript_text();
    };
    std::string a = run(), b = run();
    CHECK(a == b);
    CHECK(a.find("drop") != std::string::npos);
    CHECK(a.find("dlv") != std::string::npos);
}

TEST_CASE("per-(sender, topic) FIFO holds under random latency and jitter") {
    std::mt19937_64 meta(123);
    for (int trial = 0; trial < 10; ++trial) {
        BusConfig cfg;
        cfg.latency = std::uniform_real_distribution<double>(0.0, 0.5)(meta);
        cfg.jitter = std::uniform_real_distribution<double>(0.0, 0.8)(meta);
        cfg.drop_probability = 0.3;
        cfg.seed = meta();
        MessageBus bus = make_bus(cfg);
        std::uniform_real_distribution<double> gap(0.0, 0.3);
        double t1 = 0.0, t2 = 0.0;
        for (int k = 0; k < 40; ++k) {
            t1 += gap(meta);
            BusMessage m = readiness_msg(1, t1);
            m.payload = Readiness{k};
            bus.publish(m);
            t2 += gap(meta);
            BusMessage n = readiness_msg(2, t2);
            n.payload = Readiness{1000 + k};
            bus.publish(n);
        }
        bus.advance_to(1000.0);
        auto got = bus.fetch(0, kTopicReadiness);
        int last1 = -1, last2 = 999;
        for (const auto& m : got) {
            int id = std::get<Readiness>(m.payload).worker_id;
            if (m.sender == 1) {
                CHECK(id > last1);
                last1 = id;
            } else {
                CHECK(id > last2);
                last2 = id;
            }
        }
    }
}

TEST_CASE("barrier: all workers report with zero latency") {
    MessageBus bus = make_bus({});
    std::vector<int> workers{1, 2, 3, 4};
    for (int id : workers) bus.publish(readiness_msg(id, 12.0));
    BarrierResult r = barrier_all_ready(bus, 0, workers, 60.0);
    CHECK(r.ready);
    CHECK(r.ready_time == doctest::Approx(12.0));
}

TEST_CASE("barrier ready time matches an event-queue replay oracle") {
    BusConfig cfg;
    cfg.latency = 0.5;
    MessageBus bus = make_bus(cfg);
    std::vector<int> workers{1, 2, 3, 4};
    double sends[4] = {3.0, 7.2, 9.8, 1.1};
    for (int i = 0; i < 4; ++i) bus.publish(readiness_msg(workers[i], sends[i]));

    // Oracle: each delivery lands at the first tick >= send + latency; the
    // barrier fires at the max over workers.
    double expected = 0.0;
    for (double s : sends) {
        double due = s + cfg.latency;
        double t = std::ceil(due / cfg.tick - 1e-9) * cfg.tick;
        expected = std::max(expected, t);
    }
    BarrierResult r = barrier_all_ready(bus, 0, workers, 60.0);
    CHECK(r.ready);
    CHECK(r.ready_time == doctest::Approx(expected));  // 10.3
    CHECK(expected == doctest::Approx(10.3));
}

TEST_CASE("barrier times out when one link is dead") {
    BusConfig cfg;
    cfg.link_overrides[3] = LinkConfig{0.0, 0.0, 1.0};  // worker 3 never gets through
    MessageBus bus = make_bus(cfg);
    std::vector<int> workers{1, 2, 3, 4};
    for (int id : workers)
        for (int k = 0; k < 20; ++k) bus.publish(readiness_msg(id, 0.1 * k));
    BarrierResult r = barrier_all_ready(bus, 0, workers, 10.0);
    CHECK_FALSE(r.ready);
}

TEST_CASE("no orbit command precedes the barrier ready time in the transcript") {
    BusConfig cfg;
    cfg.latency = 0.3;
    cfg.jitter = 0.2;
    cfg.seed = 5;
    MessageBus bus = make_bus(cfg);
    std::vector<int> workers{1, 2, 3, 4};
    for (int id : workers) bus.publish(readiness_msg(id, 2.0 + 0.7 * id));
    BarrierResult r = barrier_all_ready(bus, 0, workers, 60.0);
    REQUIRE(r.ready);

    BusMessage orbit;
    orbit.topic = kTopicOrbit;
    orbit.sender = 0;
    orbit.payload = OrbitCommand{};
    orbit.send_time = r.ready_time;
    bus.publish(orbit);
    bus.advance_to(r.ready_time + 5.0);

    for (const auto& e : bus.transcript()) {
        if (e.topic == kTopicOrbit && e.event == TranscriptEntry::Event::Published)
            CHECK(e.time >= r.ready_time);
    }
}
