#include <catch2/catch_amalgamated.hpp>

#include "fan/errors.hpp"
#include "fan/geninit.hpp"
#include "fixtures_common.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace fan;

namespace {
const IntegratorConfig kCfg{};
}

TEST_CASE("switch schedules collapse duplicate start times in order") {
    SECTION("all-zero start times give a single switch") {
        const SwitchSchedule s = switchSchedule({0.0, 0.0, 0.0});
        REQUIRE(s.tau == std::vector<double>{0.0});
        REQUIRE(s.J.size() == 1);
        CHECK(s.J[0] == std::set<NodeId>{1, 2, 3});
    }
    SECTION("a single delayed node appends one switch") {
        const SwitchSchedule s = switchSchedule({0.0, 3.0});
        REQUIRE(s.tau == std::vector<double>{0.0, 3.0});
        CHECK(s.J[0] == std::set<NodeId>{1});
        CHECK(s.J[1] == std::set<NodeId>{1, 2});
    }
    SECTION("ties join the same switch and sets are cumulative") {
        const SwitchSchedule s = switchSchedule({2.0, 1.0, 2.0});
        REQUIRE(s.tau == std::vector<double>{1.0, 2.0});
        CHECK(s.J[0] == std::set<NodeId>{2});
        CHECK(s.J[1] == std::set<NodeId>{1, 2, 3});
    }
    SECTION("negative or non-finite start times are rejected") {
        CHECK_THROWS_AS(switchSchedule({0.0, -1.0}), ConfigError);
        CHECK_THROWS_AS(switchSchedule({std::nan("")}), ConfigError);
    }
}

TEST_CASE("zero start times reproduce the plain flow bit for bit") {
    const Fan f = fixtures::termDeadlock();
    const State x0{0.0, 0.0, 0.0};

    const Trajectory plain = advance(f.net, x0, 6.0, kCfg);
    const Trajectory gen = evolveGeneralized(f, x0, {0.0, 0.0, 0.0}, 6.0, kCfg);

    REQUIRE(gen.samples.size() == plain.samples.size());
    for (std::size_t i = 0; i < plain.samples.size(); ++i) {
        CHECK(gen.samples[i].t == plain.samples[i].t);
        CHECK(gen.samples[i].x == plain.samples[i].x);
    }
    REQUIRE(gen.events.size() == plain.events.size());
    for (std::size_t i = 0; i < plain.events.size(); ++i) {
        CHECK(gen.events[i].kind == plain.events[i].kind);
        CHECK(gen.events[i].t == plain.events[i].t);
    }
}

TEST_CASE("delayed nodes stay frozen at their initial coordinates") {
    const Fan f = fixtures::singleTrack();
    const Trajectory traj = evolveGeneralized(f, {-2.0, 2.0}, {0.0, 3.0}, 3.5, kCfg);

    // Train 2 does not exist on the track until t = 3.
    const State at2 = traj.stateAt(2.0);
    CHECK(at2[0] == Catch::Approx(-1.0).margin(1e-9));
    CHECK(at2[1] == 2.0);

    // Its start is logged as a switch.
    bool sawStart = false;
    for (const TrajectoryEvent& ev : traj.events) {
        if (ev.kind == EventKind::Switch && ev.note == "start 2") {
            sawStart = true;
            CHECK(ev.t == Catch::Approx(3.0).margin(1e-9));
        }
    }
    CHECK(sawStart);
}

TEST_CASE("generalized transit matches the frozen single-track passage times") {
    const Fan f = fixtures::singleTrack();

    SECTION("a one-second delay still lets the trains pass") {
        const TransitRecord rec = generalizedTransit(f, {-2.0, 2.0}, {0.0, 1.0}, 40.0, kCfg);
        REQUIRE(rec.complete());
        CHECK(*rec.S[0] == Catch::Approx(8.0).margin(1e-6));
        CHECK(*rec.S[1] == Catch::Approx(3.0).margin(1e-6));
        CHECK(rec.Y[0] == Catch::Approx(2.0).margin(1e-6));
        CHECK(rec.Y[1] == Catch::Approx(-2.0).margin(1e-6));
    }

    SECTION("a three-second delay collides the trains at the origin") {
        const TransitRecord rec = generalizedTransit(f, {-2.0, 2.0}, {0.0, 3.0}, 40.0, kCfg);
        REQUIRE_FALSE(rec.complete());
        REQUIRE(rec.stalled);
        CHECK(rec.stallTime == Catch::Approx(4.0).margin(1e-9));
        CHECK(rec.Y[0] == Catch::Approx(0.0).margin(1e-9));
        CHECK(rec.Y[1] == Catch::Approx(0.0).margin(1e-9));

        try {
            generalizedTransition(f, {-2.0, 2.0}, {0.0, 3.0}, 40.0, kCfg);
            FAIL("expected DeadlockDetected");
        } catch (const DeadlockDetected& e) {
            CHECK(e.missing == std::vector<NodeId>{1, 2});
            CHECK(e.entryTime == Catch::Approx(4.0).margin(1e-9));
        }
    }
}

TEST_CASE("start times lower-bound the passage times") {
    const Fan f = fixtures::threeTrains();
    const std::vector<double> T{2.0, 1.0, 2.0};
    const TransitRecord rec = generalizedTransit(f, {3.0, -3.0, 6.0}, T, 80.0, kCfg);
    REQUIRE(rec.complete());
    for (std::size_t i = 0; i < 3; ++i) CHECK(*rec.S[i] >= T[i]);
}

TEST_CASE("degenerate guards terminate at their own start time") {
    const Fan f = fixtures::phaseLivelock();
    const TransitRecord rec =
        generalizedTransit(f, {-2.0, 2.0, 0.0, 0.4}, {0.0, 0.0, 1.5, 2.5}, 60.0, kCfg);
    REQUIRE(rec.complete());
    CHECK(*rec.S[2] == 1.5);
    CHECK(*rec.S[3] == 2.5);
    CHECK(rec.Y[2] == 0.0);
    CHECK(rec.Y[3] == 0.4);
}

TEST_CASE("a timed-out generalized transit reports the unreached nodes") {
    const Fan f = fixtures::phaseLivelock();
    // Antiphase oscillators hold both trains at the origin forever.
    try {
        generalizedTransition(f, {-2.0, 2.0, 0.0, 0.5}, {0.0, 0.0, 0.0, 0.0}, 30.0, kCfg);
        FAIL("expected NotConnected");
    } catch (const DeadlockDetected&) {
        FAIL("latched trains are not a deadlock: the oscillators keep moving");
    } catch (const NotConnected& e) {
        CHECK(e.missing == std::vector<NodeId>{1, 2});
    }
}

TEST_CASE("uniform delays shift passage times and preserve arrival states") {
    const Fan trains = fixtures::threeTrains();
    SECTION("frozen shift on the three-train network") {
        CHECK(uniformShiftCheck(trains, {3.0, -3.0, 6.0}, 2.5, 80.0, kCfg) <= 1e-6);
        CHECK(uniformShiftCheck(trains, {3.0, -3.0, 6.0}, 0.0, 80.0, kCfg) <= 1e-12);
    }
    SECTION("random states around the initialization guards") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> jitter(-0.2, 0.2);
        std::uniform_real_distribution<double> shift(0.0, 4.0);
        for (int s = 0; s < 5; ++s) {
            const State X{3.0 + jitter(rng), -3.0 + jitter(rng), 6.0 + jitter(rng)};
            CHECK(uniformShiftCheck(trains, X, shift(rng), 80.0, kCfg) <= 1e-6);
        }
    }
    SECTION("the single-track pass is shift-invariant") {
        const Fan f = fixtures::singleTrack();
        CHECK(uniformShiftCheck(f, {-2.0, 2.0}, 3.0, 40.0, kCfg) <= 1e-6);
    }
}

TEST_CASE("initial-state sampling pins guard coordinates and frees phases") {
    std::mt19937 rng(5);
    const State a = sampleInitState(fixtures::threeTrains(), rng);
    CHECK(a == State{3.0, -3.0, 6.0});

    const Fan phases = fixtures::phaseLivelock();
    const State p = sampleInitState(phases, rng);
    const State q = sampleInitState(phases, rng);
    CHECK(p[0] == -2.0);
    CHECK(p[1] == 2.0);
    CHECK((p[2] >= 0.0 && p[2] < 1.0));
    CHECK((p[3] >= 0.0 && p[3] < 1.0));
    CHECK(p[2] != q[2]);  // circle phases are actually sampled
}

TEST_CASE("regularity scans classify every failing start-time sample") {
    SECTION("the single-track line is not regular: delays can collide the trains") {
        const RegularityReport rep =
            regularityScan(fixtures::singleTrack(), 1, 40, 5.0, 40.0, 21, kCfg);
        REQUIRE(rep.samples == 40);
        REQUIRE_FALSE(rep.failures.empty());
        CHECK(rep.connectedFraction() < 1.0);
        for (const RegularityFailure& fail : rep.failures) {
            CHECK(fail.classification == "deadlock-total");
            REQUIRE(fail.T.size() == 2);
            const double diff = fail.T[1] - fail.T[0];
            CHECK(diff > 1.75);
            CHECK(diff < 4.25);
        }
    }
    SECTION("with no delay spread every sample is connected") {
        const RegularityReport rep =
            regularityScan(fixtures::singleTrack(), 3, 1, 0.0, 40.0, 3, kCfg);
        CHECK(rep.samples == 3);
        CHECK(rep.connected == 3);
        CHECK(rep.connectedFraction() == 1.0);
    }
    SECTION("the three-train line is regular across random delays") {
        const RegularityReport rep =
            regularityScan(fixtures::threeTrains(), 2, 10, 4.0, 80.0, 9, kCfg);
        CHECK(rep.samples == 20);
        CHECK(rep.connected == 20);
        CHECK(rep.failures.empty());
    }
    SECTION("reports serialize to JSON") {
        const RegularityReport rep =
            regularityScan(fixtures::singleTrack(), 1, 12, 5.0, 40.0, 21, kCfg);
        const nlohmann::json j = nlohmann::json::parse(rep.toJson());
        CHECK(j["samples"] == 12);
        CHECK(j["connected_fraction"].get<double>() < 1.0);
        REQUIRE(j["failures"].is_array());
        REQUIRE_FALSE(j["failures"].empty());
        CHECK(j["failures"][0].contains("T"));
        CHECK(j["failures"][0]["classification"] == "deadlock-total");
    }
}

TEST_CASE("chattering runs are classified as unresolved, not crashes") {
    // A one-node network whose clause flips the field sign across x = 0
    // chatters there; the scan must absorb the alarm as "unresolved".
    Fan f;
    f.name = "chatter";
    f.net.spaces = {PhaseSpace::Line};
    f.net.defaults = {FieldSpec::constant(1.0)};
    f.net.clauses.push_back({"flip", ConnectionStructure({{0, 1}}),
                             Predicate::gt(1, 0.0),
                             {{1, FieldSpec::constant(-1.0)}}});
    f.guards = {{-1.0, 5.0, 0.0}};
    f.validate();

    const RegularityReport rep = regularityScan(f, 1, 1, 0.0, 10.0, 1, kCfg);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].classification == "unresolved");
    CHECK(rep.connected == 0);
}

TEST_CASE("generalized evolution validates its inputs") {
    const Fan f = fixtures::singleTrack();
    CHECK_THROWS_AS(evolveGeneralized(f, {-2.0, 2.0}, {0.0}, 5.0, kCfg), ConfigError);
    CHECK_THROWS_AS(evolveGeneralized(f, {-2.0, 2.0}, {0.0, -1.0}, 5.0, kCfg), ConfigError);
    CHECK_THROWS_AS(generalizedTransit(f, {-2.0}, {0.0, 0.0}, 5.0, kCfg), ConfigError);
}
