// ===========================================================================
// test_fan.cpp — functional layer: guard regions, transits (first passage to
// the termination guards), the input/output transition map, and the
// geometric well-formedness report.
// ===========================================================================

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fan/fan.hpp"
#include "fixtures_common.hpp"
#include "json.hpp"

using namespace fan;

namespace {
const IntegratorConfig kCfg{};
}

TEST_CASE("guard regions classify coordinates", "[fan][regions]") {
    const Fan f = fixtures::threeTrains();

    // Node 1 runs from init 3 to term -3 (leftward).
    CHECK(regionOf(f, 1, 3.0) == Region::Init);
    CHECK(regionOf(f, 1, 0.0) == Region::Zero);
    CHECK(regionOf(f, 1, -3.0) == Region::Term);
    CHECK(regionOf(f, 1, 4.0) == Region::Minus);  // behind the start
    CHECK(regionOf(f, 1, -4.0) == Region::Plus);  // past the terminal

    // Node 2 runs rightward from -3 to 6.
    CHECK(regionOf(f, 2, -3.0) == Region::Init);
    CHECK(regionOf(f, 2, 6.0) == Region::Term);
    CHECK(regionOf(f, 2, -5.0) == Region::Minus);
    CHECK(regionOf(f, 2, 7.0) == Region::Plus);

    // Degenerate guards (pass-through oscillator nodes).
    const Fan p = fixtures::phaseLivelock();
    CHECK(p.guards[2].degenerate());
    CHECK(regionOf(p, 3, 0.0) == Region::Term);
    CHECK(regionOf(p, 3, 0.2) == Region::Plus);
    CHECK(regionOf(p, 3, -0.2) == Region::Minus);

    CHECK(std::string(regionName(Region::Zero)) == "zero");
}

TEST_CASE("transit reproduces the hold-and-release passage times", "[fan][transit]") {
    const Fan f = fixtures::termDeadlock();
    TransitRecord rec = transit(f, {0, 0, 0}, 10.0, kCfg);

    REQUIRE(rec.complete());
    CHECK_FALSE(rec.stalled);
    CHECK(*rec.S[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(*rec.S[1] == Catch::Approx(2.5).margin(1e-9));
    CHECK(*rec.S[2] == Catch::Approx(2.75).margin(1e-9));
    CHECK(rec.Y[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(rec.Y[1] == Catch::Approx(2.0).margin(1e-9));
    CHECK(rec.Y[2] == Catch::Approx(2.0).margin(1e-9));

    Transition tr = transition(f, {0, 0, 0}, 10.0, kCfg);
    CHECK(tr.S[1] == Catch::Approx(2.5).margin(1e-9));
    CHECK(tr.Y[2] == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("transit on the three-trains line", "[fan][transit]") {
    const Fan f = fixtures::threeTrains();
    TransitRecord rec = transit(f, {3.0, -3.0, 6.0}, 30.0, kCfg);

    REQUIRE(rec.complete());
    CHECK(*rec.S[0] == Catch::Approx(6.0).margin(1e-9));
    CHECK(*rec.S[1] == Catch::Approx(12.0).margin(1e-9));
    CHECK(*rec.S[2] == Catch::Approx(18.0).margin(1e-9));
    CHECK(rec.Y[0] == Catch::Approx(-3.0).margin(1e-9));
    CHECK(rec.Y[1] == Catch::Approx(6.0).margin(1e-9));
    CHECK(rec.Y[2] == Catch::Approx(-3.0).margin(1e-9));
}

TEST_CASE("transit stops integrating once every guard is hit", "[fan][transit]") {
    const Fan f = fixtures::termDeadlock();
    TransitRecord rec = transit(f, {0, 0, 0}, 1000.0, kCfg);
    REQUIRE(rec.complete());
    CHECK(rec.traj.t1 < 3.0);  // early exit, not a 1000-unit run
}

TEST_CASE("degenerate guards pass through with zero passage time", "[fan][transit]") {
    const Fan f = fixtures::phaseLivelock();
    TransitRecord rec = transit(f, {-2.0, 2.0, 0.0, 0.4}, 30.0, kCfg);

    REQUIRE(rec.complete());
    CHECK(*rec.S[2] == 0.0);
    CHECK(*rec.S[3] == 0.0);
    CHECK(rec.Y[2] == 0.0);
    CHECK(rec.Y[3] == 0.4);

    const double kappa = 0.01;
    const double tRelease =
        (std::log(std::tan(M_PI * 0.4)) - std::log(std::tan(M_PI * 0.1))) /
        (4.0 * M_PI * kappa);
    CHECK(*rec.S[0] == Catch::Approx(tRelease + 2.0).margin(1e-6));
    CHECK(*rec.S[1] == Catch::Approx(tRelease + 2.0).margin(1e-6));
    CHECK(rec.Y[0] == Catch::Approx(2.0).margin(1e-6));
    CHECK(rec.Y[1] == Catch::Approx(-2.0).margin(1e-6));
}

TEST_CASE("a waiting loop that never releases leaves the transit incomplete",
          "[fan][transit]") {
    const Fan f = fixtures::phaseLivelock();
    // Antiphase oscillators: the release condition never comes true, but the
    // network is not at rest either (no stall) — the run simply times out.
    TransitRecord rec = transit(f, {-2.0, 2.0, 0.0, 0.5}, 30.0, kCfg);
    CHECK_FALSE(rec.complete());
    CHECK_FALSE(rec.stalled);
    CHECK(rec.unreached() == std::vector<NodeId>{1, 2});
    CHECK_THROWS_AS(transition(f, {-2.0, 2.0, 0.0, 0.5}, 30.0, kCfg), NotConnected);
}

TEST_CASE("a collision inside the window is reported as a deadlock", "[fan][deadlock]") {
    const Fan f = fixtures::singleTrack();
    // From (-0.4, 0.4) the trains meet at -0.24 (t = 0.32), inside the window.
    TransitRecord rec = transit(f, {-0.4, 0.4}, 20.0, kCfg);
    CHECK(rec.stalled);
    CHECK(rec.stallTime == Catch::Approx(0.32).margin(1e-9));
    CHECK_FALSE(rec.complete());

    try {
        transition(f, {-0.4, 0.4}, 20.0, kCfg);
        FAIL("expected DeadlockDetected");
    } catch (const DeadlockDetected& e) {
        CHECK(e.missing == std::vector<int>{1, 2});
        CHECK(e.entryTime == Catch::Approx(0.32).margin(1e-9));
        REQUIRE(e.sink.size() == 2);
        CHECK(e.sink[0] == Catch::Approx(-0.24).margin(1e-9));
        CHECK(e.sink[1] == Catch::Approx(-0.24).margin(1e-9));
    }
}

TEST_CASE("single-track transit with a simultaneous start passes cleanly",
          "[fan][transit]") {
    const Fan f = fixtures::singleTrack();
    TransitRecord rec = transit(f, {-2.0, 2.0}, 20.0, kCfg);
    REQUIRE(rec.complete());
    CHECK(*rec.S[0] == Catch::Approx(8.0).margin(1e-9));
    CHECK(*rec.S[1] == Catch::Approx(2.0).margin(1e-9));
    CHECK(rec.Y[0] == Catch::Approx(2.0).margin(1e-9));
    CHECK(rec.Y[1] == Catch::Approx(-2.0).margin(1e-9));
}

TEST_CASE("geometric report accepts the well-formed fixtures", "[fan][geometry]") {
    for (const Fan& f : {fixtures::threeTrains(), fixtures::singleTrack(),
                         fixtures::phaseLivelock()}) {
        CAPTURE(f.name);
        GeometricReport rep = checkGeometric(f);
        for (const auto& item : rep.items) {
            CAPTURE(item.name, item.witnesses);
            CHECK(item.pass);
        }
        CHECK(rep.allPass());
    }
}

TEST_CASE("geometric report flags events reachable at the guard boundary",
          "[fan][geometry]") {
    // The three-node hold fixture deliberately violates the interior-events
    // condition: its speed-up clause can stay active while node 3 crosses its
    // termination threshold.
    GeometricReport rep = checkGeometric(fixtures::termDeadlock());
    CHECK_FALSE(rep.allPass());

    const CheckItem* interior = rep.find("events-interior");
    REQUIRE(interior != nullptr);
    CHECK_FALSE(interior->pass);
    REQUIRE_FALSE(interior->witnesses.empty());
    CHECK(interior->witnesses[0].find("fast3") != std::string::npos);
    CHECK(interior->witnesses[0].find("node 3") != std::string::npos);

    const CheckItem* shape = rep.find("guards-well-formed");
    REQUIRE(shape != nullptr);
    CHECK(shape->pass);
    const CheckItem* orient = rep.find("default-field-oriented");
    REQUIRE(orient != nullptr);
    CHECK(orient->pass);
}

TEST_CASE("geometric report serializes to JSON", "[fan][geometry]") {
    GeometricReport rep = checkGeometric(fixtures::threeTrains());
    auto j = nlohmann::json::parse(rep.toJson());
    CHECK(j["all_pass"] == true);
    REQUIRE(j["checks"].is_array());
    CHECK(j["checks"].size() == rep.items.size());
    CHECK(j["checks"][0].contains("name"));
    CHECK(j["checks"][0].contains("pass"));
}
