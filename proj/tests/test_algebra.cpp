#include <catch2/catch_amalgamated.hpp>

#include "fan/algebra.hpp"
#include "fan/errors.hpp"
#include "fan/geninit.hpp"
#include "fixtures_common.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

using namespace fan;

namespace {

const IntegratorConfig kCfg{};

/// Four walkers in two corridors: in each pair the first walker yields at 1
/// until the opposing walker has passed 2. The pairs never read each other.
Fan corridorPair(const std::string& name, NodeId walker, NodeId opposer) {
    Fan f;
    f.name = name;
    f.net.spaces.assign(4, PhaseSpace::Line);
    f.net.defaults = {FieldSpec::constant(1.0), FieldSpec::constant(-1.0),
                      FieldSpec::constant(1.0), FieldSpec::constant(-1.0)};
    f.net.clauses.push_back(
        {"yield" + std::to_string(walker), ConnectionStructure({{0, walker}}),
         Predicate::conj({Predicate::at(walker, 1.0), Predicate::gt(opposer, 2.0)}),
         {{walker, FieldSpec::zero()}}});
    f.guards = {{0.0, 4.0, 0.0}, {4.0, 0.0, 0.0}, {0.0, 4.0, 0.0}, {4.0, 0.0, 0.0}};
    f.validate();
    return f;
}

std::set<NodeId> linkedOf(const AsyncNetwork& net, const std::vector<std::string>& ids) {
    std::set<NodeId> out;
    for (const EventClause& c : net.clauses) {
        if (std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        for (NodeId n : linkedNodes(c.alpha))
            if (n != 0) out.insert(n);
    }
    return out;
}

}  // namespace

TEST_CASE("supports collect linked and read nodes") {
    CHECK(fanSupport(fixtures::threeTrainsStageA()) == std::set<NodeId>{1, 2});
    CHECK(fanSupport(fixtures::threeTrainsStageB()) == std::set<NodeId>{2, 3});
    CHECK(fanSupport(fixtures::threeTrains()) == std::set<NodeId>{1, 2, 3});
    CHECK(fanSupport(corridorPair("p", 1, 2)) == std::set<NodeId>{1, 2});
}

TEST_CASE("independence demands disjoint supports and shared guards") {
    const Fan p = corridorPair("p", 1, 2);
    const Fan q = corridorPair("q", 3, 4);
    CHECK(independent(p, q));
    CHECK(independent(q, p));

    SECTION("a network is never independent of itself") {
        CHECK_FALSE(independent(p, p));
    }
    SECTION("the two train stages overlap on the middle train") {
        CHECK_FALSE(independent(fixtures::threeTrainsStageA(), fixtures::threeTrainsStageB()));
    }
    SECTION("disjoint supports with different guards do not qualify") {
        Fan qShift = q;
        qShift.guards[0].term = 5.0;  // node 1 is outside q's support
        qShift.validate();
        CHECK_FALSE(independent(p, qShift));
    }
    SECTION("mismatched node sets, spaces, or fields are incompatible") {
        CHECK_THROWS_AS(independent(p, fixtures::threeTrains()), IncompatibleNetworks);
        Fan circle = q;
        circle.net.spaces[3] = PhaseSpace::Circle;
        CHECK_THROWS_AS(independent(p, circle), IncompatibleNetworks);
        Fan faster = q;
        faster.net.defaults[0] = FieldSpec::constant(2.0);
        CHECK_THROWS_AS(independent(p, faster), IncompatibleNetworks);
    }
}

TEST_CASE("amalgamation runs independent pieces side by side") {
    const Fan p = corridorPair("p", 1, 2);
    const Fan q = corridorPair("q", 3, 4);
    const Fan both = amalgamate({p, q});
    REQUIRE(both.net.clauses.size() == 2);

    SECTION("the transition function is the product of the factors'") {
        const State X{0.0, 4.0, 0.0, 4.0};
        const Transition tp = transition(p, X, 40.0, kCfg);
        const Transition tq = transition(q, X, 40.0, kCfg);
        const Transition tb = transition(both, X, 40.0, kCfg);
        // p's support times and states...
        CHECK(tb.S[0] == Catch::Approx(tp.S[0]).margin(1e-9));
        CHECK(tb.S[1] == Catch::Approx(tp.S[1]).margin(1e-9));
        CHECK(tb.Y[0] == Catch::Approx(tp.Y[0]).margin(1e-9));
        CHECK(tb.Y[1] == Catch::Approx(tp.Y[1]).margin(1e-9));
        // ...q's on its support...
        CHECK(tb.S[2] == Catch::Approx(tq.S[2]).margin(1e-9));
        CHECK(tb.S[3] == Catch::Approx(tq.S[3]).margin(1e-9));
        // ...and the held walker really is delayed by its own gate.
        CHECK(tb.S[0] == Catch::Approx(5.0).margin(1e-6));
        CHECK(tb.S[1] == Catch::Approx(4.0).margin(1e-6));
    }

    SECTION("amalgamation of one network is that network") {
        const Fan same = amalgamate({p});
        CHECK(same.name == p.name);
        CHECK(same.net.clauses.size() == p.net.clauses.size());
    }

    SECTION("member order does not change event evaluation") {
        const Fan flipped = amalgamate({q, p});
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> coord(-1.0, 5.0);
        for (int s = 0; s < 200; ++s) {
            const State x{coord(rng), coord(rng), coord(rng), coord(rng)};
            const EventEval ea = evaluateEventMap(both.net, x, noLatches(4));
            const EventEval eb = evaluateEventMap(flipped.net, x, noLatches(4));
            CHECK(ea.alpha == eb.alpha);
            std::vector<std::string> ia = ea.activeIds, ib = eb.activeIds;
            std::sort(ia.begin(), ia.end());
            std::sort(ib.begin(), ib.end());
            CHECK(ia == ib);
        }
    }

    SECTION("a state activating one factor's clause evaluates to that clause alone") {
        // Walker 1 sits on its yield level with its opposer still above 2;
        // corridor q is far from any event.
        const State x{1.0, 3.0, 0.5, 0.5};
        LatchState latches = noLatches(4);
        latches[0] = Latch{1.0};
        const EventEval e = evaluateEventMap(both.net, x, latches);
        CHECK(e.activeIds == std::vector<std::string>{"yield1"});
        CHECK(e.alpha == ConnectionStructure({{0, 1}}));
    }

    SECTION("dependent pieces are rejected") {
        CHECK_THROWS_AS(
            amalgamate({fixtures::threeTrainsStageA(), fixtures::threeTrainsStageB()}),
            NotIndependent);
        CHECK_THROWS_AS(amalgamate({p, p}), NotIndependent);
        CHECK_THROWS_AS(amalgamate({}), NotIndependent);
    }
}

TEST_CASE("the two train stages hand over at the midpoint") {
    const Fan a = fixtures::threeTrainsStageA();
    const Fan b = fixtures::threeTrainsStageB();
    CHECK(precedes(a, b));
    CHECK_FALSE(precedes(b, a));

    SECTION("disjoint supports never precede") {
        CHECK_FALSE(precedes(corridorPair("p", 1, 2), corridorPair("q", 3, 4)));
    }
    SECTION("a broken handover level breaks the relation") {
        Fan bShift = b;
        bShift.guards[1].init = 1.5;
        bShift.validate();
        CHECK_FALSE(precedes(a, bShift));
    }
    SECTION("opposed directions on a shared node break the relation") {
        Fan bBack = b;
        bBack.guards[1].term = -5.0;  // train 2 would have to reverse
        bBack.validate();
        CHECK_FALSE(precedes(a, bBack));
    }
}

TEST_CASE("concatenating the stages rebuilds the three-train line") {
    const Fan a = fixtures::threeTrainsStageA();
    const Fan b = fixtures::threeTrainsStageB();
    const Fan whole = concatenate(b, a);
    const Fan original = fixtures::threeTrains();

    REQUIRE(whole.net.clauses.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(whole.net.clauses[i].id == original.net.clauses[i].id);
        CHECK(whole.net.clauses[i].alpha == original.net.clauses[i].alpha);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(whole.guards[i].init == original.guards[i].init);
        CHECK(whole.guards[i].term == original.guards[i].term);
    }

    SECTION("the rebuilt line flows exactly like the original") {
        const Trajectory tw = advance(whole.net, {3.0, -3.0, 6.0}, 20.0, kCfg);
        const Trajectory to = advance(original.net, {3.0, -3.0, 6.0}, 20.0, kCfg);
        REQUIRE(tw.samples.size() == to.samples.size());
        for (std::size_t i = 0; i < to.samples.size(); ++i) {
            CHECK(tw.samples[i].t == to.samples[i].t);
            CHECK(tw.samples[i].x == to.samples[i].x);
        }
    }

    SECTION("concatenation refuses non-preceding operands") {
        CHECK_THROWS_AS(concatenate(a, b), NotPreceding);
        CHECK_THROWS_AS(concatenate(a, a), NotPreceding);
    }
}

TEST_CASE("stage fields take over in their own regions") {
    const Fan a = fixtures::threeTrainsStageA();
    const Fan b = fixtures::threeTrainsStageB();
    const Fan whole = concatenate(b, a);

    // Train 2 below the midpoint with train 1 still approaching loop 0:
    // stage-a geometry. Its hold at loop 0 drives the same field the full
    // network would.
    LatchState latches = noLatches(3);
    latches[1] = Latch{0.0};
    const State sa{2.0, 0.0, 5.0};
    const FieldResolution ra = resolveFields(whole.net, sa, latches);
    const FieldResolution raStage = resolveFields(a.net, sa, latches);
    for (int i = 0; i < 3; ++i) CHECK(*ra.specs[i] == *raStage.specs[i]);

    // Train 2 at loop L with train 3 still above it: stage-b geometry.
    LatchState latchesB = noLatches(3);
    latchesB[1] = Latch{2.0};
    const State sb{-3.0, 2.0, 3.0};
    const FieldResolution rb = resolveFields(whole.net, sb, latchesB);
    const FieldResolution rbStage = resolveFields(b.net, sb, latchesB);
    for (int i = 0; i < 3; ++i) CHECK(*rb.specs[i] == *rbStage.specs[i]);
}

TEST_CASE("stage clauses never drive a node simultaneously") {
    const Fan a = fixtures::threeTrainsStageA();
    const Fan b = fixtures::threeTrainsStageB();
    const Fan whole = concatenate(b, a);
    const std::vector<std::string> aIds{"stop1_loop0", "stop2_loop0"};
    const std::vector<std::string> bIds{"stop2_loopL", "stop3_loopL"};

    const Trajectory traj = advance(whole.net, {3.0, -3.0, 6.0}, 20.0, kCfg);
    for (double t = 0.0; t <= 20.0; t += 0.25) {
        std::vector<std::string> activeA, activeB;
        for (const std::string& id : traj.activeAt(t)) {
            if (std::find(aIds.begin(), aIds.end(), id) != aIds.end()) activeA.push_back(id);
            if (std::find(bIds.begin(), bIds.end(), id) != bIds.end()) activeB.push_back(id);
        }
        const std::set<NodeId> va = linkedOf(whole.net, activeA);
        const std::set<NodeId> vb = linkedOf(whole.net, activeB);
        for (NodeId n : va) CHECK(vb.count(n) == 0);
    }
}

TEST_CASE("the transition of the whole is the composition of the stages") {
    const Fan a = fixtures::threeTrainsStageA();
    const Fan b = fixtures::threeTrainsStageB();
    const Fan original = fixtures::threeTrains();

    std::mt19937 rng(47);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    std::uniform_real_distribution<double> delay(0.0, 3.0);
    for (int s = 0; s < 25; ++s) {
        const State X{3.0 + jitter(rng), -3.0 + jitter(rng), 6.0 + jitter(rng)};
        const std::vector<double> T{delay(rng), delay(rng), delay(rng)};

        const Transition full = generalizedTransition(original, X, T, 80.0, kCfg);
        const Transition first = generalizedTransition(a, X, T, 80.0, kCfg);
        const Transition second = generalizedTransition(b, first.Y, first.S, 80.0, kCfg);

        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(second.Y[i] == Catch::Approx(full.Y[i]).margin(1e-6));
            CHECK(second.S[i] == Catch::Approx(full.S[i]).margin(1e-6));
        }
    }
}
