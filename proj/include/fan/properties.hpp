#pragma once

// Randomized invariant suites shared by the CLI's verify-properties
// subcommand and the acceptance gate. Header-only so every binary that
// links the core library can run them:
//
//   join-lattice  edge-set join is idempotent, commutative, associative,
//                 has the empty structure as identity and absorbs repeats;
//   semigroup     evolving for s then t equals evolving for s + t;
//   freeze        under staggered starts a node holds its initial
//                 coordinate bit-exactly until its start time;
//   continuity    trajectories have no jumps across switch events;
//   dag-acyclic   declared primitive families order into a DAG whose
//                 canonical layering is valid.

#include "fan/errors.hpp"
#include "fan/factor.hpp"
#include "fan/fan.hpp"
#include "fan/geninit.hpp"
#include "fan/net.hpp"
#include "fan/scenario.hpp"
#include "fan/semiflow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fan {

struct PropertyResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

namespace props_detail {

inline ConnectionStructure randomStructure(std::mt19937& rng, int k) {
    std::uniform_int_distribution<int> nEdges(0, 6), src(0, k), dst(1, k);
    std::vector<std::pair<NodeId, NodeId>> edges;
    const int n = nEdges(rng);
    for (int i = 0; i < n; ++i) edges.emplace_back(src(rng), dst(rng));
    return ConnectionStructure(std::move(edges));
}

/// Horizon that covers every fixture's event activity without dragging the
/// slow ones out to their full scan horizon.
inline double horizon(const Scenario& s) { return std::min(s.sim.tMax, 30.0); }

}  // namespace props_detail

inline PropertyResult checkJoinLattice(int trials = 10000, unsigned seed = 101u) {
    PropertyResult r{"join-lattice", true, ""};
    std::mt19937 rng(seed);
    const ConnectionStructure empty;
    for (int i = 0; i < trials; ++i) {
        const ConnectionStructure a = props_detail::randomStructure(rng, 5);
        const ConnectionStructure b = props_detail::randomStructure(rng, 5);
        const ConnectionStructure c = props_detail::randomStructure(rng, 5);
        const bool ok = join(a, a) == a && join(a, b) == join(b, a) &&
                        join(join(a, b), c) == join(a, join(b, c)) &&
                        join(empty, a) == a && join(a, join(a, b)) == join(a, b);
        if (!ok) {
            r.pass = false;
            r.detail = "law violated at trial " + std::to_string(i);
            return r;
        }
    }
    r.detail = std::to_string(trials) + " random structures";
    return r;
}

inline PropertyResult checkSemigroup(const std::vector<Scenario>& scenarios,
                                     int splitsPer = 6, double tol = 1e-6,
                                     unsigned seed = 102u) {
    PropertyResult r{"semigroup", true, ""};
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> cut(0.05, 0.95);
    double worst = 0.0;
    for (const Scenario& s : scenarios) {
        const double H = props_detail::horizon(s);
        for (int j = 0; j < splitsPer; ++j) {
            const double first = cut(rng) * H;
            const double dev =
                semigroupCheck(s.fan.net, s.initialState, first, H - first, s.sim.cfg);
            if (dev > worst) {
                worst = dev;
                if (dev > tol)
                    r.detail = s.fan.name + " split at t=" + std::to_string(first);
            }
        }
    }
    r.pass = worst <= tol;
    std::ostringstream os;
    os << "max deviation " << worst << " over " << scenarios.size() << " scenarios";
    if (!r.pass) os << " (" << r.detail << ")";
    r.detail = os.str();
    return r;
}

inline PropertyResult checkFreeze(const std::vector<Scenario>& scenarios, int runsPer = 4,
                                  unsigned seed = 103u) {
    PropertyResult r{"freeze", true, ""};
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> delay(0.0, 3.0);
    int checked = 0;
    for (const Scenario& s : scenarios) {
        const double H = props_detail::horizon(s);
        for (int j = 0; j < runsPer; ++j) {
            std::vector<double> T(s.fan.size());
            for (double& t : T) t = delay(rng);
            const Trajectory traj =
                evolveGeneralized(s.fan, s.initialState, T, H, s.sim.cfg);
            for (const Sample& sample : traj.samples) {
                for (std::size_t i = 0; i < s.fan.size(); ++i) {
                    if (sample.t <= T[i] && sample.x[i] != s.initialState[i]) {
                        r.pass = false;
                        std::ostringstream os;
                        os << s.fan.name << ": node " << i + 1 << " moved to "
                           << sample.x[i] << " at t=" << sample.t
                           << " before its start time " << T[i];
                        r.detail = os.str();
                        return r;
                    }
                    ++checked;
                }
            }
        }
    }
    r.detail = std::to_string(checked) + " frozen-sample comparisons, all bit-exact";
    return r;
}

inline PropertyResult checkContinuity(const std::vector<Scenario>& scenarios,
                                      double probe = 1e-6, double tol = 1e-4) {
    PropertyResult r{"continuity", true, ""};
    double worst = 0.0;
    int switches = 0;
    std::string worstAt;
    for (const Scenario& s : scenarios) {
        const Trajectory traj =
            advance(s.fan.net, s.initialState, props_detail::horizon(s), s.sim.cfg);
        for (const TrajectoryEvent& e : traj.events) {
            if (e.t <= traj.t0 + probe || e.t >= traj.t1 - probe) continue;
            const double d = stateDistance(s.fan.net, traj.stateAt(e.t - probe),
                                           traj.stateAt(e.t + probe));
            ++switches;
            if (d > worst) {
                worst = d;
                worstAt = s.fan.name + " t=" + std::to_string(e.t);
            }
        }
    }
    r.pass = worst <= tol;
    std::ostringstream os;
    os << "max jump " << worst << " across " << switches << " events";
    if (!r.pass) os << " (" << worstAt << ")";
    r.detail = os.str();
    return r;
}

inline PropertyResult checkDagAcyclic(const std::vector<Scenario>& scenarios) {
    PropertyResult r{"dag-acyclic", true, ""};
    int families = 0;
    for (const Scenario& s : scenarios) {
        if (s.primitives.empty()) continue;
        ++families;
        try {
            const FeedforwardDag dag = partialOrder(s.primitives);
            bool ok = dag.validLayering(dag.layers);
            for (const std::string& id : dag.ids)
                if (dag.reaches(id, id)) ok = false;
            if (!ok) {
                r.pass = false;
                r.detail = s.fan.name + ": canonical layering invalid";
                return r;
            }
        } catch (const CyclicOrder& e) {
            r.pass = false;
            r.detail = s.fan.name + ": " + e.what();
            return r;
        }
    }
    r.detail = std::to_string(families) + " primitive families acyclic and layered";
    return r;
}

/// The full battery in fixed order. `scenarios` should carry at least one
/// primitive-declaring member for dag-acyclic to bite.
inline std::vector<PropertyResult> runPropertySuites(const std::vector<Scenario>& scenarios,
                                                     int latticeTrials = 10000) {
    return {checkJoinLattice(latticeTrials), checkSemigroup(scenarios),
            checkFreeze(scenarios), checkContinuity(scenarios),
            checkDagAcyclic(scenarios)};
}

}  // namespace fan
