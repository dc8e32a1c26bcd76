#pragma once

// Functional structure on an asynchronous network: per-node initialization
// and termination guards, the region decomposition they induce on each node
// coordinate, transit times to the termination set, the transition function,
// and structural sanity checks on the guard/event geometry.

#include <optional>
#include <string>
#include <vector>

#include "fan/net.hpp"
#include "fan/semiflow.hpp"

namespace fan {

/// Guards of one node: two point thresholds on the node coordinate. Motion
/// is oriented from init toward term. init == term marks a degenerate
/// (pass-through) node whose transit is instantaneous.
struct NodeGuard {
    double init = 0.0;
    double term = 0.0;
    /// Half-width of the boundary neighbourhood used by the interior-events
    /// check; 0 selects the default of 5% of the interval extent.
    double margin = 0.0;

    bool degenerate() const { return init == term; }
    double dir() const { return term >= init ? 1.0 : -1.0; }
    double lo() const { return init < term ? init : term; }
    double hi() const { return init < term ? term : init; }
    double effectiveMargin() const;
};

/// A network together with its guards: a functional asynchronous network.
struct Fan {
    std::string name;
    AsyncNetwork net;
    std::vector<NodeGuard> guards;

    std::size_t size() const { return net.size(); }
    /// net.validate() plus guard shape checks (one per node, finite values).
    void validate() const;
};

/// Position of a node coordinate relative to its guards. Boundary bands of
/// half-width `tol` around the thresholds take precedence; degenerate nodes
/// classify as Term whenever they sit on the (single) threshold.
enum class Region { Minus, Init, Zero, Term, Plus };

const char* regionName(Region r);

Region regionOf(const Fan& fan, NodeId i, double xi, double tol = 1e-6);

/// Per-node first-hit record of a transit run.
struct TransitRecord {
    std::vector<std::optional<double>> S;  ///< first hit of the termination guard
    State Y;  ///< node state at its own hit time (final state where unreached)
    bool stalled = false;  ///< the run froze with all velocities zero
    double stallTime = 0.0;
    Trajectory traj;

    bool complete() const;
    std::vector<NodeId> unreached() const;
};

/// Evolve from X with every node started at t = 0 until each node has hit
/// its termination threshold, the dynamics stall, or tMax elapses. Nodes
/// keep evolving after their own hit (later hits of other nodes may depend
/// on them). Degenerate nodes transit instantly: S_i = 0, y_i = x_i.
TransitRecord transit(const Fan& fan, const State& X, double tMax,
                      const IntegratorConfig& cfg = {});

/// Terminal states and transit times of a completed transit.
struct Transition {
    State Y;
    std::vector<double> S;
};

/// The transition function. Throws DeadlockDetected when the run stalled
/// short of completion and NotConnected when tMax elapsed with termination
/// guards unreached.
Transition transition(const Fan& fan, const State& X, double tMax,
                      const IntegratorConfig& cfg = {});

/// One named structural check with witnesses for failures.
struct CheckItem {
    std::string name;
    bool pass = true;
    std::vector<std::string> witnesses;
};

struct GeometricReport {
    std::vector<CheckItem> items;
    bool allPass() const;
    const CheckItem* find(const std::string& name) const;
    std::string toJson() const;
};

/// Structural sanity checks of the guard/event geometry:
///  - "guards-well-formed":    finite thresholds, margins smaller than the
///                             guard interval, degenerate flags consistent
///  - "default-field-oriented": the default field is nonzero at both guard
///                             thresholds and points from init toward term
///                             (sampled over the guard box)
///  - "events-interior":       every clause keeps each linked node strictly
///                             inside its guard interval, margin-deep, over
///                             the clause's satisfiable region
///  - "off-core-default":      displacing a linked node beyond its guards
///                             leaves that node on its default field
///                             (sampled spot check)
GeometricReport checkGeometric(const Fan& fan, int samples = 200, unsigned seed = 1);

}  // namespace fan
