#pragma once

// Event-driven semiflow for asynchronous networks.
//
// Between events the active clause set is frozen and the state advances with
// the resolved fields: exactly (one linear leap) when every resolved field is
// constant, otherwise with classical RK4 steps capped at hMax (RK4 is still
// exact for the constant components). Crossings of predicate thresholds,
// circle-distance levels, meeting points and caller-supplied watch levels are
// localized by bisection over the last step down to tEventLocalize, ties are
// processed jointly, and the clause set is re-evaluated at the event time.
//
// Capture semantics: a crossing of an `at` (or `meet`) threshold that
// activates a clause assigning the zero field to the crossing node(s) snaps
// the coordinate(s) exactly onto the threshold and sets a latch; a latched
// node is released at the first instant the joint evaluation (with its
// at-atom held true) no longer pins it with a zero field.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fan/net.hpp"

namespace fan {

struct IntegratorConfig {
    double hMax = 0.01;            ///< max RK4 step for non-constant fields
    double tEventLocalize = 1e-9;  ///< event-time localization width
    double stateTol = 1e-6;        ///< state comparison tolerance
    double latchEps = 1e-9;        ///< max coordinate motion a capture snap may cause
    int zenoLimit = 1000;          ///< events allowed inside one localization window
};

enum class EventKind { Switch, Latch, Unlatch, TerminalHit, Stall, Recurrence };

const char* eventKindName(EventKind k);

struct TrajectoryEvent {
    double t = 0.0;
    EventKind kind = EventKind::Switch;
    NodeId node = 0;                  ///< subject node (0 when not applicable)
    double value = 0.0;               ///< threshold / coordinate / period
    std::vector<std::string> active;  ///< active clause ids after the event
    std::string note;
};

struct Sample {
    double t = 0.0;
    State x;  ///< circle coordinates stored unwrapped (lifted)
};

struct Trajectory {
    double t0 = 0.0, t1 = 0.0;
    std::vector<Sample> samples;  ///< step/event grid, strictly increasing t
    std::vector<TrajectoryEvent> events;
    LatchState finalLatches;

    const State& finalState() const { return samples.back().x; }

    /// Linear interpolation on the sample grid (exact within constant-field
    /// segments; RK4 segments are sampled at every step so the interpolation
    /// error stays of the order of the local step error).
    State stateAt(double t) const;

    /// Active clause ids at a given time (reconstructed from the event log).
    std::vector<std::string> activeAt(double t) const;
};

/// A passive level watch: crossings are logged as TerminalHit events but do
/// not alter the dynamics. Used by transits to record guard hits.
struct Watch {
    NodeId node = 0;
    double threshold = 0.0;
    std::string tag;  ///< stored in the event note
};

/// Run options beyond the integrator knobs.
struct AdvanceOptions {
    std::vector<Watch> watches;
    std::vector<double> startTimes;  ///< per node; empty = all start at t0
    /// Optional early-exit: called after each event with the trajectory so
    /// far; return true to stop integrating (used by transits once all guard
    /// hits are recorded).
    std::function<bool(const Trajectory&)> stopWhen;
};

/// Evolve the network from (t0, x0, latches0) to tEnd.
Trajectory advance(const AsyncNetwork& net, const State& x0, const LatchState& latches0,
                   double t0, double tEnd, const IntegratorConfig& cfg,
                   const AdvanceOptions& opts = {});

/// Convenience overload: start unlatched at t0 = 0.
Trajectory advance(const AsyncNetwork& net, const State& x0, double tEnd,
                   const IntegratorConfig& cfg);

/// Max-norm discrepancy of the semigroup property at X:
/// compares running for s then t against running for s + t (latches thread
/// through the split; sliding modes are part of the extended state).
double semigroupCheck(const AsyncNetwork& net, const State& x0, double s, double t,
                      const IntegratorConfig& cfg);

/// Per-node distance respecting circle wraparound; returns the max norm.
double stateDistance(const AsyncNetwork& net, const State& a, const State& b);

/// Write `t,x_1,...,x_k,clauses` rows at every sample point plus a uniform
/// grid of pitch sampleDt (0 disables the grid). Circle coordinates wrapped.
void writeCsv(std::ostream& os, const AsyncNetwork& net, const Trajectory& traj,
              double sampleDt = 0.0);

/// Write one JSON object per event: {"t":..,"kind":..,...}.
void writeEventsJsonl(std::ostream& os, const Trajectory& traj);

}  // namespace fan
