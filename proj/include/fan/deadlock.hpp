#pragma once

// Sink detection and classification along trajectories: total and partial
// deadlocks (every velocity zero off the termination set), livelocks
// (periodic recurrence without progress toward termination), and the
// start-time grid scan for deadlocks hidden behind a clean synchronized run.

#include <string>
#include <vector>

#include "fan/fan.hpp"
#include "fan/semiflow.hpp"

namespace fan {

enum class SinkKind { None, Total, Partial, Livelock };

const char* sinkKindName(SinkKind k);

struct DeadlockReport {
    SinkKind kind = SinkKind::None;
    double entryTime = 0.0;
    State sinkEstimate;                  ///< fixed state, or one orbit sample for a livelock
    double period = 0.0;                 ///< livelock period estimate
    std::vector<NodeId> terminalNodes;   ///< nodes resting on their termination guard
    std::vector<NodeId> stalledNodes;    ///< nodes resting short of it

    std::string toJson() const;
};

/// Report a deadlock when every node velocity vanished (and provably stays
/// zero) for at least stallWindow while some node is off its termination
/// guard. Total: no node terminal; partial: a genuine mix. A full stop ON
/// the termination set is normal completion, not a deadlock.
DeadlockReport detectStall(const Trajectory& traj, const Fan& fan, double stallWindow = 1.0);

/// Report a livelock when the tail of the trajectory recurs with some period
/// P in [minPeriod, maxPeriod] (max-norm within tol, circle-aware) sustained
/// over at least three periods while no node makes progress toward its
/// termination guard.
DeadlockReport detectLivelock(const Trajectory& traj, const Fan& fan, double minPeriod,
                              double maxPeriod, double tol = 1e-4);

/// Stall test first, then a livelock sweep with period bounds derived from
/// the trajectory span.
DeadlockReport classifySink(const Trajectory& traj, const Fan& fan);

struct HiddenDeadlockWitness {
    State X;
    std::vector<double> T;
    DeadlockReport report;
};

struct HiddenScanReport {
    int checked = 0;                              ///< (X, T) pairs examined
    std::vector<HiddenDeadlockWitness> witnesses;
    /// One entry per grid vector T: worst outcome over the X samples, coded
    /// 0 = connected, 1 = deadlock, 2 = livelock, 3 = unresolved.
    std::vector<std::pair<std::vector<double>, int>> cells;

    bool contains(const std::vector<double>& T) const;
    std::string toJson() const;
    /// Heat-map rows `T_1,...,T_k,code` over the scanned grid.
    std::string toCsv() const;
};

/// Scan the Cartesian grid tGrid^k of start-time vectors from xSamples
/// initial states, keeping the sinks reachable from states whose
/// synchronized (T = 0) run completes. Throws ConfigError when a T = 0 run
/// fails: such deadlocks are not hidden.
HiddenScanReport hiddenDeadlockScan(const Fan& fan, const std::vector<double>& tGrid,
                                    int xSamples, double tMax, unsigned seed,
                                    const IntegratorConfig& cfg);

}  // namespace fan
