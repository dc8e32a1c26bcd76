#pragma once

// Generalized initialization: every node i sits frozen at its initial
// coordinate until its own start time T_i, then joins the running network.
// The induced evolution, transit and transition maps extend the plain
// (simultaneous-start) ones, which are recovered at T = 0.

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fan/fan.hpp"
#include "fan/semiflow.hpp"

namespace fan {

/// The distinct start times in increasing order together with the cumulative
/// sets of nodes already running at each of them.
struct SwitchSchedule {
    std::vector<double> tau;           ///< sorted distinct start times
    std::vector<std::set<NodeId>> J;   ///< J[l] = nodes with T_i <= tau[l]
};

/// Build the switch schedule of a start-time vector. Throws ConfigError on
/// negative or non-finite entries.
SwitchSchedule switchSchedule(const std::vector<double>& T);

/// Evolve with per-node start times (node i frozen at X_i on [0, T_i]).
/// With T = 0 this is exactly advance().
Trajectory evolveGeneralized(const Fan& fan, const State& X, const std::vector<double>& T,
                             double tEnd, const IntegratorConfig& cfg,
                             const AdvanceOptions& extra = {});

/// Generalized transit: per-node first passage of the termination guards
/// under staggered starts. Degenerate (pass-through) guards terminate at
/// their own start time: S_i = T_i, Y_i = X_i.
TransitRecord generalizedTransit(const Fan& fan, const State& X,
                                 const std::vector<double>& T, double tMax,
                                 const IntegratorConfig& cfg);

/// Generalized transition map (X, T) -> (Y, S). Throws DeadlockDetected when
/// the run stalls, NotConnected when it merely times out.
Transition generalizedTransition(const Fan& fan, const State& X,
                                 const std::vector<double>& T, double tMax,
                                 const IntegratorConfig& cfg);

/// Max-norm deviation from the uniform-shift identity: starting every node T
/// later must shift all passage times by T and leave terminal states alone.
double uniformShiftCheck(const Fan& fan, const State& X, double T, double tMax,
                         const IntegratorConfig& cfg);

/// One failed (X, T) sample of a regularity scan.
struct RegularityFailure {
    State X;
    std::vector<double> T;
    std::string classification;  ///< "deadlock-total" | "deadlock-partial" | "livelock" | "unresolved"
};

struct RegularityReport {
    int samples = 0;
    int connected = 0;
    std::vector<RegularityFailure> failures;

    double connectedFraction() const {
        return samples == 0 ? 1.0 : static_cast<double>(connected) / samples;
    }
    std::string toJson() const;
};

/// Sample nX initial states (initialization-guard coordinates; free circle
/// phases) times nT start-time vectors uniform in [0, Tmax]^k (Tmax = 0 gives
/// the all-zero vector) and classify every sample's generalized transit.
RegularityReport regularityScan(const Fan& fan, int nX, int nT, double Tmax,
                                double tMax, unsigned seed, const IntegratorConfig& cfg);

/// Initial-state sampler shared by the scan utilities: non-degenerate line
/// nodes start on their initialization guard, circle nodes uniformly on the
/// circle, degenerate line nodes on their (single) guard level.
State sampleInitState(const Fan& fan, std::mt19937& rng);

}  // namespace fan
