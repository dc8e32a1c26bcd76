#pragma once

#include "fan/fan.hpp"

#include <vector>

namespace fan {

/// Representative points on the initialization and termination guard level
/// sets, one per node. The core transform substitutes them for coordinates
/// that have drifted past the corresponding guard. On a line each guard
/// level set is a single point, so valid representatives are forced to the
/// guard levels themselves; the freedom the type offers is how they were
/// obtained, and core() checks the invariant rather than trusting it.
struct ClampSpec {
    std::vector<double> initRep;
    std::vector<double> termRep;

    /// Representatives read straight off the guard levels.
    static ClampSpec canonical(const Fan& fan);
};

/// Core transform: the returned network evaluates its event map on the
/// clamped state — each non-degenerate line coordinate is confined to the
/// closed interval between its two guard levels, with out-of-range values
/// replaced by the matching representative. Dynamics are otherwise
/// untouched; degenerate and circle nodes are never clamped.
/// Throws ConfigError when the representatives are off the guard level sets
/// or sized wrong.
Fan core(const Fan& fan, const ClampSpec& spec);

/// Core transform with canonical representatives.
Fan core(const Fan& fan);

/// Stopped network: augments the event map so every node latches permanently
/// on first contact with its termination guard (a stop edge from the
/// constraining node pins it with the zero field). Pass-through nodes —
/// degenerate guards, whose transit is complete at its start — are pinned
/// from the start. Applying the transform twice is a no-op. Throws
/// ConfigError for a circle node with distinct guards: no event atom can
/// test a circle coordinate against a fixed level.
Fan stopped(const Fan& fan);

}  // namespace fan
