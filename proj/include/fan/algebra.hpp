#pragma once

#include "fan/fan.hpp"

#include <set>
#include <vector>

namespace fan {

/// Nodes that participate in the network's events: linked by an edge or read
/// by a predicate. Nodes outside the support just ride their default fields.
std::set<NodeId> fanSupport(const Fan& fan);

/// True iff the two networks can run side by side without noticing each
/// other: disjoint supports and identical per-node guard levels (so the
/// per-node stage regions coincide). Throws IncompatibleNetworks when the
/// node sets, phase spaces, or default fields differ.
bool independent(const Fan& a, const Fan& b);

/// Amalgamation of a pairwise-independent family: one network carrying the
/// union of all clause lists over the common guards. With a single member it
/// returns that member unchanged. Throws NotIndependent.
Fan amalgamate(const std::vector<Fan>& fans);

/// True iff `a` hands over to `b`: their supports overlap, and on every node
/// a's termination guard is b's initialization guard with consistent transit
/// directions (a pass-through side imposes nothing).
bool precedes(const Fan& a, const Fan& b);

/// Concatenation b ⋄ a — a runs first. The result keeps a's initialization
/// guards, b's termination guards, and the union of both clause lists; each
/// clause stays localized in its own stage's region, so the two stages never
/// drive a node at the same time. Throws NotPreceding unless precedes(a, b).
Fan concatenate(const Fan& b, const Fan& a);

}  // namespace fan
