#include "fan/algebra.hpp"

#include "fan/errors.hpp"

#include <algorithm>
#include <string>

namespace fan {

namespace {

void requireCompatible(const Fan& a, const Fan& b) {
    if (a.size() != b.size())
        throw IncompatibleNetworks("node sets differ: " + std::to_string(a.size()) +
                                   " vs " + std::to_string(b.size()) + " nodes");
    if (a.net.spaces != b.net.spaces)
        throw IncompatibleNetworks("phase spaces differ between '" + a.name + "' and '" +
                                   b.name + "'");
    if (a.net.defaults != b.net.defaults)
        throw IncompatibleNetworks("default fields differ between '" + a.name + "' and '" +
                                   b.name + "'");
}

bool disjoint(const std::set<NodeId>& a, const std::set<NodeId>& b) {
    for (NodeId n : a)
        if (b.count(n)) return false;
    return true;
}

}  // namespace

std::set<NodeId> fanSupport(const Fan& fan) { return networkSupport(fan.net); }

bool independent(const Fan& a, const Fan& b) {
    requireCompatible(a, b);
    if (!disjoint(fanSupport(a), fanSupport(b))) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.guards[i].init != b.guards[i].init || a.guards[i].term != b.guards[i].term)
            return false;
    }
    return true;
}

Fan amalgamate(const std::vector<Fan>& fans) {
    if (fans.empty()) throw NotIndependent("amalgamate: empty family");
    if (fans.size() == 1) return fans.front();

    for (std::size_t i = 0; i < fans.size(); ++i) {
        for (std::size_t j = i + 1; j < fans.size(); ++j) {
            if (!independent(fans[i], fans[j]))
                throw NotIndependent("'" + fans[i].name + "' and '" + fans[j].name +
                                     "' are not independent: overlapping supports or "
                                     "mismatched guards");
        }
    }

    Fan out = fans.front();
    for (std::size_t i = 1; i < fans.size(); ++i) {
        out.name += "+" + fans[i].name;
        for (const EventClause& c : fans[i].net.clauses) out.net.clauses.push_back(c);
    }
    // Disjoint supports make cross-member field conflicts impossible; this
    // re-checks clause well-formedness and id uniqueness of the union.
    out.validate();
    return out;
}

bool precedes(const Fan& a, const Fan& b) {
    requireCompatible(a, b);
    if (disjoint(fanSupport(a), fanSupport(b))) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // Stage handover on every node: a ends exactly where b begins, and
        // the stages agree on which way the node travels (a pass-through
        // stage leaves the direction free).
        if (a.guards[i].term != b.guards[i].init) return false;
        if (a.guards[i].degenerate() || b.guards[i].degenerate()) continue;
        if (a.guards[i].dir() != b.guards[i].dir()) return false;
    }
    return true;
}

Fan concatenate(const Fan& b, const Fan& a) {
    if (!precedes(a, b))
        throw NotPreceding("'" + a.name + "' does not precede '" + b.name +
                           "': supports disjoint or guard handover mismatch");

    Fan out = a;
    out.name = a.name + "." + b.name;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.guards[i].init = a.guards[i].init;
        out.guards[i].term = b.guards[i].term;
        out.guards[i].margin = std::max(a.guards[i].margin, b.guards[i].margin);
    }
    for (const EventClause& c : b.net.clauses) out.net.clauses.push_back(c);
    out.validate();
    return out;
}

}  // namespace fan
