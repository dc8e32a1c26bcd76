#include "fan/transform.hpp"

#include "fan/errors.hpp"

#include <cmath>
#include <string>

namespace fan {

ClampSpec ClampSpec::canonical(const Fan& fan) {
    ClampSpec spec;
    spec.initRep.reserve(fan.size());
    spec.termRep.reserve(fan.size());
    for (const NodeGuard& g : fan.guards) {
        spec.initRep.push_back(g.init);
        spec.termRep.push_back(g.term);
    }
    return spec;
}

Fan core(const Fan& fan, const ClampSpec& spec) {
    if (spec.initRep.size() != fan.size() || spec.termRep.size() != fan.size())
        throw ConfigError("core: representative vectors must have one entry per node");

    Fan out = fan;
    out.name = fan.name + "_core";
    out.net.clamp.assign(fan.size(), std::nullopt);
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const NodeGuard& g = fan.guards[i];
        if (std::abs(spec.initRep[i] - g.init) > 1e-12 ||
            std::abs(spec.termRep[i] - g.term) > 1e-12)
            throw ConfigError("core: representative for node " + std::to_string(i + 1) +
                              " is off its guard level set");
        if (g.degenerate() || fan.net.spaces[i] == PhaseSpace::Circle) continue;
        NodeClamp c;
        c.lo = g.lo();
        c.hi = g.hi();
        // The low end of the transit box is the initialization guard for a
        // rightward node and the termination guard for a leftward one.
        c.loRep = g.dir() > 0 ? spec.initRep[i] : spec.termRep[i];
        c.hiRep = g.dir() > 0 ? spec.termRep[i] : spec.initRep[i];
        out.net.clamp[i] = c;
    }
    out.validate();
    return out;
}

Fan core(const Fan& fan) { return core(fan, ClampSpec::canonical(fan)); }

Fan stopped(const Fan& fan) {
    Fan out = fan;
    out.name = fan.name + "_stopped";
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const NodeId node = static_cast<NodeId>(i + 1);
        const std::string id = "__stop_" + std::to_string(node);
        bool present = false;
        for (const EventClause& c : out.net.clauses) present |= c.id == id;
        if (present) continue;

        const NodeGuard& g = fan.guards[i];
        Predicate when = Predicate::always();
        if (!g.degenerate()) {
            if (fan.net.spaces[i] == PhaseSpace::Circle)
                throw ConfigError(
                    "stopped: node " + std::to_string(node) +
                    " is a circle node with distinct guards; its termination "
                    "level cannot be expressed as an event atom");
            // Latch exactly on the guard, and keep holding past it so a node
            // that starts beyond its guard is pinned too.
            when = Predicate::disj({Predicate::at(node, g.term),
                                    g.dir() > 0 ? Predicate::gt(node, g.term)
                                                : Predicate::lt(node, g.term)});
        }
        out.net.clauses.push_back({id, ConnectionStructure({{0, node}}), when,
                                   {{node, FieldSpec::zero()}}});
    }
    out.validate();
    return out;
}

}  // namespace fan
