// ===========================================================================
// fan.cpp — guards, regions, transits, the transition function, and the
// structural checks on guard/event geometry.
// ===========================================================================

#include "fan/fan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "fan/errors.hpp"
#include "json.hpp"

namespace fan {

double NodeGuard::effectiveMargin() const {
    if (margin > 0.0) return margin;
    return 0.05 * std::fabs(term - init);
}

void Fan::validate() const {
    net.validate();
    if (guards.size() != net.size())
        throw ConfigError("fan '" + name + "': one guard pair per node required");
    for (std::size_t i = 0; i < guards.size(); ++i) {
        const NodeGuard& g = guards[i];
        if (!std::isfinite(g.init) || !std::isfinite(g.term) || !std::isfinite(g.margin))
            throw ConfigError("fan '" + name + "': guard thresholds must be finite (node " +
                              std::to_string(i + 1) + ")");
        if (g.margin < 0)
            throw ConfigError("fan '" + name + "': negative margin (node " +
                              std::to_string(i + 1) + ")");
    }
}

const char* regionName(Region r) {
    switch (r) {
        case Region::Minus: return "minus";
        case Region::Init: return "init";
        case Region::Zero: return "zero";
        case Region::Term: return "term";
        case Region::Plus: return "plus";
    }
    return "?";
}

Region regionOf(const Fan& fan, NodeId i, double xi, double tol) {
    const NodeGuard& g = fan.guards.at(i - 1);
    if (g.degenerate()) {
        if (std::fabs(xi - g.term) <= tol) return Region::Term;
        return xi < g.term ? Region::Minus : Region::Plus;
    }
    if (std::fabs(xi - g.init) <= tol) return Region::Init;
    if (std::fabs(xi - g.term) <= tol) return Region::Term;
    const double s = g.dir();
    if ((xi - g.init) * s < 0) return Region::Minus;
    if ((xi - g.term) * s > 0) return Region::Plus;
    return Region::Zero;
}

bool TransitRecord::complete() const {
    for (const auto& s : S)
        if (!s.has_value()) return false;
    return true;
}

std::vector<NodeId> TransitRecord::unreached() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (!S[i].has_value()) out.push_back(static_cast<NodeId>(i + 1));
    return out;
}

TransitRecord transit(const Fan& fan, const State& X, double tMax,
                      const IntegratorConfig& cfg) {
    const std::size_t k = fan.size();
    if (X.size() != k) throw ConfigError("transit: state size does not match the network");

    AdvanceOptions opts;
    std::size_t need = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (fan.guards[i].degenerate()) continue;
        opts.watches.push_back({static_cast<NodeId>(i + 1), fan.guards[i].term, "term"});
        ++need;
    }
    opts.stopWhen = [need](const Trajectory& tr) {
        std::set<NodeId> hit;
        for (const auto& e : tr.events)
            if (e.kind == EventKind::TerminalHit && e.note == "term") hit.insert(e.node);
        return hit.size() >= need;
    };

    TransitRecord rec;
    rec.traj = advance(fan.net, X, noLatches(k), 0.0, tMax, cfg, opts);
    rec.S.assign(k, std::nullopt);
    rec.Y.assign(k, 0.0);
    for (const auto& e : rec.traj.events) {
        if (e.kind == EventKind::TerminalHit && e.note == "term") {
            if (!rec.S[e.node - 1].has_value()) rec.S[e.node - 1] = e.t;
        } else if (e.kind == EventKind::Stall && !rec.stalled) {
            rec.stalled = true;
            rec.stallTime = e.t;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (fan.guards[i].degenerate()) {
            rec.S[i] = 0.0;
            rec.Y[i] = X[i];
        } else if (rec.S[i].has_value()) {
            rec.Y[i] = rec.traj.stateAt(*rec.S[i])[i];
        } else {
            rec.Y[i] = rec.traj.finalState()[i];
        }
    }
    return rec;
}

Transition transition(const Fan& fan, const State& X, double tMax,
                      const IntegratorConfig& cfg) {
    TransitRecord rec = transit(fan, X, tMax, cfg);
    if (!rec.complete()) {
        if (rec.stalled)
            throw DeadlockDetected(rec.unreached(), rec.traj.finalState(), rec.stallTime);
        throw NotConnected("transit incomplete within tMax", rec.unreached());
    }
    Transition out;
    out.Y = rec.Y;
    out.S.resize(fan.size());
    for (std::size_t i = 0; i < fan.size(); ++i) out.S[i] = *rec.S[i];
    return out;
}

// ---------------------------------------------------------------------------
// Structural checks
// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval hull of the x_i values over which a predicate can be satisfied
/// (projection of the satisfiable region onto one coordinate). Conservative:
/// negations and relative atoms project to the whole line.
struct Hull {
    double lo = -kInf, hi = kInf;
    bool empty = false;
};

Hull intersect(Hull a, const Hull& b) {
    if (a.empty || b.empty) return {0, 0, true};
    a.lo = std::max(a.lo, b.lo);
    a.hi = std::min(a.hi, b.hi);
    if (a.lo > a.hi) return {0, 0, true};
    return a;
}

Hull projectPredicate(const Predicate& p, NodeId i) {
    switch (p.kind) {
        case Predicate::Kind::True:
            return {};
        case Predicate::Kind::Lt:
            if (p.node == i) return {-kInf, p.value, false};
            return {};
        case Predicate::Kind::Gt:
            if (p.node == i) return {p.value, kInf, false};
            return {};
        case Predicate::Kind::At:
            if (p.node == i) return {p.value, p.value, false};
            return {};
        case Predicate::Kind::CircDistLt:
        case Predicate::Kind::Meet:
            // Relative constraints do not bound a single coordinate.
            return {};
        case Predicate::Kind::And: {
            Hull h;
            for (const auto& k : p.kids) h = intersect(h, projectPredicate(k, i));
            return h;
        }
        case Predicate::Kind::Or: {
            Hull h{0, 0, true};
            for (const auto& k : p.kids) {
                Hull kh = projectPredicate(k, i);
                if (kh.empty) continue;
                if (h.empty) {
                    h = kh;
                } else {
                    h.lo = std::min(h.lo, kh.lo);
                    h.hi = std::max(h.hi, kh.hi);
                }
            }
            return h;
        }
        case Predicate::Kind::Not:
            return {};
    }
    return {};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

bool GeometricReport::allPass() const {
    for (const auto& it : items)
        if (!it.pass) return false;
    return true;
}

const CheckItem* GeometricReport::find(const std::string& name) const {
    for (const auto& it : items)
        if (it.name == name) return &it;
    return nullptr;
}

std::string GeometricReport::toJson() const {
    nlohmann::json j;
    j["all_pass"] = allPass();
    j["checks"] = nlohmann::json::array();
    for (const auto& it : items)
        j["checks"].push_back({{"name", it.name}, {"pass", it.pass}, {"witnesses", it.witnesses}});
    return j.dump(2);
}

GeometricReport checkGeometric(const Fan& fan, int samples, unsigned seed) {
    const std::size_t k = fan.size();
    std::mt19937 rng(seed);
    GeometricReport rep;

    auto sampleBox = [&]() {
        State x(k);
        for (std::size_t i = 0; i < k; ++i) {
            const NodeGuard& g = fan.guards[i];
            if (fan.net.spaces[i] == PhaseSpace::Circle) {
                x[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            } else if (g.degenerate()) {
                x[i] = g.term;
            } else {
                x[i] = std::uniform_real_distribution<double>(g.lo(), g.hi())(rng);
            }
        }
        return x;
    };

    // Guard shape.
    CheckItem shape{"guards-well-formed", true, {}};
    for (std::size_t i = 0; i < k; ++i) {
        const NodeGuard& g = fan.guards[i];
        if (!std::isfinite(g.init) || !std::isfinite(g.term)) {
            shape.pass = false;
            shape.witnesses.push_back("node " + std::to_string(i + 1) +
                                      ": non-finite guard threshold");
        }
        if (!g.degenerate() && 2 * g.effectiveMargin() >= g.hi() - g.lo()) {
            shape.pass = false;
            shape.witnesses.push_back("node " + std::to_string(i + 1) +
                                      ": margin swallows the guard interval");
        }
    }
    rep.items.push_back(std::move(shape));

    // Default-field orientation at the guard thresholds.
    CheckItem orient{"default-field-oriented", true, {}};
    for (std::size_t i = 0; i < k && orient.pass; ++i) {
        const NodeGuard& g = fan.guards[i];
        if (g.degenerate()) continue;
        for (int s = 0; s < samples && orient.pass; ++s) {
            State x = sampleBox();
            for (double level : {g.init, g.term}) {
                x[i] = level;
                const double v =
                    fan.net.defaults[i].eval(static_cast<NodeId>(i + 1), x);
                if (!(v * g.dir() > 0.0)) {
                    orient.pass = false;
                    orient.witnesses.push_back(
                        "node " + std::to_string(i + 1) + ": default field " + fmt(v) +
                        " at level " + fmt(level) + " does not point from init toward term");
                    break;
                }
            }
        }
    }
    rep.items.push_back(std::move(orient));

    // Events interior: each clause's satisfiable region must keep every
    // linked node margin-deep inside its guard interval.
    CheckItem interior{"events-interior", true, {}};
    for (const auto& cl : fan.net.clauses) {
        for (NodeId n : linkedNodes(cl.alpha)) {
            const NodeGuard& g = fan.guards[n - 1];
            Hull h = projectPredicate(cl.when, n);
            if (h.empty) continue;  // unsatisfiable clause: vacuous
            if (g.degenerate()) {
                interior.pass = false;
                interior.witnesses.push_back("clause '" + cl.id + "': linked node " +
                                             std::to_string(n) +
                                             " has a degenerate guard interval");
                continue;
            }
            const double m = g.effectiveMargin();
            if (h.lo < g.lo() + m || h.hi > g.hi() - m) {
                interior.pass = false;
                interior.witnesses.push_back(
                    "clause '" + cl.id + "': node " + std::to_string(n) + " can be linked over [" +
                    fmt(h.lo) + ", " + fmt(h.hi) + "], outside [" + fmt(g.lo() + m) + ", " +
                    fmt(g.hi() - m) + "]");
            }
        }
    }
    rep.items.push_back(std::move(interior));

    // Off-core spot check: displacing a linked node beyond its guards must
    // leave it on its default field.
    CheckItem offcore{"off-core-default", true, {}};
    const LatchState noL = noLatches(k);
    for (const auto& cl : fan.net.clauses) {
        for (NodeId n : linkedNodes(cl.alpha)) {
            const NodeGuard& g = fan.guards[n - 1];
            if (g.degenerate() || fan.net.spaces[n - 1] == PhaseSpace::Circle) continue;
            const double ext = g.hi() - g.lo();
            for (int s = 0; s < std::max(1, samples / 10); ++s) {
                for (double disp :
                     {g.hi() + g.effectiveMargin() + 0.1 * ext,
                      g.lo() - g.effectiveMargin() - 0.1 * ext}) {
                    State x = sampleBox();
                    x[n - 1] = disp;
                    FieldResolution res = resolveFields(fan.net, x, noL);
                    if (!(*res.specs[n - 1] == fan.net.defaults[n - 1])) {
                        offcore.pass = false;
                        offcore.witnesses.push_back(
                            "node " + std::to_string(n) + " at " + fmt(disp) +
                            " is driven by a non-default field (clause '" + cl.id + "')");
                    }
                }
            }
        }
    }
    rep.items.push_back(std::move(offcore));

    return rep;
}

}  // namespace fan
