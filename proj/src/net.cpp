#include "fan/net.hpp"

#include <algorithm>
#include <cmath>

namespace fan {

double wrapCircle(double x) {
    double w = std::fmod(x, 1.0);
    if (w < 0.0) w += 1.0;
    return w;
}

double circleDist(double a, double b) {
    double d = std::fabs(wrapCircle(a) - wrapCircle(b));
    return std::min(d, 1.0 - d);
}

// ---------------------------------------------------------------------------
// FieldSpec
// ---------------------------------------------------------------------------

FieldSpec FieldSpec::zero() { return FieldSpec{}; }

FieldSpec FieldSpec::constant(double v) {
    FieldSpec f;
    f.kind = Kind::Constant;
    f.value = v;
    return f;
}

FieldSpec FieldSpec::kuramoto(double omega, double kappa, NodeId partner) {
    FieldSpec f;
    f.kind = Kind::Kuramoto;
    f.omega = omega;
    f.kappa = kappa;
    f.partner = partner;
    return f;
}

FieldSpec FieldSpec::affine(std::vector<std::pair<NodeId, double>> terms, double offset) {
    FieldSpec f;
    f.kind = Kind::Affine;
    f.terms = std::move(terms);
    f.offset = offset;
    return f;
}

double FieldSpec::eval(NodeId self, const State& x) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return value;
        case Kind::Kuramoto: {
            const double twoPi = 2.0 * M_PI;
            return omega + kappa * std::sin(twoPi * (x[partner - 1] - x[self - 1]));
        }
        case Kind::Affine: {
            double v = offset;
            for (const auto& [n, c] : terms) v += c * x[n - 1];
            return v;
        }
    }
    return 0.0;
}

std::vector<NodeId> FieldSpec::references() const {
    switch (kind) {
        case Kind::Kuramoto:
            return {partner};
        case Kind::Affine: {
            std::vector<NodeId> r;
            for (const auto& [n, c] : terms)
                if (c != 0.0) r.push_back(n);
            return r;
        }
        default:
            return {};
    }
}

bool FieldSpec::operator==(const FieldSpec& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::Zero:
            return true;
        case Kind::Constant:
            return value == o.value;
        case Kind::Kuramoto:
            return omega == o.omega && kappa == o.kappa && partner == o.partner;
        case Kind::Affine:
            return terms == o.terms && offset == o.offset;
    }
    return false;
}

// ---------------------------------------------------------------------------
// ConnectionStructure
// ---------------------------------------------------------------------------

ConnectionStructure::ConnectionStructure(std::vector<std::pair<NodeId, NodeId>> e)
    : edges(std::move(e)) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

ConnectionStructure join(const ConnectionStructure& a, const ConnectionStructure& b) {
    std::vector<std::pair<NodeId, NodeId>> e = a.edges;
    e.insert(e.end(), b.edges.begin(), b.edges.end());
    return ConnectionStructure(std::move(e));
}

std::set<NodeId> linkedNodes(const ConnectionStructure& alpha) {
    std::set<NodeId> v;
    for (const auto& [s, t] : alpha.edges) {
        if (s >= 1) v.insert(s);
        if (t >= 1) v.insert(t);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Predicate
// ---------------------------------------------------------------------------

Predicate Predicate::always() { return Predicate{}; }

Predicate Predicate::lt(NodeId n, double c) {
    Predicate p;
    p.kind = Kind::Lt;
    p.node = n;
    p.value = c;
    return p;
}

Predicate Predicate::gt(NodeId n, double c) {
    Predicate p;
    p.kind = Kind::Gt;
    p.node = n;
    p.value = c;
    return p;
}

Predicate Predicate::at(NodeId n, double c) {
    Predicate p;
    p.kind = Kind::At;
    p.node = n;
    p.value = c;
    return p;
}

Predicate Predicate::circDistLt(NodeId a, NodeId b, double eps) {
    Predicate p;
    p.kind = Kind::CircDistLt;
    p.node = a;
    p.node2 = b;
    p.value = eps;
    return p;
}

Predicate Predicate::meet(NodeId a, NodeId b, double tol) {
    Predicate p;
    p.kind = Kind::Meet;
    p.node = a;
    p.node2 = b;
    p.value = tol;
    return p;
}

Predicate Predicate::conj(std::vector<Predicate> kids) {
    Predicate p;
    p.kind = Kind::And;
    p.kids = std::move(kids);
    return p;
}

Predicate Predicate::disj(std::vector<Predicate> kids) {
    Predicate p;
    p.kind = Kind::Or;
    p.kids = std::move(kids);
    return p;
}

Predicate Predicate::negate(Predicate kid) {
    Predicate p;
    p.kind = Kind::Not;
    p.kids.push_back(std::move(kid));
    return p;
}

std::set<NodeId> Predicate::referencedNodes() const {
    std::set<NodeId> r;
    switch (kind) {
        case Kind::True:
            break;
        case Kind::Lt:
        case Kind::Gt:
        case Kind::At:
            r.insert(node);
            break;
        case Kind::CircDistLt:
        case Kind::Meet:
            r.insert(node);
            r.insert(node2);
            break;
        case Kind::And:
        case Kind::Or:
        case Kind::Not:
            for (const auto& k : kids) {
                auto sub = k.referencedNodes();
                r.insert(sub.begin(), sub.end());
            }
            break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Latches
// ---------------------------------------------------------------------------

LatchState noLatches(std::size_t k) { return LatchState(k); }

// ---------------------------------------------------------------------------
// AsyncNetwork
// ---------------------------------------------------------------------------

State AsyncNetwork::clamped(const State& x) const {
    if (clamp.empty()) return x;
    State y = x;
    for (std::size_t i = 0; i < y.size() && i < clamp.size(); ++i) {
        if (!clamp[i]) continue;
        const NodeClamp& c = *clamp[i];
        if (y[i] < c.lo)
            y[i] = c.loRep;
        else if (y[i] > c.hi)
            y[i] = c.hiRep;
    }
    return y;
}

namespace {

void validatePredicate(const Predicate& p, const AsyncNetwork& net) {
    auto checkNode = [&](NodeId n) {
        if (n < 1 || static_cast<std::size_t>(n) > net.size())
            throw ConfigError("predicate references node " + std::to_string(n) +
                              " outside 1.." + std::to_string(net.size()));
    };
    switch (p.kind) {
        case Predicate::Kind::True:
            break;
        case Predicate::Kind::Lt:
        case Predicate::Kind::Gt:
        case Predicate::Kind::At:
            checkNode(p.node);
            if (!std::isfinite(p.value)) throw ConfigError("non-finite threshold in predicate");
            if (net.spaces[p.node - 1] == PhaseSpace::Circle)
                throw ConfigError("directional atom on circle node " + std::to_string(p.node));
            break;
        case Predicate::Kind::CircDistLt:
            checkNode(p.node);
            checkNode(p.node2);
            if (!(p.value > 0.0 && p.value < 0.5))
                throw ConfigError("circDistLt eps must lie in (0, 0.5)");
            if (net.spaces[p.node - 1] != PhaseSpace::Circle ||
                net.spaces[p.node2 - 1] != PhaseSpace::Circle)
                throw ConfigError("circDistLt requires circle nodes");
            break;
        case Predicate::Kind::Meet:
            checkNode(p.node);
            checkNode(p.node2);
            if (p.node == p.node2) throw ConfigError("meet atom needs two distinct nodes");
            if (net.spaces[p.node - 1] != PhaseSpace::Line ||
                net.spaces[p.node2 - 1] != PhaseSpace::Line)
                throw ConfigError("meet atom requires line nodes");
            break;
        case Predicate::Kind::Not:
            if (p.kids.size() != 1) throw ConfigError("'not' takes exactly one child");
            validatePredicate(p.kids[0], net);
            break;
        case Predicate::Kind::And:
        case Predicate::Kind::Or:
            if (p.kids.empty()) throw ConfigError("'and'/'or' needs at least one child");
            for (const auto& k : p.kids) validatePredicate(k, net);
            break;
    }
}

}  // namespace

void AsyncNetwork::validate() const {
    if (spaces.size() != defaults.size())
        throw ConfigError("per-node space/default field count mismatch");
    std::set<std::string> ids;
    for (const auto& cl : clauses) {
        if (cl.id.empty()) throw ConfigError("clause with empty id");
        if (!ids.insert(cl.id).second) throw ConfigError("duplicate clause id '" + cl.id + "'");
        for (const auto& [s, t] : cl.alpha.edges) {
            if (s < 0 || static_cast<std::size_t>(s) > size())
                throw ConfigError("clause '" + cl.id + "': edge source out of range");
            if (t < 1 || static_cast<std::size_t>(t) > size())
                throw ConfigError("clause '" + cl.id + "': edge target out of range");
        }
        auto linked = linkedNodes(cl.alpha);
        std::set<NodeId> assigned;
        for (const auto& [n, f] : cl.assigns) assigned.insert(n);
        if (assigned != linked)
            throw ConfigError("clause '" + cl.id +
                              "': assigned nodes must coincide with linked nodes");
        validatePredicate(cl.when, *this);
        for (const auto& [n, f] : cl.assigns) {
            for (NodeId r : f.references())
                if (r < 1 || static_cast<std::size_t>(r) > size())
                    throw ConfigError("clause '" + cl.id + "': field references node out of range");
        }
    }
    for (const auto& d : defaults)
        for (NodeId r : d.references())
            if (r < 1 || static_cast<std::size_t>(r) > size())
                throw ConfigError("default field references node out of range");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

bool evalPredicate(const Predicate& p, const State& x, const LatchState& latches,
                   const State* probe, const std::vector<char>* frozen) {
    switch (p.kind) {
        case Predicate::Kind::True:
            return true;
        case Predicate::Kind::Lt: {
            double v = x[p.node - 1];
            if (probe && v == p.value) v = (*probe)[p.node - 1];
            return v < p.value;
        }
        case Predicate::Kind::Gt: {
            double v = x[p.node - 1];
            if (probe && v == p.value) v = (*probe)[p.node - 1];
            return v > p.value;
        }
        case Predicate::Kind::At: {
            const auto& l = latches[p.node - 1];
            return l.has_value() && l->threshold == p.value;
        }
        case Predicate::Kind::CircDistLt:
            return circleDist(x[p.node - 1], x[p.node2 - 1]) < p.value;
        case Predicate::Kind::Meet:
            if (frozen && ((*frozen)[p.node - 1] || (*frozen)[p.node2 - 1])) return false;
            return std::fabs(x[p.node - 1] - x[p.node2 - 1]) <= p.value;
        case Predicate::Kind::And:
            for (const auto& k : p.kids)
                if (!evalPredicate(k, x, latches, probe, frozen)) return false;
            return true;
        case Predicate::Kind::Or:
            for (const auto& k : p.kids)
                if (evalPredicate(k, x, latches, probe, frozen)) return true;
            return false;
        case Predicate::Kind::Not:
            return !evalPredicate(p.kids[0], x, latches, probe, frozen);
    }
    return false;
}

EventEval evaluateEventMap(const AsyncNetwork& net, const State& x, const LatchState& latches,
                           const State* probe, const std::vector<char>* frozen) {
    EventEval out;
    State cx = net.clamped(x);
    State cp;
    const State* probePtr = nullptr;
    if (probe) {
        cp = net.clamped(*probe);
        probePtr = &cp;
    }
    for (const auto& cl : net.clauses) {
        if (evalPredicate(cl.when, cx, latches, probePtr, frozen)) {
            out.alpha = join(out.alpha, cl.alpha);
            out.activeIds.push_back(cl.id);
            out.active.push_back(&cl);
        }
    }
    return out;
}

FieldResolution resolveFields(const AsyncNetwork& net, const State& x, const LatchState& latches,
                              const State* probe, const std::vector<char>* frozen) {
    FieldResolution r;
    r.eval = evaluateEventMap(net, x, latches, probe, frozen);
    r.specs.assign(net.size(), nullptr);
    std::vector<const EventClause*> owner(net.size(), nullptr);
    for (const EventClause* cl : r.eval.active) {
        for (const auto& [n, f] : cl->assigns) {
            if (r.specs[n - 1]) {
                if (*r.specs[n - 1] != f)
                    throw ConflictingAssignment(n, owner[n - 1]->id, cl->id);
            } else {
                r.specs[n - 1] = &f;
                owner[n - 1] = cl;
            }
        }
    }
    for (std::size_t i = 0; i < net.size(); ++i)
        if (!r.specs[i]) r.specs[i] = &net.defaults[i];
    return r;
}

std::vector<double> FieldResolution::velocity(const AsyncNetwork& net, const State& x) const {
    std::vector<double> v(net.size());
    for (std::size_t i = 0; i < net.size(); ++i)
        v[i] = specs[i]->eval(static_cast<NodeId>(i + 1), x);
    return v;
}

std::vector<double> networkField(const AsyncNetwork& net, const State& x,
                                 const LatchState& latches) {
    return resolveFields(net, x, latches).velocity(net, x);
}

std::set<NodeId> clauseSupport(const std::vector<const EventClause*>& clauses) {
    std::set<NodeId> s;
    for (const EventClause* cl : clauses) {
        auto linked = linkedNodes(cl->alpha);
        s.insert(linked.begin(), linked.end());
        auto refs = cl->when.referencedNodes();
        s.insert(refs.begin(), refs.end());
    }
    return s;
}

std::set<NodeId> networkSupport(const AsyncNetwork& net) {
    std::vector<const EventClause*> ptrs;
    for (const auto& cl : net.clauses) ptrs.push_back(&cl);
    return clauseSupport(ptrs);
}

}  // namespace fan
