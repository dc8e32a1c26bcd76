#include "fan/scenario.hpp"

#include "fan/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace fan {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ValidationError(field, why);
}

/// Reject unknown keys so typos surface as errors instead of silent defaults.
void checkKeys(const json& obj, const std::set<std::string>& allowed,
               const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(where + "." + key, "unknown field");
    }
}

const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where, "must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where + "." + key, "missing required field");
    return *it;
}

double asNumber(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "must be a number");
    return j.get<double>();
}

double numberAt(const json& obj, const char* key, const std::string& where) {
    return asNumber(member(obj, key, where), where + "." + std::string(key));
}

double numberOr(const json& obj, const char* key, const std::string& where,
                double fallback) {
    if (!obj.is_object()) fail(where, "must be an object");
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : asNumber(*it, where + "." + std::string(key));
}

std::string stringAt(const json& obj, const char* key, const std::string& where) {
    const json& j = member(obj, key, where);
    if (!j.is_string()) fail(where + "." + std::string(key), "must be a string");
    return j.get<std::string>();
}

int intAt(const json& obj, const char* key, const std::string& where) {
    const json& j = member(obj, key, where);
    if (!j.is_number_integer()) fail(where + "." + std::string(key), "must be an integer");
    return j.get<int>();
}

/// A node reference inside predicates/fields/edges: integer in [1, k].
NodeId nodeRef(const json& j, const std::string& where, std::size_t k) {
    if (!j.is_number_integer()) fail(where, "must be an integer node id");
    const long long v = j.get<long long>();
    if (v < 1 || v > static_cast<long long>(k))
        fail(where, "node id " + std::to_string(v) + " out of range 1.." + std::to_string(k));
    return static_cast<NodeId>(v);
}

/// Object keys naming nodes ("1", "2", ...) decoded back to ids.
NodeId nodeKey(const std::string& key, const std::string& where, std::size_t k) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
    if (ec != std::errc{} || ptr != key.data() + key.size())
        fail(where + "." + key, "key must be a node id");
    if (v < 1 || v > static_cast<int>(k))
        fail(where + "." + key, "node id out of range 1.." + std::to_string(k));
    return v;
}

FieldSpec parseField(const json& j, const std::string& where, std::size_t k) {
    if (!j.is_object()) fail(where, "must be a field object");
    const std::string kind = stringAt(j, "kind", where);
    if (kind == "zero") {
        checkKeys(j, {"kind"}, where);
        return FieldSpec::zero();
    }
    if (kind == "constant") {
        checkKeys(j, {"kind", "value"}, where);
        return FieldSpec::constant(numberAt(j, "value", where));
    }
    if (kind == "kuramoto") {
        checkKeys(j, {"kind", "omega", "kappa", "partner"}, where);
        return FieldSpec::kuramoto(numberAt(j, "omega", where), numberAt(j, "kappa", where),
                                   nodeRef(member(j, "partner", where), where + ".partner", k));
    }
    if (kind == "affine") {
        checkKeys(j, {"kind", "terms", "offset"}, where);
        const json& terms = member(j, "terms", where);
        if (!terms.is_array()) fail(where + ".terms", "must be an array");
        std::vector<std::pair<NodeId, double>> parsed;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string at = where + ".terms[" + std::to_string(i) + "]";
            const json& term = terms[i];
            if (!term.is_array() || term.size() != 2) fail(at, "must be a [node, coeff] pair");
            parsed.emplace_back(nodeRef(term[0], at + "[0]", k), asNumber(term[1], at + "[1]"));
        }
        return FieldSpec::affine(std::move(parsed), numberOr(j, "offset", where, 0.0));
    }
    fail(where + ".kind", "unknown field kind '" + kind + "'");
}

Predicate parsePredicate(const json& j, const std::string& where, std::size_t k) {
    if (!j.is_object()) fail(where, "must be a predicate object");
    const std::string type = stringAt(j, "type", where);
    if (type == "true") {
        checkKeys(j, {"type"}, where);
        return Predicate::always();
    }
    if (type == "lt" || type == "gt" || type == "at") {
        checkKeys(j, {"type", "node", "value"}, where);
        const NodeId n = nodeRef(member(j, "node", where), where + ".node", k);
        const double c = numberAt(j, "value", where);
        if (type == "lt") return Predicate::lt(n, c);
        if (type == "gt") return Predicate::gt(n, c);
        return Predicate::at(n, c);
    }
    if (type == "circDistLt") {
        checkKeys(j, {"type", "a", "b", "eps"}, where);
        return Predicate::circDistLt(nodeRef(member(j, "a", where), where + ".a", k),
                                     nodeRef(member(j, "b", where), where + ".b", k),
                                     numberAt(j, "eps", where));
    }
    if (type == "meet") {
        checkKeys(j, {"type", "a", "b", "tol"}, where);
        return Predicate::meet(nodeRef(member(j, "a", where), where + ".a", k),
                               nodeRef(member(j, "b", where), where + ".b", k),
                               numberOr(j, "tol", where, 1e-9));
    }
    if (type == "and" || type == "or") {
        checkKeys(j, {"type", "kids"}, where);
        const json& kids = member(j, "kids", where);
        if (!kids.is_array()) fail(where + ".kids", "must be an array");
        std::vector<Predicate> parsed;
        for (std::size_t i = 0; i < kids.size(); ++i)
            parsed.push_back(
                parsePredicate(kids[i], where + ".kids[" + std::to_string(i) + "]", k));
        return type == "and" ? Predicate::conj(std::move(parsed))
                             : Predicate::disj(std::move(parsed));
    }
    if (type == "not") {
        checkKeys(j, {"type", "kid"}, where);
        return Predicate::negate(parsePredicate(member(j, "kid", where), where + ".kid", k));
    }
    fail(where + ".type", "unknown predicate type '" + type + "'");
}

json fieldToJson(const FieldSpec& f) {
    json j;
    switch (f.kind) {
        case FieldSpec::Kind::Zero:
            j["kind"] = "zero";
            break;
        case FieldSpec::Kind::Constant:
            j["kind"] = "constant";
            j["value"] = f.value;
            break;
        case FieldSpec::Kind::Kuramoto:
            j["kind"] = "kuramoto";
            j["omega"] = f.omega;
            j["kappa"] = f.kappa;
            j["partner"] = f.partner;
            break;
        case FieldSpec::Kind::Affine: {
            j["kind"] = "affine";
            json terms = json::array();
            for (const auto& [node, coeff] : f.terms) terms.push_back({node, coeff});
            j["terms"] = std::move(terms);
            j["offset"] = f.offset;
            break;
        }
    }
    return j;
}

json predicateToJson(const Predicate& p) {
    json j;
    switch (p.kind) {
        case Predicate::Kind::True:
            j["type"] = "true";
            break;
        case Predicate::Kind::Lt:
        case Predicate::Kind::Gt:
        case Predicate::Kind::At:
            j["type"] = p.kind == Predicate::Kind::Lt   ? "lt"
                        : p.kind == Predicate::Kind::Gt ? "gt"
                                                        : "at";
            j["node"] = p.node;
            j["value"] = p.value;
            break;
        case Predicate::Kind::CircDistLt:
            j["type"] = "circDistLt";
            j["a"] = p.node;
            j["b"] = p.node2;
            j["eps"] = p.value;
            break;
        case Predicate::Kind::Meet:
            j["type"] = "meet";
            j["a"] = p.node;
            j["b"] = p.node2;
            j["tol"] = p.value;
            break;
        case Predicate::Kind::And:
        case Predicate::Kind::Or: {
            j["type"] = p.kind == Predicate::Kind::And ? "and" : "or";
            json kids = json::array();
            for (const Predicate& kid : p.kids) kids.push_back(predicateToJson(kid));
            j["kids"] = std::move(kids);
            break;
        }
        case Predicate::Kind::Not:
            j["type"] = "not";
            j["kid"] = predicateToJson(p.kids.front());
            break;
    }
    return j;
}

Scenario fromJson(const json& root) {
    if (!root.is_object()) fail("scenario", "top level must be an object");
    checkKeys(root,
              {"name", "nodes", "defaultFields", "events", "primitives", "sim",
               "startTimes"},
              "scenario");

    Scenario s;
    s.fan.name = stringAt(root, "name", "scenario");
    if (s.fan.name.empty()) fail("scenario.name", "must be non-empty");

    const json& nodes = member(root, "nodes", "scenario");
    if (!nodes.is_array() || nodes.empty()) fail("scenario.nodes", "must be a non-empty array");
    const std::size_t k = nodes.size();

    s.fan.net.spaces.assign(k, PhaseSpace::Line);
    s.fan.net.defaults.assign(k, FieldSpec::zero());
    s.fan.guards.assign(k, NodeGuard{});
    s.initialState.assign(k, 0.0);

    std::set<NodeId> seen;
    for (std::size_t i = 0; i < k; ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const json& n = nodes[i];
        if (!n.is_object()) fail(where, "must be an object");
        checkKeys(n,
                  {"id", "space", "initGuard", "termGuard", "margin", "initialState",
                   "clamp"},
                  where);
        const int id = intAt(n, "id", where);
        if (id < 1 || id > static_cast<int>(k))
            fail(where + ".id", "node ids must be exactly 1.." + std::to_string(k));
        if (!seen.insert(id).second) fail(where + ".id", "duplicate node id");

        const std::string space = stringAt(n, "space", where);
        if (space != "line" && space != "circle")
            fail(where + ".space", "must be \"line\" or \"circle\"");
        s.fan.net.spaces[id - 1] =
            space == "line" ? PhaseSpace::Line : PhaseSpace::Circle;

        NodeGuard g;
        g.init = numberAt(n, "initGuard", where);
        g.term = numberAt(n, "termGuard", where);
        g.margin = numberOr(n, "margin", where, 0.0);
        if (g.margin < 0) fail(where + ".margin", "must be >= 0");
        s.fan.guards[id - 1] = g;
        s.initialState[id - 1] = numberOr(n, "initialState", where, g.init);

        if (n.contains("clamp")) {
            const std::string cw = where + ".clamp";
            const json& cj = n["clamp"];
            if (!cj.is_object()) fail(cw, "must be an object");
            checkKeys(cj, {"lo", "hi", "loRep", "hiRep"}, cw);
            NodeClamp clamp;
            clamp.lo = numberAt(cj, "lo", cw);
            clamp.hi = numberAt(cj, "hi", cw);
            clamp.loRep = numberAt(cj, "loRep", cw);
            clamp.hiRep = numberAt(cj, "hiRep", cw);
            if (clamp.lo > clamp.hi) fail(cw, "lo must be <= hi");
            if (s.fan.net.clamp.empty()) s.fan.net.clamp.assign(k, std::nullopt);
            s.fan.net.clamp[id - 1] = clamp;
        }
    }

    const json& fields = member(root, "defaultFields", "scenario");
    if (!fields.is_object()) fail("scenario.defaultFields", "must be an object");
    std::set<NodeId> defaulted;
    for (const auto& [key, value] : fields.items()) {
        const NodeId id = nodeKey(key, "scenario.defaultFields", k);
        defaulted.insert(id);
        s.fan.net.defaults[id - 1] =
            parseField(value, "scenario.defaultFields." + key, k);
    }
    for (std::size_t i = 1; i <= k; ++i) {
        if (!defaulted.count(static_cast<NodeId>(i)))
            fail("scenario.defaultFields." + std::to_string(i), "missing required field");
    }

    if (root.contains("events")) {
        const json& events = root["events"];
        if (!events.is_array()) fail("scenario.events", "must be an array");
        for (std::size_t e = 0; e < events.size(); ++e) {
            const std::string where = "events[" + std::to_string(e) + "]";
            const json& ev = events[e];
            if (!ev.is_object()) fail(where, "must be an object");
            checkKeys(ev, {"id", "edges", "when", "assigns"}, where);

            EventClause clause;
            clause.id = stringAt(ev, "id", where);
            const json& edges = member(ev, "edges", where);
            if (!edges.is_array()) fail(where + ".edges", "must be an array");
            std::vector<std::pair<NodeId, NodeId>> parsed;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const std::string at = where + ".edges[" + std::to_string(i) + "]";
                const json& edge = edges[i];
                if (!edge.is_array() || edge.size() != 2)
                    fail(at, "must be a [source, target] pair");
                if (!edge[0].is_number_integer()) fail(at + "[0]", "must be an integer");
                const long long src = edge[0].get<long long>();
                if (src < 0 || src > static_cast<long long>(k))
                    fail(at + "[0]", "source out of range 0.." + std::to_string(k));
                parsed.emplace_back(static_cast<NodeId>(src),
                                    nodeRef(edge[1], at + "[1]", k));
            }
            clause.alpha = ConnectionStructure(std::move(parsed));
            clause.when = parsePredicate(member(ev, "when", where), where + ".when", k);
            const json& assigns = member(ev, "assigns", where);
            if (!assigns.is_object()) fail(where + ".assigns", "must be an object");
            for (const auto& [key, value] : assigns.items()) {
                const NodeId id = nodeKey(key, where + ".assigns", k);
                clause.assigns[id] = parseField(value, where + ".assigns." + key, k);
            }
            s.fan.net.clauses.push_back(std::move(clause));
        }
    }

    if (root.contains("primitives")) {
        const json& prims = root["primitives"];
        if (!prims.is_array()) fail("scenario.primitives", "must be an array");
        std::set<std::string> clauseIds;
        for (const EventClause& c : s.fan.net.clauses) clauseIds.insert(c.id);
        for (std::size_t p = 0; p < prims.size(); ++p) {
            const std::string where = "primitives[" + std::to_string(p) + "]";
            const json& pj = prims[p];
            if (!pj.is_object()) fail(where, "must be an object");
            checkKeys(pj, {"id", "clauses", "stages"}, where);

            PrimitiveDecl decl;
            decl.id = stringAt(pj, "id", where);
            const json& clauses = member(pj, "clauses", where);
            if (!clauses.is_array()) fail(where + ".clauses", "must be an array");
            for (std::size_t i = 0; i < clauses.size(); ++i) {
                const std::string at = where + ".clauses[" + std::to_string(i) + "]";
                if (!clauses[i].is_string()) fail(at, "must be a clause id string");
                const std::string cid = clauses[i].get<std::string>();
                if (!clauseIds.count(cid)) fail(at, "references unknown event '" + cid + "'");
                decl.clauses.push_back(cid);
            }
            const json& stages = member(pj, "stages", where);
            if (!stages.is_object()) fail(where + ".stages", "must be an object");
            for (const auto& [key, value] : stages.items()) {
                const NodeId id = nodeKey(key, where + ".stages", k);
                const std::string at = where + ".stages." + key;
                if (!value.is_array() || value.size() != 2)
                    fail(at, "must be a [from, to] pair");
                decl.stages[id] = {asNumber(value[0], at + "[0]"),
                                   asNumber(value[1], at + "[1]")};
            }
            s.primitives.push_back(std::move(decl));
        }
    }

    if (root.contains("sim")) {
        const json& sim = root["sim"];
        if (!sim.is_object()) fail("scenario.sim", "must be an object");
        checkKeys(sim,
                  {"tMax", "hMax", "tEventLocalize", "stateTol", "latchEps", "zenoLimit",
                   "stallWindow", "recurrenceTol"},
                  "scenario.sim");
        s.sim.tMax = numberOr(sim, "tMax", "scenario.sim", s.sim.tMax);
        s.sim.cfg.hMax = numberOr(sim, "hMax", "scenario.sim", s.sim.cfg.hMax);
        s.sim.cfg.tEventLocalize =
            numberOr(sim, "tEventLocalize", "scenario.sim", s.sim.cfg.tEventLocalize);
        s.sim.cfg.stateTol = numberOr(sim, "stateTol", "scenario.sim", s.sim.cfg.stateTol);
        s.sim.cfg.latchEps = numberOr(sim, "latchEps", "scenario.sim", s.sim.cfg.latchEps);
        if (sim.contains("zenoLimit")) s.sim.cfg.zenoLimit = intAt(sim, "zenoLimit", "scenario.sim");
        s.sim.stallWindow = numberOr(sim, "stallWindow", "scenario.sim", s.sim.stallWindow);
        s.sim.recurrenceTol =
            numberOr(sim, "recurrenceTol", "scenario.sim", s.sim.recurrenceTol);
        if (s.sim.tMax <= 0) fail("scenario.sim.tMax", "must be > 0");
        if (s.sim.cfg.hMax <= 0) fail("scenario.sim.hMax", "must be > 0");
        if (s.sim.cfg.zenoLimit < 1) fail("scenario.sim.zenoLimit", "must be >= 1");
    }

    if (root.contains("startTimes")) {
        const json& st = root["startTimes"];
        if (!st.is_array() || st.size() != k)
            fail("scenario.startTimes", "must be an array of " + std::to_string(k) +
                                            " numbers");
        std::vector<double> T(k);
        for (std::size_t i = 0; i < k; ++i) {
            T[i] = asNumber(st[i], "scenario.startTimes[" + std::to_string(i) + "]");
            if (T[i] < 0)
                fail("scenario.startTimes[" + std::to_string(i) + "]", "must be >= 0");
        }
        s.startTimes = std::move(T);
    }

    s.fan.validate();
    return s;
}

}  // namespace

Scenario parseScenario(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
    return fromJson(root);
}

Scenario loadScenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseScenario(buf.str(), path);
}

std::string serializeScenario(const Scenario& s) {
    json root;
    root["name"] = s.fan.name;

    json nodes = json::array();
    for (std::size_t i = 0; i < s.fan.size(); ++i) {
        json n;
        n["id"] = static_cast<int>(i + 1);
        n["space"] = s.fan.net.spaces[i] == PhaseSpace::Line ? "line" : "circle";
        n["initGuard"] = s.fan.guards[i].init;
        n["termGuard"] = s.fan.guards[i].term;
        n["margin"] = s.fan.guards[i].margin;
        n["initialState"] = s.initialState.size() > i ? s.initialState[i]
                                                      : s.fan.guards[i].init;
        if (s.fan.net.clamp.size() > i && s.fan.net.clamp[i]) {
            const NodeClamp& c = *s.fan.net.clamp[i];
            n["clamp"] = {{"lo", c.lo}, {"hi", c.hi}, {"loRep", c.loRep},
                          {"hiRep", c.hiRep}};
        }
        nodes.push_back(std::move(n));
    }
    root["nodes"] = std::move(nodes);

    json fields;
    for (std::size_t i = 0; i < s.fan.size(); ++i)
        fields[std::to_string(i + 1)] = fieldToJson(s.fan.net.defaults[i]);
    root["defaultFields"] = std::move(fields);

    json events = json::array();
    for (const EventClause& c : s.fan.net.clauses) {
        json ev;
        ev["id"] = c.id;
        json edges = json::array();
        for (const auto& [src, dst] : c.alpha.edges) edges.push_back({src, dst});
        ev["edges"] = std::move(edges);
        ev["when"] = predicateToJson(c.when);
        json assigns;
        for (const auto& [node, field] : c.assigns)
            assigns[std::to_string(node)] = fieldToJson(field);
        ev["assigns"] = std::move(assigns);
        events.push_back(std::move(ev));
    }
    root["events"] = std::move(events);

    if (!s.primitives.empty()) {
        json prims = json::array();
        for (const PrimitiveDecl& p : s.primitives) {
            json pj;
            pj["id"] = p.id;
            pj["clauses"] = p.clauses;
            json stages;
            for (const auto& [node, iv] : p.stages)
                stages[std::to_string(node)] = {iv.from, iv.to};
            pj["stages"] = std::move(stages);
            prims.push_back(std::move(pj));
        }
        root["primitives"] = std::move(prims);
    }

    json sim;
    sim["tMax"] = s.sim.tMax;
    sim["hMax"] = s.sim.cfg.hMax;
    sim["tEventLocalize"] = s.sim.cfg.tEventLocalize;
    sim["stateTol"] = s.sim.cfg.stateTol;
    sim["latchEps"] = s.sim.cfg.latchEps;
    sim["zenoLimit"] = s.sim.cfg.zenoLimit;
    sim["stallWindow"] = s.sim.stallWindow;
    sim["recurrenceTol"] = s.sim.recurrenceTol;
    root["sim"] = std::move(sim);

    if (s.startTimes) root["startTimes"] = *s.startTimes;

    return root.dump(2) + "\n";
}

}  // namespace fan
