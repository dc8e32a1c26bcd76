#include "fan/factor.hpp"

#include "fan/errors.hpp"
#include "fan/geninit.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fan {

namespace {

/// Signed position of a value along a travel direction: ordering by key
/// orders stage intervals the way the node actually visits them.
double key(double v, double dir) { return v * dir; }

struct ChainEntry {
    std::size_t prim;  // index into prims
    double from, to, dir;
};

std::map<NodeId, std::vector<ChainEntry>> nodeChains(const std::vector<PrimitiveDecl>& prims) {
    std::map<NodeId, std::vector<ChainEntry>> chains;
    for (std::size_t p = 0; p < prims.size(); ++p) {
        for (const auto& [node, iv] : prims[p].stages) {
            if (!std::isfinite(iv.from) || !std::isfinite(iv.to) || iv.from == iv.to)
                throw ConfigError("primitive '" + prims[p].id + "': stage interval on node " +
                                  std::to_string(node) + " must be finite and non-degenerate");
            const double dir = iv.to > iv.from ? 1.0 : -1.0;
            chains[node].push_back({p, iv.from, iv.to, dir});
        }
    }
    for (auto& [node, chain] : chains) {
        const double dir = chain.front().dir;
        for (const ChainEntry& e : chain) {
            if (e.dir != dir)
                throw ConfigError("stage intervals on node " + std::to_string(node) +
                                  " disagree on travel direction");
        }
        std::sort(chain.begin(), chain.end(), [dir](const ChainEntry& a, const ChainEntry& b) {
            return key(a.from, dir) < key(b.from, dir);
        });
        for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
            if (key(chain[j].to, dir) > key(chain[j + 1].from, dir))
                throw ConfigError("stage intervals overlap on node " + std::to_string(node));
        }
    }
    return chains;
}

}  // namespace

std::set<NodeId> PrimitiveDecl::support() const {
    std::set<NodeId> out;
    for (const auto& [node, iv] : stages) out.insert(node);
    return out;
}

std::vector<std::string> FeedforwardDag::chain(NodeId node) const {
    const auto it = perNodeOrder.find(node);
    return it == perNodeOrder.end() ? std::vector<std::string>{} : it->second;
}

bool FeedforwardDag::reaches(const std::string& from, const std::string& to) const {
    std::vector<std::string> frontier{from};
    std::set<std::string> seen{from};
    while (!frontier.empty()) {
        const std::string u = frontier.back();
        frontier.pop_back();
        for (const auto& [s, t] : edges) {
            if (s != u || seen.count(t)) continue;
            if (t == to) return true;
            seen.insert(t);
            frontier.push_back(t);
        }
    }
    return false;
}

bool FeedforwardDag::validLayering(const std::vector<std::vector<std::string>>& alt) const {
    std::map<std::string, std::size_t> at;
    std::size_t total = 0;
    for (std::size_t l = 0; l < alt.size(); ++l) {
        for (const std::string& id : alt[l]) {
            if (at.count(id)) return false;  // repeated primitive
            at[id] = l;
            ++total;
        }
    }
    if (total != ids.size()) return false;
    for (const std::string& id : ids)
        if (!at.count(id)) return false;

    for (const std::string& u : ids) {
        for (const std::string& v : ids) {
            if (u != v && reaches(u, v) && at.at(u) >= at.at(v)) return false;
        }
    }
    for (const auto& layer : alt) {
        for (std::size_t i = 0; i < layer.size(); ++i) {
            for (std::size_t j = i + 1; j < layer.size(); ++j) {
                const std::set<NodeId>& a = supports.at(layer[i]);
                for (NodeId n : supports.at(layer[j]))
                    if (a.count(n)) return false;
            }
        }
    }
    return true;
}

FeedforwardDag partialOrder(const std::vector<PrimitiveDecl>& prims) {
    if (prims.empty()) throw ConfigError("partialOrder: no primitives declared");

    FeedforwardDag dag;
    std::map<std::string, std::size_t> index;
    for (std::size_t p = 0; p < prims.size(); ++p) {
        if (prims[p].id.empty()) throw ConfigError("partialOrder: primitive with empty id");
        if (index.count(prims[p].id))
            throw ConfigError("partialOrder: duplicate primitive id '" + prims[p].id + "'");
        if (prims[p].stages.size() < 2)
            throw ConfigError("primitive '" + prims[p].id +
                              "' must span at least two nodes");
        index[prims[p].id] = p;
        dag.ids.push_back(prims[p].id);
        dag.supports[prims[p].id] = prims[p].support();
    }

    const auto chains = nodeChains(prims);
    std::set<std::pair<std::size_t, std::size_t>> gen;
    for (const auto& [node, chain] : chains) {
        std::vector<std::string> order;
        for (const ChainEntry& e : chain) order.push_back(prims[e.prim].id);
        dag.perNodeOrder[node] = std::move(order);
        for (std::size_t j = 0; j + 1 < chain.size(); ++j)
            gen.insert({chain[j].prim, chain[j + 1].prim});
    }
    for (const auto& [u, v] : gen) dag.edges.emplace_back(prims[u].id, prims[v].id);

    // Kahn layering: a primitive sits one past its latest predecessor. A
    // leftover vertex means stage succession feeds back somewhere.
    std::vector<int> indeg(prims.size(), 0);
    for (const auto& [u, v] : gen) ++indeg[v];
    std::vector<std::size_t> depth(prims.size(), 0);
    std::vector<std::size_t> ready;
    for (std::size_t p = 0; p < prims.size(); ++p)
        if (indeg[p] == 0) ready.push_back(p);
    std::size_t placed = 0;
    std::vector<char> done(prims.size(), 0);
    while (!ready.empty()) {
        const std::size_t u = *std::min_element(ready.begin(), ready.end());
        ready.erase(std::find(ready.begin(), ready.end(), u));
        done[u] = 1;
        ++placed;
        for (const auto& [s, t] : gen) {
            if (s != u) continue;
            depth[t] = std::max(depth[t], depth[u] + 1);
            if (--indeg[t] == 0) ready.push_back(t);
        }
    }
    if (placed != prims.size()) {
        // Walk the stuck subgraph until a vertex repeats to name the cycle.
        std::vector<std::string> cycle;
        std::size_t u = 0;
        while (done[u]) ++u;
        std::set<std::size_t> seen;
        while (!seen.count(u)) {
            seen.insert(u);
            cycle.push_back(prims[u].id);
            for (const auto& [s, t] : gen) {
                if (s == u && !done[t]) {
                    u = t;
                    break;
                }
            }
        }
        cycle.push_back(prims[u].id);
        throw CyclicOrder(cycle);
    }

    dag.layers.resize(*std::max_element(depth.begin(), depth.end()) + 1);
    for (std::size_t p = 0; p < prims.size(); ++p) dag.layers[depth[p]].push_back(prims[p].id);

    // Hasse diagram: drop every relation that factors through a third vertex.
    for (const std::string& u : dag.ids) {
        for (const std::string& v : dag.ids) {
            if (u == v || !dag.reaches(u, v)) continue;
            bool direct = true;
            for (const std::string& w : dag.ids) {
                if (w != u && w != v && dag.reaches(u, w) && dag.reaches(w, v)) {
                    direct = false;
                    break;
                }
            }
            if (direct) dag.hasse.emplace_back(u, v);
        }
    }

    // Primitives sharing a node are chained, hence split across layers;
    // this cross-check guards the invariant all the same.
    for (const auto& layer : dag.layers) {
        for (std::size_t i = 0; i < layer.size(); ++i) {
            for (std::size_t j = i + 1; j < layer.size(); ++j) {
                for (NodeId n : dag.supports.at(layer[j])) {
                    if (dag.supports.at(layer[i]).count(n))
                        throw ConfigError("layer places overlapping primitives '" + layer[i] +
                                          "' and '" + layer[j] + "' together");
                }
            }
        }
    }
    return dag;
}

FactorizationResult factorize(const Fan& fan, const std::vector<PrimitiveDecl>& prims) {
    FactorizationResult result;
    result.dag = partialOrder(prims);

    std::map<std::string, const EventClause*> byId;
    for (const EventClause& c : fan.net.clauses) byId[c.id] = &c;

    // The declared clause lists must partition the network's clause list.
    std::map<std::string, std::string> owner;
    for (const PrimitiveDecl& p : prims) {
        for (const std::string& cid : p.clauses) {
            if (!byId.count(cid))
                throw ConfigError("primitive '" + p.id + "' claims unknown clause '" + cid +
                                  "'");
            if (owner.count(cid))
                throw ConfigError("clause '" + cid + "' claimed by both '" + owner[cid] +
                                  "' and '" + p.id + "'");
            owner[cid] = p.id;
            const std::set<NodeId> cs = clauseSupport({byId[cid]});
            for (NodeId n : cs) {
                if (!p.support().count(n))
                    throw ConfigError("clause '" + cid + "' touches node " +
                                      std::to_string(n) + " outside primitive '" + p.id +
                                      "'");
            }
        }
    }
    for (const EventClause& c : fan.net.clauses) {
        if (!owner.count(c.id))
            throw ConfigError("clause '" + c.id + "' is not claimed by any primitive");
    }

    // Per-node tiling: the declared stages must cover the transit interval
    // end to end, in guard direction.
    std::map<std::string, const PrimitiveDecl*> prim;
    for (const PrimitiveDecl& p : prims) prim[p.id] = &p;
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const NodeId node = static_cast<NodeId>(i + 1);
        const NodeGuard& g = fan.guards[i];
        const std::vector<std::string> chain = result.dag.chain(node);
        if (chain.empty()) continue;
        double reached = g.init;
        for (const std::string& pid : chain) {
            const StageInterval& iv = prim.at(pid)->stages.at(node);
            if (iv.from != reached)
                throw ConfigError("node " + std::to_string(node) + ": stage '" + pid +
                                  "' starts at " + std::to_string(iv.from) +
                                  " instead of the milestone " + std::to_string(reached));
            if (!g.degenerate() && (iv.to > iv.from ? 1.0 : -1.0) != g.dir())
                throw ConfigError("node " + std::to_string(node) + ": stage '" + pid +
                                  "' runs against the guard direction");
            reached = iv.to;
        }
        if (reached != g.term)
            throw ConfigError("node " + std::to_string(node) + ": stages stop at " +
                              std::to_string(reached) + " short of the termination guard");
    }

    // Assemble one basic factor per layer.
    std::vector<double> milestone(fan.size());
    for (std::size_t i = 0; i < fan.size(); ++i) milestone[i] = fan.guards[i].init;
    const std::size_t q = result.dag.layers.size();
    for (std::size_t l = 0; l < q; ++l) {
        Fan factor;
        factor.name = fan.name + "_layer" + std::to_string(l + 1);
        factor.net.spaces = fan.net.spaces;
        factor.net.defaults = fan.net.defaults;
        factor.guards.resize(fan.size());
        for (std::size_t i = 0; i < fan.size(); ++i) {
            const NodeId node = static_cast<NodeId>(i + 1);
            const StageInterval* active = nullptr;
            for (const std::string& pid : result.dag.layers[l]) {
                const auto it = prim.at(pid)->stages.find(node);
                if (it != prim.at(pid)->stages.end()) active = &it->second;
            }
            if (active) {
                factor.guards[i] = {active->from, active->to, 0.0};
                milestone[i] = active->to;
            } else if (result.dag.chain(node).empty() && l + 1 == q) {
                // Unclaimed nodes run their whole transit in the last factor.
                factor.guards[i] = {fan.guards[i].init, fan.guards[i].term, 0.0};
            } else {
                factor.guards[i] = {milestone[i], milestone[i], 0.0};
            }
        }
        for (const std::string& pid : result.dag.layers[l]) {
            for (const std::string& cid : prim.at(pid)->clauses)
                factor.net.clauses.push_back(*byId.at(cid));
        }
        factor.validate();
        result.factors.push_back(std::move(factor));
    }
    return result;
}

std::string ModularizationReport::toJson() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["failures"] = failures;
    j["max_state_dev"] = maxStateDev;
    j["max_time_dev"] = maxTimeDev;
    j["tol"] = tol;
    j["passed"] = passed;
    return j.dump(2);
}

ModularizationReport verifyModularization(const Fan& fan, const FactorizationResult& result,
                                          int nSamples, unsigned seed, double tol,
                                          double tSpread, double tMax,
                                          const IntegratorConfig& cfg) {
    ModularizationReport report;
    report.tol = tol;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> delay(0.0, tSpread);

    for (int s = 0; s < nSamples; ++s) {
        ++report.samples;
        const State X = sampleInitState(fan, rng);
        std::vector<double> T(fan.size());
        for (double& t : T) t = delay(rng);

        try {
            const Transition full = generalizedTransition(fan, X, T, tMax, cfg);
            State x = X;
            std::vector<double> t = T;
            for (const Fan& factor : result.factors) {
                const Transition step = generalizedTransition(factor, x, t, tMax, cfg);
                x = step.Y;
                t = step.S;
            }
            report.maxStateDev =
                std::max(report.maxStateDev, stateDistance(fan.net, x, full.Y));
            for (std::size_t i = 0; i < fan.size(); ++i)
                report.maxTimeDev = std::max(report.maxTimeDev, std::abs(t[i] - full.S[i]));
        } catch (const NotConnected&) {
            ++report.failures;
        } catch (const ZenoSuspected&) {
            ++report.failures;
        }
    }
    report.passed = report.failures == 0 && report.maxStateDev <= tol &&
                    report.maxTimeDev <= tol;
    return report;
}

std::string toDot(const FeedforwardDag& dag) {
    std::ostringstream os;
    os << "digraph feedforward {\n  rankdir=LR;\n  node [shape=box];\n";
    for (const std::string& id : dag.ids) {
        os << "  \"" << id << "\" [label=\"" << id << "\\n{";
        bool first = true;
        for (NodeId n : dag.supports.at(id)) {
            if (!first) os << ",";
            os << n;
            first = false;
        }
        os << "}\"];\n";
    }
    for (const auto& layer : dag.layers) {
        os << "  { rank=same;";
        for (const std::string& id : layer) os << " \"" << id << "\";";
        os << " }\n";
    }
    for (const auto& [u, v] : dag.hasse)
        os << "  \"" << u << "\" -> \"" << v << "\";\n";
    os << "}\n";
    return os.str();
}

}  // namespace fan
