#pragma once

#include "fan/fan.hpp"
#include "fan/semiflow.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fan {

/// The segment of a node's transit owned by one primitive: the node enters
/// at `from` and leaves at `to` (which may be below `from` for a leftward
/// node).
struct StageInterval {
    double from = 0.0;
    double to = 0.0;
};

/// A declared primitive event: which nodes it spans, which clauses realize
/// it, and where along each supported node's transit it takes place.
struct PrimitiveDecl {
    std::string id;
    std::map<NodeId, StageInterval> stages;
    std::vector<std::string> clauses;

    std::set<NodeId> support() const;
};

/// The precedence structure of a family of primitives: the order generated
/// by per-node stage succession, its Hasse diagram, the earliest layering,
/// and the per-node chains.
struct FeedforwardDag {
    std::vector<std::string> ids;                            ///< declaration order
    std::map<std::string, std::set<NodeId>> supports;
    std::vector<std::pair<std::string, std::string>> edges;  ///< per-node consecutive pairs
    std::vector<std::pair<std::string, std::string>> hasse;  ///< transitive reduction
    std::vector<std::vector<std::string>> layers;            ///< earliest placement
    std::map<NodeId, std::vector<std::string>> perNodeOrder;

    /// q(i): the primitives containing node i, in stage order (empty when
    /// the node belongs to none).
    std::vector<std::string> chain(NodeId node) const;

    /// True iff `to` is reachable from `from` in the order (strictly).
    bool reaches(const std::string& from, const std::string& to) const;

    /// A layering is valid iff it partitions the primitives, never places a
    /// primitive at or before one of its predecessors, and keeps supports
    /// within each layer pairwise disjoint.
    bool validLayering(const std::vector<std::vector<std::string>>& alt) const;
};

/// Build the feedforward order of a primitive family. Throws ConfigError on
/// malformed declarations (duplicate ids, singleton supports, overlapping
/// stage intervals) and CyclicOrder when stage succession feeds back.
FeedforwardDag partialOrder(const std::vector<PrimitiveDecl>& prims);

/// A layered factorization: basic factor j amalgamates the layer-j
/// primitives; a node outside the layer passes through at the milestone its
/// earlier stages have reached. Nodes claimed by no primitive run their full
/// transit in the last factor.
struct FactorizationResult {
    FeedforwardDag dag;
    std::vector<Fan> factors;
};

/// Factor a network along its declared primitives. Validates that the
/// declared clauses partition the network's clause list, that each clause
/// stays within its primitive's support, and that each node's stage
/// intervals tile its transit interval in guard direction.
FactorizationResult factorize(const Fan& fan, const std::vector<PrimitiveDecl>& prims);

struct ModularizationReport {
    int samples = 0;
    int failures = 0;         ///< samples where a transit failed outright
    double maxStateDev = 0.0;
    double maxTimeDev = 0.0;
    double tol = 0.0;
    bool passed = false;

    std::string toJson() const;
};

/// Numerically compare the network's generalized transition against the
/// factor-by-factor composition, threading each factor's arrival state and
/// passage times into the next, over random start times in [0, tSpread]^k.
ModularizationReport verifyModularization(const Fan& fan, const FactorizationResult& result,
                                          int nSamples, unsigned seed, double tol,
                                          double tSpread = 3.0, double tMax = 200.0,
                                          const IntegratorConfig& cfg = {});

/// Graphviz rendering of the Hasse diagram, one rank per layer, vertices
/// labelled with their supports.
std::string toDot(const FeedforwardDag& dag);

}  // namespace fan
