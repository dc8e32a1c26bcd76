#pragma once

// Core model of an asynchronous network: per-node one-dimensional phase
// spaces (line or circle), default vector fields, and an event map given as
// a list of clauses. Each clause pairs a connection structure (edges from
// the constraining node 0 or from influencing nodes into constrained nodes)
// with an activation predicate and a field assignment for exactly the nodes
// the connection structure links.
//
// Node ids are 1-based; id 0 is reserved for the constraining node and may
// only appear as an edge source.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fan/errors.hpp"

namespace fan {

using NodeId = int;                 ///< 1-based node index (0 = constraining node)
using State = std::vector<double>;  ///< one coordinate per node, index = id - 1

// ---------------------------------------------------------------------------
// Phase spaces
// ---------------------------------------------------------------------------

enum class PhaseSpace { Line, Circle };

/// Wrap a circle coordinate into [0, 1).
double wrapCircle(double x);

/// Distance on the unit circle (coordinates mod 1), in [0, 0.5].
double circleDist(double a, double b);

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// Closed registry of per-node scalar field shapes.
struct FieldSpec {
    enum class Kind { Zero, Constant, Kuramoto, Affine };
    Kind kind = Kind::Zero;

    double value = 0.0;  ///< Constant

    double omega = 0.0;  ///< Kuramoto intrinsic frequency
    double kappa = 0.0;  ///< Kuramoto coupling gain
    NodeId partner = 0;  ///< Kuramoto partner node

    std::vector<std::pair<NodeId, double>> terms;  ///< Affine: coeff * x_node
    double offset = 0.0;                           ///< Affine constant term

    static FieldSpec zero();
    static FieldSpec constant(double v);
    static FieldSpec kuramoto(double omega, double kappa, NodeId partner);
    static FieldSpec affine(std::vector<std::pair<NodeId, double>> terms, double offset);

    /// Velocity of `self` at state X under this field.
    double eval(NodeId self, const State& x) const;

    /// True when the velocity cannot depend on the state.
    bool isConstant() const { return kind == Kind::Zero || kind == Kind::Constant; }

    /// Nodes other than `self` whose coordinates enter the velocity.
    std::vector<NodeId> references() const;

    bool operator==(const FieldSpec& o) const;
    bool operator!=(const FieldSpec& o) const { return !(*this == o); }
};

// ---------------------------------------------------------------------------
// Connection structures
// ---------------------------------------------------------------------------

/// A set of directed edges (source, target); source may be 0 (constraining
/// node), target is a regular node. Kept sorted and deduplicated.
struct ConnectionStructure {
    std::vector<std::pair<NodeId, NodeId>> edges;

    ConnectionStructure() = default;
    explicit ConnectionStructure(std::vector<std::pair<NodeId, NodeId>> e);

    bool empty() const { return edges.empty(); }
    bool operator==(const ConnectionStructure& o) const { return edges == o.edges; }
    bool operator!=(const ConnectionStructure& o) const { return !(*this == o); }
};

/// Join of connection structures: edge-set union.
ConnectionStructure join(const ConnectionStructure& a, const ConnectionStructure& b);

/// Nodes linked by a connection structure: every node id >= 1 appearing as an
/// edge endpoint (the constraining node 0 never counts).
std::set<NodeId> linkedNodes(const ConnectionStructure& alpha);

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

/// Activation condition tree. Leaves compare node coordinates against
/// thresholds; `At` and `Meet` leaves have capture semantics (see semiflow):
/// `At(node, c)` is true iff the node is currently held exactly at c, and
/// `Meet(a, b)` is true iff the two line coordinates coincide (within a
/// hair's breadth, which after a capture snap is exact).
struct Predicate {
    enum class Kind { True, Lt, Gt, At, CircDistLt, Meet, And, Or, Not };
    Kind kind = Kind::True;

    NodeId node = 0;   ///< Lt/Gt/At subject; Meet/CircDistLt first node
    NodeId node2 = 0;  ///< Meet/CircDistLt second node
    double value = 0.0;  ///< threshold (Lt/Gt/At), eps (CircDistLt), tolerance (Meet)

    std::vector<Predicate> kids;  ///< And/Or children; Not has exactly one

    static Predicate always();
    static Predicate lt(NodeId n, double c);
    static Predicate gt(NodeId n, double c);
    static Predicate at(NodeId n, double c);
    static Predicate circDistLt(NodeId a, NodeId b, double eps);
    static Predicate meet(NodeId a, NodeId b, double tol = 1e-9);
    static Predicate conj(std::vector<Predicate> kids);
    static Predicate disj(std::vector<Predicate> kids);
    static Predicate negate(Predicate kid);

    /// All nodes whose coordinates the predicate reads.
    std::set<NodeId> referencedNodes() const;
};

// ---------------------------------------------------------------------------
// Latches
// ---------------------------------------------------------------------------

/// A node held exactly at a threshold by an active zero-field clause.
struct Latch {
    double threshold = 0.0;
    bool operator==(const Latch& o) const { return threshold == o.threshold; }
};

/// Per-node hold state; index = node id - 1. Nodes are unlatched by default.
using LatchState = std::vector<std::optional<Latch>>;

/// All-unlatched state for k nodes.
LatchState noLatches(std::size_t k);

// ---------------------------------------------------------------------------
// Event clauses and the network
// ---------------------------------------------------------------------------

/// One clause of the event map: when `when` holds, connection structure
/// `alpha` is active and `assigns` overrides the fields of exactly the
/// linked nodes.
struct EventClause {
    std::string id;
    ConnectionStructure alpha;
    Predicate when;
    std::map<NodeId, FieldSpec> assigns;
};

/// Box clamp used by the core transform: coordinates outside [lo, hi] are
/// replaced by the matching representative before predicates are evaluated.
struct NodeClamp {
    double lo = 0.0, hi = 0.0;
    double loRep = 0.0, hiRep = 0.0;
};

struct AsyncNetwork {
    std::vector<PhaseSpace> spaces;              ///< per node
    std::vector<FieldSpec> defaults;             ///< per node
    std::vector<EventClause> clauses;
    std::vector<std::optional<NodeClamp>> clamp; ///< empty or per node (core transform)

    std::size_t size() const { return spaces.size(); }

    /// Validates invariants: ids unique and non-empty, edge endpoints in
    /// range, assigns covering exactly the linked nodes, thresholds finite,
    /// directional atoms only on line nodes, circle atoms only on circle
    /// nodes. Throws ConfigError on violation.
    void validate() const;

    /// Apply the clamp (if any) to a state.
    State clamped(const State& x) const;
};

/// Result of evaluating the event map at a state.
struct EventEval {
    ConnectionStructure alpha;             ///< join of all active clause structures
    std::vector<std::string> activeIds;    ///< ids of active clauses, in declaration order
    std::vector<const EventClause*> active;
};

/// Evaluate one predicate at a (clamped) state with the given latch set.
/// `probe` optionally supplies a right-limit state used only to disambiguate
/// strict comparisons at coordinates sitting exactly on a threshold. `frozen`
/// optionally marks pre-start nodes (generalized initialization): they can
/// never satisfy a meet atom (they are not on the network yet), while their
/// literal coordinates still participate in inequality atoms.
bool evalPredicate(const Predicate& p, const State& x, const LatchState& latches,
                   const State* probe = nullptr, const std::vector<char>* frozen = nullptr);

/// Event map: join of the connection structures of all active clauses.
EventEval evaluateEventMap(const AsyncNetwork& net, const State& x, const LatchState& latches,
                           const State* probe = nullptr,
                           const std::vector<char>* frozen = nullptr);

/// Per-node resolved field at a state: assigned spec where a clause links the
/// node, default spec elsewhere. Throws ConflictingAssignment when two active
/// clauses disagree on a node.
struct FieldResolution {
    EventEval eval;
    std::vector<const FieldSpec*> specs;  ///< per node
    std::vector<double> velocity(const AsyncNetwork& net, const State& x) const;
};

FieldResolution resolveFields(const AsyncNetwork& net, const State& x, const LatchState& latches,
                              const State* probe = nullptr,
                              const std::vector<char>* frozen = nullptr);

/// Network field value (weak input consistency): assigned clause fields on
/// linked nodes, defaults elsewhere.
std::vector<double> networkField(const AsyncNetwork& net, const State& x,
                                 const LatchState& latches);

/// Union of linked and referenced nodes over a set of clauses: the support
/// of the event structure (influencers included, so it can exceed the set of
/// linked nodes).
std::set<NodeId> clauseSupport(const std::vector<const EventClause*>& clauses);
std::set<NodeId> networkSupport(const AsyncNetwork& net);

}  // namespace fan
