#pragma once

// Error taxonomy for the asynchronous-network library. All conditions are
// reported as exceptions carrying enough payload for a CLI to render a
// useful diagnostic (offending nodes, sink states, witness cycles).

#include <stdexcept>
#include <string>
#include <vector>

namespace fan {

/// Two simultaneously active clauses assign different fields to one node.
struct ConflictingAssignment : std::runtime_error {
    int node;
    std::string clauseA, clauseB;
    ConflictingAssignment(int node_, std::string a, std::string b)
        : std::runtime_error("conflicting field assignment for node " + std::to_string(node_) +
                             " between clauses '" + a + "' and '" + b + "'"),
          node(node_), clauseA(std::move(a)), clauseB(std::move(b)) {}
};

/// A transit did not complete: some nodes never reached their termination guard.
struct NotConnected : std::runtime_error {
    std::vector<int> missing;  ///< nodes whose termination guard was never hit
    NotConnected(std::string what, std::vector<int> missing_)
        : std::runtime_error(std::move(what)), missing(std::move(missing_)) {}
};

/// A transit ran into a state where every node velocity vanished off the
/// termination set: the run can never complete.
struct DeadlockDetected : NotConnected {
    std::vector<double> sink;  ///< frozen state
    double entryTime;          ///< time the all-zero-velocity regime began
    DeadlockDetected(std::vector<int> missing_, std::vector<double> sink_, double entry)
        : NotConnected("deadlock: all node velocities vanished at t=" + std::to_string(entry) +
                       " with unreached termination guards",
                       std::move(missing_)),
          sink(std::move(sink_)), entryTime(entry) {}
};

/// Event localization found more re-evaluations inside one localization
/// window than the configured bound; the run is suspected to chatter.
struct ZenoSuspected : std::runtime_error {
    double t;
    explicit ZenoSuspected(double t_)
        : std::runtime_error("event cascade exceeded the Zeno bound near t=" + std::to_string(t_)),
          t(t_) {}
};

/// Algebraic operations require matching node sets, phase spaces and defaults.
struct IncompatibleNetworks : std::runtime_error {
    explicit IncompatibleNetworks(const std::string& why)
        : std::runtime_error("incompatible networks: " + why) {}
};

/// Amalgamation precondition failed (overlapping supports or region mismatch).
struct NotIndependent : std::runtime_error {
    explicit NotIndependent(const std::string& why)
        : std::runtime_error("networks are not independent: " + why) {}
};

/// Concatenation precondition failed (stage guards do not chain).
struct NotPreceding : std::runtime_error {
    explicit NotPreceding(const std::string& why)
        : std::runtime_error("stage precedence does not hold: " + why) {}
};

/// Declared primitive stage order is cyclic or self-contradictory.
struct CyclicOrder : std::runtime_error {
    std::vector<std::string> cycle;  ///< witness: primitive ids forming a cycle
    explicit CyclicOrder(std::vector<std::string> cycle_)
        : std::runtime_error("primitive order is cyclic"), cycle(std::move(cycle_)) {}
};

/// Scenario/config parsing problem.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& why) : std::runtime_error("config: " + why) {}
};

/// Scenario input is not readable or not syntactically valid JSON.
struct ParseError : ConfigError {
    explicit ParseError(const std::string& why) : ConfigError("parse: " + why) {}
};

/// Scenario JSON is well-formed but violates the schema. `field` is the
/// dotted path of the offending entry (e.g. "nodes[2].termGuard").
struct ValidationError : ConfigError {
    std::string field;
    ValidationError(std::string field_, const std::string& why)
        : ConfigError(field_ + ": " + why), field(std::move(field_)) {}
};

}  // namespace fan
