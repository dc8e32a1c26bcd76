#pragma once

// JSON scenario format: a network plus everything a run needs. Schema
// (unknown keys are rejected; dotted paths below name fields in errors):
//
//   {
//     "name": "three_trains",
//     "nodes": [                       // node ids must be exactly 1..k
//       {"id": 1, "space": "line",     // "line" | "circle"
//        "initGuard": 3.0, "termGuard": -3.0,
//        "margin": 0.0,                // optional, default 0
//        "initialState": 3.0,          // optional, default = initGuard
//        "clamp": {"lo": -3.0, "hi": 3.0,   // optional evaluation-time box
//                  "loRep": -3.0, "hiRep": 3.0}}
//     ],
//     "defaultFields": {"1": FIELD},   // one entry per node
//     "events": [                      // optional, default none
//       {"id": "stop1_loop0",
//        "edges": [[0, 1]],            // [source, target]; source 0 = constraining node
//        "when": PREDICATE,
//        "assigns": {"1": FIELD}}      // exactly the linked nodes
//     ],
//     "primitives": [                  // optional: factorization declarations
//       {"id": "a", "clauses": ["stop1_loop0"],
//        "stages": {"1": [3.0, -3.0]}} // per-node [from, to]
//     ],
//     "sim": {                         // optional; every key optional
//       "tMax": 40.0, "hMax": 0.01, "tEventLocalize": 1e-9,
//       "stateTol": 1e-6, "latchEps": 1e-9, "zenoLimit": 1000,
//       "stallWindow": 1.0, "recurrenceTol": 1e-4},
//     "startTimes": [0, 0, 0]          // optional, one per node, >= 0
//   }
//
//   FIELD:     {"kind": "zero"}
//              {"kind": "constant", "value": v}
//              {"kind": "kuramoto", "omega": w, "kappa": k, "partner": n}
//              {"kind": "affine", "terms": [[node, coeff], ...], "offset": c}
//   PREDICATE: {"type": "true"}
//              {"type": "lt" | "gt" | "at", "node": n, "value": c}
//              {"type": "circDistLt", "a": n, "b": m, "eps": e}
//              {"type": "meet", "a": n, "b": m, "tol": t}   // tol optional
//              {"type": "and" | "or", "kids": [PREDICATE, ...]}
//              {"type": "not", "kid": PREDICATE}

#include "fan/factor.hpp"
#include "fan/fan.hpp"
#include "fan/semiflow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fan {

/// Simulation settings carried by a scenario alongside the network. The
/// nested IntegratorConfig feeds the semiflow; the rest parameterize the
/// run-level analyses.
struct SimSettings {
    IntegratorConfig cfg;
    double tMax = 100.0;          ///< horizon for transits and scans
    double stallWindow = 1.0;     ///< constant-tail width for stall detection
    double recurrenceTol = 1e-4;  ///< state tolerance for livelock detection
};

/// A loaded scenario: validated network, initial state, settings, optional
/// per-node start times, optional primitive declarations.
struct Scenario {
    Fan fan;
    State initialState;
    SimSettings sim;
    std::optional<std::vector<double>> startTimes;
    std::vector<PrimitiveDecl> primitives;
};

/// Parse scenario JSON text. `source` names the input in parse errors.
/// Throws ParseError on malformed JSON, ValidationError on schema
/// violations (naming the offending field), and ConfigError when the
/// resulting network fails structural validation.
Scenario parseScenario(const std::string& text, const std::string& source = "scenario");

/// Read and parse a scenario file. Throws ParseError when unreadable.
Scenario loadScenario(const std::string& path);

/// Serialize back to the schema above (canonical form: sorted keys, two-
/// space indent). Parsing the output reproduces the scenario exactly.
std::string serializeScenario(const Scenario& s);

}  // namespace fan
