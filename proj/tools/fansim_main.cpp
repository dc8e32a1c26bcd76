// fansim: command-line driver for functional asynchronous network scenarios.
//
// Exit codes: 0 success; 2 verification/input failure; 3 deadlock witness
// found while --expect-regular is set; 64 command-line usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fan/algebra.hpp"
#include "fan/deadlock.hpp"
#include "fan/errors.hpp"
#include "fan/factor.hpp"
#include "fan/fan.hpp"
#include "fan/geninit.hpp"
#include "fan/properties.hpp"
#include "fan/scenario.hpp"
#include "fan/semiflow.hpp"
#include "fan/transform.hpp"

#ifndef FANSIM_DEFAULT_FIXTURE_DIR
#define FANSIM_DEFAULT_FIXTURE_DIR "fixtures"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 2;        // verification failed / bad input data
constexpr int kDeadlockFound = 3;  // witness found under --expect-regular
constexpr int kUsage = 64;

using nlohmann::json;

std::vector<double> parseTimes(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used])))
                ++used;
            if (used != token.size()) throw std::invalid_argument(token);
            out.push_back(v);
        } catch (const std::exception&) {
            throw fan::ConfigError("cannot parse time value '" + token + "'");
        }
    }
    return out;
}

void writeOrPrint(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw fan::ConfigError("cannot write '" + path + "'");
    out << content;
}

double pickHorizon(double override_, const fan::Scenario& s) {
    return override_ > 0 ? override_ : s.sim.tMax;
}

/// Shared failure path of transition-style commands: print the witness as
/// JSON and choose the exit code from the --expect-regular contract.
int reportNotConnected(const fan::NotConnected& e, bool expectRegular) {
    json j;
    const auto* dead = dynamic_cast<const fan::DeadlockDetected*>(&e);
    j["error"] = dead ? "deadlock" : "not-connected";
    j["missing"] = e.missing;
    if (dead) {
        j["sink"] = dead->sink;
        j["entry_time"] = dead->entryTime;
    }
    std::cout << j.dump(2) << "\n";
    std::cerr << e.what() << "\n";
    return dead && expectRegular ? kDeadlockFound : kFailure;
}

int runSimulate(const std::string& path, double tMax, double sampleDt,
                const std::string& out, const std::string& eventsOut) {
    const fan::Scenario s = fan::loadScenario(path);
    const double H = pickHorizon(tMax, s);
    const fan::Trajectory traj =
        s.startTimes
            ? fan::evolveGeneralized(s.fan, s.initialState, *s.startTimes, H, s.sim.cfg)
            : fan::advance(s.fan.net, s.initialState, H, s.sim.cfg);

    std::ostringstream csv;
    fan::writeCsv(csv, s.fan.net, traj, sampleDt);
    writeOrPrint(out, csv.str());
    if (!eventsOut.empty()) {
        std::ostringstream lines;
        fan::writeEventsJsonl(lines, traj);
        writeOrPrint(eventsOut, lines.str());
    }
    return kOk;
}

int runTransition(const std::string& path, double tMax, bool expectRegular) {
    const fan::Scenario s = fan::loadScenario(path);
    try {
        const fan::Transition tr =
            fan::transition(s.fan, s.initialState, pickHorizon(tMax, s), s.sim.cfg);
        json j;
        j["name"] = s.fan.name;
        j["S"] = tr.S;
        j["Y"] = tr.Y;
        std::cout << j.dump(2) << "\n";
        return kOk;
    } catch (const fan::NotConnected& e) {
        return reportNotConnected(e, expectRegular);
    }
}

int runGTransition(const std::string& path, const std::string& startTimes, double tMax,
                   bool expectRegular) {
    const fan::Scenario s = fan::loadScenario(path);
    std::vector<double> T;
    if (!startTimes.empty())
        T = parseTimes(startTimes);
    else if (s.startTimes)
        T = *s.startTimes;
    else
        T.assign(s.fan.size(), 0.0);
    if (T.size() != s.fan.size()) {
        std::cerr << "start-times: expected " << s.fan.size() << " values, got "
                  << T.size() << "\n";
        return kUsage;
    }
    try {
        const fan::Transition tr = fan::generalizedTransition(
            s.fan, s.initialState, T, pickHorizon(tMax, s), s.sim.cfg);
        json j;
        j["name"] = s.fan.name;
        j["start_times"] = T;
        j["S"] = tr.S;
        j["Y"] = tr.Y;
        std::cout << j.dump(2) << "\n";
        return kOk;
    } catch (const fan::NotConnected& e) {
        return reportNotConnected(e, expectRegular);
    }
}

int runRegularityScan(const std::string& path, int xSamples, int tSamples, double tSpread,
                      double tMax, unsigned seed, bool expectRegular) {
    const fan::Scenario s = fan::loadScenario(path);
    const fan::RegularityReport rep = fan::regularityScan(
        s.fan, xSamples, tSamples, tSpread, pickHorizon(tMax, s), seed, s.sim.cfg);
    std::cout << rep.toJson() << "\n";
    return !rep.failures.empty() && expectRegular ? kDeadlockFound : kOk;
}

int runDeadlockScan(const std::string& path, const std::string& grid, int xSamples,
                    double tMax, unsigned seed, const std::string& csvOut,
                    bool expectRegular) {
    const fan::Scenario s = fan::loadScenario(path);
    const fan::HiddenScanReport rep = fan::hiddenDeadlockScan(
        s.fan, parseTimes(grid), xSamples, pickHorizon(tMax, s), seed, s.sim.cfg);
    std::cout << rep.toJson() << "\n";
    if (!csvOut.empty()) writeOrPrint(csvOut, rep.toCsv());
    return !rep.witnesses.empty() && expectRegular ? kDeadlockFound : kOk;
}

int runCore(const std::string& path, const std::string& out) {
    const fan::Scenario s = fan::loadScenario(path);
    const fan::Scenario result{fan::core(s.fan), s.initialState, s.sim, s.startTimes,
                               s.primitives};
    writeOrPrint(out, fan::serializeScenario(result));
    return kOk;
}

int runStopped(const std::string& path, const std::string& out) {
    const fan::Scenario s = fan::loadScenario(path);
    // Stop clauses are new events outside any declared primitive, so the
    // declarations are dropped rather than left stale.
    const fan::Scenario result{fan::stopped(s.fan), s.initialState, s.sim, s.startTimes,
                               {}};
    writeOrPrint(out, fan::serializeScenario(result));
    return kOk;
}

int runAmalgamate(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<fan::Scenario> parts;
    for (const std::string& p : paths) parts.push_back(fan::loadScenario(p));
    std::vector<fan::Fan> fans;
    for (const fan::Scenario& p : parts) fans.push_back(p.fan);

    fan::Scenario result{fan::amalgamate(fans), parts.front().initialState,
                         parts.front().sim, std::nullopt, {}};
    for (const fan::Scenario& p : parts)
        result.primitives.insert(result.primitives.end(), p.primitives.begin(),
                                 p.primitives.end());
    writeOrPrint(out, fan::serializeScenario(result));
    return kOk;
}

int runConcatenate(const std::string& firstPath, const std::string& secondPath,
                   const std::string& out) {
    const fan::Scenario first = fan::loadScenario(firstPath);
    const fan::Scenario second = fan::loadScenario(secondPath);
    // concatenate(b, a) runs a's stage first; the CLI order is execution order.
    fan::Scenario result{fan::concatenate(second.fan, first.fan), first.initialState,
                         first.sim, std::nullopt, {}};
    result.primitives = first.primitives;
    result.primitives.insert(result.primitives.end(), second.primitives.begin(),
                             second.primitives.end());
    writeOrPrint(out, fan::serializeScenario(result));
    return kOk;
}

int runFactorize(const std::string& path, const std::string& dotOut) {
    const fan::Scenario s = fan::loadScenario(path);
    if (s.primitives.empty())
        throw fan::ConfigError("scenario '" + s.fan.name + "' declares no primitives");
    const fan::FactorizationResult res = fan::factorize(s.fan, s.primitives);

    json j;
    j["name"] = s.fan.name;
    j["layers"] = res.dag.layers;
    json hasse = json::array();
    for (const auto& [u, v] : res.dag.hasse) hasse.push_back({u, v});
    j["hasse"] = std::move(hasse);
    json factors = json::array();
    for (const fan::Fan& f : res.factors) factors.push_back(f.name);
    j["factors"] = std::move(factors);
    std::cout << j.dump(2) << "\n";

    if (!dotOut.empty()) writeOrPrint(dotOut, fan::toDot(res.dag));
    return kOk;
}

int runVerifyModularization(const std::string& path, int samples, unsigned seed,
                            double tol, double tSpread, double tMax) {
    const fan::Scenario s = fan::loadScenario(path);
    if (s.primitives.empty())
        throw fan::ConfigError("scenario '" + s.fan.name + "' declares no primitives");
    const fan::FactorizationResult res = fan::factorize(s.fan, s.primitives);
    const fan::ModularizationReport rep = fan::verifyModularization(
        s.fan, res, samples, seed, tol, tSpread, pickHorizon(tMax, s), s.sim.cfg);
    std::cout << rep.toJson() << "\n";
    return rep.passed ? kOk : kFailure;
}

int runVerifyProperties(std::vector<std::string> paths, const std::string& fixtureDir,
                        int latticeTrials) {
    if (paths.empty()) {
        for (const char* name :
             {"term_deadlock.json", "single_track.json", "phase_livelock.json",
              "three_trains.json", "six_node.json", "nine_node.json"})
            paths.push_back(fixtureDir + "/" + name);
    }
    std::vector<fan::Scenario> scenarios;
    for (const std::string& p : paths) scenarios.push_back(fan::loadScenario(p));

    const std::vector<fan::PropertyResult> results =
        fan::runPropertySuites(scenarios, latticeTrials);
    bool all = true;
    for (const fan::PropertyResult& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
                  << "\n";
        all = all && r.pass;
    }
    std::cout << (all ? "all property suites green" : "property suite failures above")
              << "\n";
    return all ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fansim: simulate, analyze, and transform functional asynchronous "
                 "network scenarios"};
    app.require_subcommand(1);
    int exitCode = kOk;

    // --- simulate ----------------------------------------------------------
    struct {
        std::string scenario, out = "-", events;
        double tMax = 0.0, sampleDt = 0.25;
    } sim;
    auto* cmdSim = app.add_subcommand("simulate",
                                      "Integrate a scenario; write t,x_1..x_k,clauses CSV");
    cmdSim->add_option("scenario", sim.scenario, "scenario JSON file")->required();
    cmdSim->add_option("--t-max", sim.tMax, "horizon override (default: scenario sim.tMax)");
    cmdSim->add_option("--sample-dt", sim.sampleDt, "extra uniform sample pitch (0 = events/steps only)");
    cmdSim->add_option("--out", sim.out, "CSV output path ('-' = stdout)");
    cmdSim->add_option("--events", sim.events, "also write event records as JSON lines");
    cmdSim->callback([&] {
        exitCode = runSimulate(sim.scenario, sim.tMax, sim.sampleDt, sim.out, sim.events);
    });

    // --- transition ---------------------------------------------------------
    struct {
        std::string scenario;
        double tMax = 0.0;
        bool expectRegular = false;
    } tr;
    auto* cmdTr = app.add_subcommand("transition",
                                     "Simultaneous-start transition map: per-node S and Y");
    cmdTr->add_option("scenario", tr.scenario, "scenario JSON file")->required();
    cmdTr->add_option("--t-max", tr.tMax, "horizon override");
    cmdTr->add_flag("--expect-regular", tr.expectRegular,
                    "exit 3 instead of 2 when a deadlock witness appears");
    cmdTr->callback([&] { exitCode = runTransition(tr.scenario, tr.tMax, tr.expectRegular); });

    // --- gtransition --------------------------------------------------------
    struct {
        std::string scenario, startTimes;
        double tMax = 0.0;
        bool expectRegular = false;
    } gtr;
    auto* cmdGtr = app.add_subcommand(
        "gtransition", "Generalized transition map under per-node start times");
    cmdGtr->add_option("scenario", gtr.scenario, "scenario JSON file")->required();
    cmdGtr->add_option("--start-times", gtr.startTimes,
                       "comma-separated start times (default: scenario startTimes or zeros)");
    cmdGtr->add_option("--t-max", gtr.tMax, "horizon override");
    cmdGtr->add_flag("--expect-regular", gtr.expectRegular,
                     "exit 3 instead of 2 when a deadlock witness appears");
    cmdGtr->callback([&] {
        exitCode = runGTransition(gtr.scenario, gtr.startTimes, gtr.tMax, gtr.expectRegular);
    });

    // --- regularity-scan ----------------------------------------------------
    struct {
        std::string scenario;
        int xSamples = 20, tSamples = 20;
        double tSpread = 3.0, tMax = 0.0;
        unsigned seed = 1;
        bool expectRegular = false;
    } reg;
    auto* cmdReg = app.add_subcommand(
        "regularity-scan", "Classify random (X, T) samples: connected or which sink");
    cmdReg->add_option("scenario", reg.scenario, "scenario JSON file")->required();
    cmdReg->add_option("--x-samples", reg.xSamples, "initial-state samples");
    cmdReg->add_option("--t-samples", reg.tSamples, "start-time samples per state");
    cmdReg->add_option("--t-spread", reg.tSpread, "start times drawn from [0, t-spread]");
    cmdReg->add_option("--t-max", reg.tMax, "horizon override");
    cmdReg->add_option("--seed", reg.seed, "RNG seed");
    cmdReg->add_flag("--expect-regular", reg.expectRegular,
                     "exit 3 when any sample fails to connect");
    cmdReg->callback([&] {
        exitCode = runRegularityScan(reg.scenario, reg.xSamples, reg.tSamples, reg.tSpread,
                                     reg.tMax, reg.seed, reg.expectRegular);
    });

    // --- deadlock-scan ------------------------------------------------------
    struct {
        std::string scenario, grid = "0,1,2,3,4", csv;
        int xSamples = 3;
        double tMax = 0.0;
        unsigned seed = 1;
        bool expectRegular = false;
    } scan;
    auto* cmdScan = app.add_subcommand(
        "deadlock-scan", "Hidden-deadlock scan over a Cartesian start-time grid");
    cmdScan->add_option("scenario", scan.scenario, "scenario JSON file")->required();
    cmdScan->add_option("--grid", scan.grid, "comma-separated axis values (applied per node)");
    cmdScan->add_option("--x-samples", scan.xSamples, "initial states per grid point");
    cmdScan->add_option("--t-max", scan.tMax, "horizon override");
    cmdScan->add_option("--seed", scan.seed, "RNG seed");
    cmdScan->add_option("--csv", scan.csv, "write T_1..T_k,code heat-map rows to a file");
    cmdScan->add_flag("--expect-regular", scan.expectRegular,
                      "exit 3 when the scan finds any witness");
    cmdScan->callback([&] {
        exitCode = runDeadlockScan(scan.scenario, scan.grid, scan.xSamples, scan.tMax,
                                   scan.seed, scan.csv, scan.expectRegular);
    });

    // --- core / stopped -----------------------------------------------------
    struct {
        std::string scenario, out = "-";
    } core, stop;
    auto* cmdCore = app.add_subcommand(
        "core", "Clamp event evaluation to the guard boxes; emit the scenario");
    cmdCore->add_option("scenario", core.scenario, "scenario JSON file")->required();
    cmdCore->add_option("--out", core.out, "output path ('-' = stdout)");
    cmdCore->callback([&] { exitCode = runCore(core.scenario, core.out); });

    auto* cmdStop = app.add_subcommand(
        "stopped", "Latch every node at its termination guard; emit the scenario");
    cmdStop->add_option("scenario", stop.scenario, "scenario JSON file")->required();
    cmdStop->add_option("--out", stop.out, "output path ('-' = stdout)");
    cmdStop->callback([&] { exitCode = runStopped(stop.scenario, stop.out); });

    // --- amalgamate / concatenate --------------------------------------------
    struct {
        std::vector<std::string> scenarios;
        std::string out = "-";
    } amal;
    auto* cmdAmal = app.add_subcommand(
        "amalgamate", "Join independent networks over the same node set");
    cmdAmal->add_option("scenarios", amal.scenarios, "two or more scenario files")
        ->required()
        ->expected(2, -1);
    cmdAmal->add_option("--out", amal.out, "output path ('-' = stdout)");
    cmdAmal->callback([&] { exitCode = runAmalgamate(amal.scenarios, amal.out); });

    struct {
        std::string first, second, out = "-";
    } conc;
    auto* cmdConc = app.add_subcommand(
        "concatenate", "Chain two stage networks (first runs, then second)");
    cmdConc->add_option("first", conc.first, "stage that runs first")->required();
    cmdConc->add_option("second", conc.second, "stage that runs second")->required();
    cmdConc->add_option("--out", conc.out, "output path ('-' = stdout)");
    cmdConc->callback([&] { exitCode = runConcatenate(conc.first, conc.second, conc.out); });

    // --- factorize -----------------------------------------------------------
    struct {
        std::string scenario, dot;
    } fac;
    auto* cmdFac = app.add_subcommand(
        "factorize", "Layer the declared primitives into basic factors");
    cmdFac->add_option("scenario", fac.scenario, "scenario JSON file")->required();
    cmdFac->add_option("--dot", fac.dot, "write the Hasse diagram as Graphviz DOT");
    cmdFac->callback([&] { exitCode = runFactorize(fac.scenario, fac.dot); });

    // --- verify-modularization ------------------------------------------------
    struct {
        std::string scenario;
        int samples = 50;
        unsigned seed = 1;
        double tol = 1e-6, tSpread = 3.0, tMax = 0.0;
    } vmod;
    auto* cmdVmod = app.add_subcommand(
        "verify-modularization",
        "Compare the full transition against the factor composition");
    cmdVmod->add_option("scenario", vmod.scenario, "scenario JSON file")->required();
    cmdVmod->add_option("--samples", vmod.samples, "random (X, T) samples");
    cmdVmod->add_option("--seed", vmod.seed, "RNG seed");
    cmdVmod->add_option("--tol", vmod.tol, "max allowed deviation");
    cmdVmod->add_option("--t-spread", vmod.tSpread, "start times drawn from [0, t-spread]");
    cmdVmod->add_option("--t-max", vmod.tMax, "horizon override");
    cmdVmod->callback([&] {
        exitCode = runVerifyModularization(vmod.scenario, vmod.samples, vmod.seed, vmod.tol,
                                           vmod.tSpread, vmod.tMax);
    });

    // --- verify-properties ------------------------------------------------------
    struct {
        std::vector<std::string> scenarios;
        std::string fixtureDir = FANSIM_DEFAULT_FIXTURE_DIR;
        int latticeTrials = 10000;
    } prop;
    auto* cmdProp = app.add_subcommand(
        "verify-properties", "Run the invariant suites over scenario files");
    cmdProp->add_option("scenarios", prop.scenarios,
                        "scenario files (default: the shipped fixture library)");
    cmdProp->add_option("--fixture-dir", prop.fixtureDir,
                        "fixture directory used when no scenarios are given");
    cmdProp->add_option("--lattice-trials", prop.latticeTrials,
                        "random structures for the join-lattice laws");
    cmdProp->callback([&] {
        exitCode = runVerifyProperties(prop.scenarios, prop.fixtureDir, prop.latticeTrials);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    } catch (const fan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return exitCode;
}
