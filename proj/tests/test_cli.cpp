// End-to-end tests of the fansim binary: subcommand behavior, exit codes,
// file outputs, and determinism. The binary path and fixture directory come
// in through compile definitions.
#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fan/scenario.hpp"
#include "fixtures_common.hpp"

using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CmdResult {
    int exit = -1;
    std::string out;
    std::string err;
};

fs::path workDir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "fansim_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CmdResult run(const std::string& args) {
    static int counter = 0;
    const fs::path outFile = workDir() / ("out" + std::to_string(counter) + ".txt");
    const fs::path errFile = workDir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(FANSIM_CLI_BIN) + " " + args + " > " +
                            outFile.string() + " 2> " + errFile.string();
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(outFile);
    r.err = slurp(errFile);
    return r;
}

std::string fixture(const std::string& name) {
    return std::string(FANSIM_FIXTURE_DIR) + "/" + name;
}

std::string writeScenario(const fan::Scenario& s, const std::string& file) {
    const fs::path p = workDir() / file;
    std::ofstream(p) << fan::serializeScenario(s);
    return p.string();
}

/// Two independent two-walker corridors on a shared 4-node set: a walker
/// yields at 1 while its opposer is still beyond 2.
fan::Fan corridor(const std::string& name, fan::NodeId walker, fan::NodeId opposer) {
    fan::Fan f;
    f.name = name;
    f.net.spaces.assign(4, fan::PhaseSpace::Line);
    f.net.defaults = {fan::FieldSpec::constant(1.0), fan::FieldSpec::constant(-1.0),
                      fan::FieldSpec::constant(1.0), fan::FieldSpec::constant(-1.0)};
    f.net.clauses.push_back(
        {"yield" + std::to_string(walker), fan::ConnectionStructure({{0, walker}}),
         fan::Predicate::conj({fan::Predicate::at(walker, 1.0),
                               fan::Predicate::gt(opposer, 2.0)}),
         {{walker, fan::FieldSpec::zero()}}});
    f.guards = {{0.0, 4.0, 0.0}, {4.0, 0.0, 0.0}, {0.0, 4.0, 0.0}, {4.0, 0.0, 0.0}};
    f.validate();
    return f;
}

}  // namespace

TEST_CASE("usage errors exit with code 64") {
    CHECK(run("").exit == 64);
    CHECK(run("no-such-subcommand").exit == 64);
    CHECK(run("transition").exit == 64);          // missing scenario
    CHECK(run("simulate --bogus x.json").exit == 64);
    CHECK(run("--help").exit == 0);
    CHECK(run("gtransition " + fixture("single_track.json") + " --start-times 0,1,2")
              .exit == 64);  // three values for two nodes
}

TEST_CASE("bad scenario input exits with code 2") {
    CHECK(run("transition /nonexistent/file.json").exit == 2);
    const fs::path bad = workDir() / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run("transition " + bad.string()).exit == 2);
}

TEST_CASE("simulate writes the sampled trajectory and event log") {
    const fs::path csv = workDir() / "traj.csv";
    const fs::path events = workDir() / "events.jsonl";
    const CmdResult r = run("simulate " + fixture("term_deadlock.json") +
                            " --t-max 3 --out " + csv.string() + " --events " +
                            events.string());
    REQUIRE(r.exit == 0);

    const std::string text = slurp(csv);
    CHECK_THAT(text, ContainsSubstring("t,x_1,x_2,x_3,clauses"));
    // The default 0.25 sample pitch lands a row exactly at t = 2.75, where
    // the third node sits just below its guard at 2.
    std::istringstream lines(text);
    std::string line;
    bool found = false;
    while (std::getline(lines, line)) {
        if (line.rfind("2.75,", 0) != 0) continue;
        found = true;
        std::istringstream cols(line);
        std::string col;
        std::vector<std::string> cells;
        while (std::getline(cols, col, ',')) cells.push_back(col);
        REQUIRE(cells.size() == 5);
        CHECK(std::stod(cells[3]) == Catch::Approx(2.0).margin(1e-6));
    }
    CHECK(found);

    // Every event line is a JSON object with a time and a kind.
    std::istringstream evLines(slurp(events));
    int nEvents = 0;
    while (std::getline(evLines, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        CHECK(j.contains("t"));
        CHECK(j.contains("kind"));
        ++nEvents;
    }
    CHECK(nEvents > 0);
}

TEST_CASE("transition prints the simultaneous-start map") {
    const CmdResult r = run("transition " + fixture("term_deadlock.json"));
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    CHECK(j["name"] == "term_deadlock");
    const std::vector<double> S = j["S"], Y = j["Y"];
    const double wantS[] = {1.0, 2.5, 2.75}, wantY[] = {1.0, 2.0, 2.0};
    for (int i = 0; i < 3; ++i) {
        CHECK(S[i] == Catch::Approx(wantS[i]).margin(1e-6));
        CHECK(Y[i] == Catch::Approx(wantY[i]).margin(1e-6));
    }
}

TEST_CASE("gtransition reports deadlock witnesses through exit codes") {
    const std::string scn = fixture("single_track.json");

    const CmdResult good = run("gtransition " + scn + " --start-times 0,0");
    REQUIRE(good.exit == 0);
    const json gj = json::parse(good.out);
    CHECK(gj["S"][0].get<double>() == Catch::Approx(8.0).margin(1e-6));
    CHECK(gj["S"][1].get<double>() == Catch::Approx(2.0).margin(1e-6));

    const CmdResult bad = run("gtransition " + scn + " --start-times 0,3");
    CHECK(bad.exit == 2);
    const json bj = json::parse(bad.out);
    CHECK(bj["error"] == "deadlock");
    CHECK(bj["entry_time"].get<double>() == Catch::Approx(4.0).margin(1e-6));
    CHECK(bj["sink"][0].get<double>() == Catch::Approx(0.0).margin(1e-6));
    CHECK(bj["sink"][1].get<double>() == Catch::Approx(0.0).margin(1e-6));
    CHECK_THAT(bad.err, ContainsSubstring("deadlock"));

    CHECK(run("gtransition " + scn + " --start-times 0,3 --expect-regular").exit == 3);
}

TEST_CASE("regularity-scan blesses the weakly regular line") {
    const CmdResult r = run("regularity-scan " + fixture("three_trains.json") +
                            " --x-samples 2 --t-samples 10 --t-spread 4 --seed 5 "
                            "--expect-regular");
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    CHECK(j["connected_fraction"] == 1.0);
    CHECK(j["failures"].empty());
}

TEST_CASE("deadlock-scan finds the hidden single-track collision") {
    const std::string base = "deadlock-scan " + fixture("single_track.json") +
                             " --grid 0,1,2,3,4 --x-samples 1 --seed 2";
    const CmdResult plain = run(base);
    REQUIRE(plain.exit == 0);  // without --expect-regular the scan itself succeeds
    const json j = json::parse(plain.out);
    CHECK(j["checked"] == 25);
    bool hasWitness03 = false;
    for (const auto& w : j["witnesses"])
        if (w["T"] == json::array({0.0, 3.0})) hasWitness03 = true;
    CHECK(hasWitness03);

    const fs::path heat = workDir() / "heat.csv";
    CHECK(run(base + " --expect-regular --csv " + heat.string()).exit == 3);
    CHECK_THAT(slurp(heat), ContainsSubstring("T_1,T_2,code"));

    // Determinism: identical invocation, byte-identical report.
    CHECK(run(base).out == plain.out);
}

TEST_CASE("core emits a clamped scenario that still transits") {
    const fs::path out = workDir() / "core.json";
    REQUIRE(run("core " + fixture("three_trains.json") + " --out " + out.string()).exit ==
            0);
    const fan::Scenario s = fan::loadScenario(out.string());
    CHECK(s.fan.name == "three_trains_core");
    REQUIRE_FALSE(s.fan.net.clamp.empty());
    CHECK(s.primitives.size() == 2);  // declarations survive the transform

    const CmdResult r = run("transition " + out.string());
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    for (int i = 0; i < 3; ++i)
        CHECK(j["S"][i].get<double>() == Catch::Approx(6.0 * (i + 1)).margin(1e-6));
}

TEST_CASE("stopped emits latch clauses and exposes the partial deadlock") {
    const fs::path out = workDir() / "stopped.json";
    REQUIRE(run("stopped " + fixture("term_deadlock.json") + " --out " + out.string())
                .exit == 0);
    const fan::Scenario s = fan::loadScenario(out.string());
    CHECK(s.fan.net.clauses.size() == 5);  // 2 original + 3 stop latches
    CHECK(s.primitives.empty());

    const CmdResult r = run("transition " + out.string() + " --t-max 8");
    CHECK(r.exit == 2);
    const json j = json::parse(r.out);
    CHECK(j["error"] == "deadlock");
    CHECK(j["missing"] == json::array({2}));
    CHECK(j["entry_time"].get<double>() == Catch::Approx(4.0).margin(1e-6));
}

TEST_CASE("concatenate chains the stage networks back into the full line") {
    const std::string a = writeScenario(
        {fixtures::threeTrainsStageA(), {3.0, -3.0, 6.0}, {}, std::nullopt, {}},
        "stage_a.json");
    const std::string b = writeScenario(
        {fixtures::threeTrainsStageB(), {3.0, 1.0, 6.0}, {}, std::nullopt, {}},
        "stage_b.json");
    const fs::path out = workDir() / "concat.json";
    REQUIRE(run("concatenate " + a + " " + b + " --out " + out.string()).exit == 0);

    const fan::Scenario s = fan::loadScenario(out.string());
    CHECK(s.fan.name == "three_trains_a.three_trains_b");
    CHECK(s.fan.net.clauses.size() == 4);

    const CmdResult r = run("transition " + out.string());
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    for (int i = 0; i < 3; ++i)
        CHECK(j["S"][i].get<double>() == Catch::Approx(6.0 * (i + 1)).margin(1e-6));

    CHECK(run("concatenate " + b + " " + a).exit == 2);  // stages do not chain backwards
}

TEST_CASE("amalgamate joins independent corridors and rejects overlap") {
    const std::string p = writeScenario(
        {corridor("corridor_p", 1, 2), {0.0, 4.0, 0.0, 4.0}, {}, std::nullopt, {}},
        "corridor_p.json");
    const std::string q = writeScenario(
        {corridor("corridor_q", 3, 4), {0.0, 4.0, 0.0, 4.0}, {}, std::nullopt, {}},
        "corridor_q.json");

    const fs::path out = workDir() / "amal.json";
    REQUIRE(run("amalgamate " + p + " " + q + " --out " + out.string()).exit == 0);
    const fan::Scenario s = fan::loadScenario(out.string());
    CHECK(s.fan.net.clauses.size() == 2);
    CHECK(s.fan.name == "corridor_p+corridor_q");

    CHECK(run("amalgamate " + p + " " + p).exit == 2);   // self-overlap
    CHECK(run("amalgamate " + p).exit == 64);            // needs at least two
}

TEST_CASE("factorize prints layers and writes the DOT diagram") {
    const fs::path dot = workDir() / "six.dot";
    const CmdResult r =
        run("factorize " + fixture("six_node.json") + " --dot " + dot.string());
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    CHECK(j["layers"] ==
          json::array({json::array({"p1"}), json::array({"p2"}), json::array({"p3"})}));
    CHECK(j["factors"].size() == 3);
    const std::string dotText = slurp(dot);
    CHECK_THAT(dotText, ContainsSubstring("\"p1\" -> \"p2\";"));
    CHECK_THAT(dotText, ContainsSubstring("\"p2\" -> \"p3\";"));

    CHECK(run("factorize " + fixture("term_deadlock.json")).exit == 2);  // no primitives
}

TEST_CASE("verify-modularization passes on the declared fixtures") {
    const CmdResult r = run("verify-modularization " + fixture("three_trains.json") +
                            " --samples 10 --seed 3 --tol 1e-6");
    REQUIRE(r.exit == 0);
    const json j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["failures"] == 0);
}

TEST_CASE("verify-properties runs the invariant battery over the fixture library") {
    const CmdResult r = run("verify-properties --fixture-dir " +
                            std::string(FANSIM_FIXTURE_DIR));
    REQUIRE(r.exit == 0);
    for (const char* suite :
         {"join-lattice", "semigroup", "freeze", "continuity", "dag-acyclic"}) {
        CHECK_THAT(r.out, ContainsSubstring(std::string("[PASS] ") + suite));
    }
    CHECK_THAT(r.out, ContainsSubstring("all property suites green"));
}
