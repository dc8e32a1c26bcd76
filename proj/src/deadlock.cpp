#include "fan/deadlock.hpp"

#include "fan/errors.hpp"
#include "fan/geninit.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>

namespace fan {

namespace {

std::vector<double> wrapState(const AsyncNetwork& net, std::vector<double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (net.spaces[i] == PhaseSpace::Circle) x[i] = wrapCircle(x[i]);
    }
    return x;
}

/// Splits the nodes of a resting state into those sitting on/past their
/// terminal guard and those stuck short of it.
void classifyRestingNodes(const Fan& fan, const std::vector<double>& x,
                          std::vector<NodeId>& terminal, std::vector<NodeId>& stalled) {
    terminal.clear();
    stalled.clear();
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const Region r = regionOf(fan, static_cast<NodeId>(i + 1), x[i]);
        if (r == Region::Term || r == Region::Plus)
            terminal.push_back(static_cast<NodeId>(i + 1));
        else
            stalled.push_back(static_cast<NodeId>(i + 1));
    }
}

/// Maximum state distance between the trajectory at t and at t + period,
/// probed on `points` base times spanning [lo, hi].
double recurrenceDefect(const Trajectory& traj, const AsyncNetwork& net, double period,
                        double lo, double hi, int points) {
    double worst = 0.0;
    for (int j = 0; j < points; ++j) {
        const double t = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
        worst = std::max(worst, stateDistance(net, traj.stateAt(t), traj.stateAt(t + period)));
    }
    return worst;
}

}  // namespace

const char* sinkKindName(SinkKind kind) {
    switch (kind) {
        case SinkKind::None: return "none";
        case SinkKind::Total: return "total";
        case SinkKind::Partial: return "partial";
        case SinkKind::Livelock: return "livelock";
    }
    return "none";
}

std::string DeadlockReport::toJson() const {
    nlohmann::json j;
    j["kind"] = sinkKindName(kind);
    j["entry_time"] = entryTime;
    j["sink"] = sinkEstimate;
    j["period"] = period;
    j["terminal_nodes"] = terminalNodes;
    j["stalled_nodes"] = stalledNodes;
    return j.dump(2);
}

DeadlockReport detectStall(const Trajectory& traj, const Fan& fan, double stallWindow) {
    DeadlockReport report;
    if (traj.samples.empty()) return report;

    const std::vector<double>& last = traj.samples.back().x;
    double entry = std::numeric_limits<double>::quiet_NaN();

    // An engine stall event certifies provably-zero velocities from its
    // timestamp onward, regardless of how much trajectory follows it.
    for (const TrajectoryEvent& ev : traj.events) {
        if (ev.kind == EventKind::Stall) {
            entry = ev.t;
            break;
        }
    }

    if (std::isnan(entry)) {
        // Fall back to a bit-identical constant tail of at least stallWindow.
        std::size_t first = traj.samples.size() - 1;
        while (first > 0 && traj.samples[first - 1].x == last) --first;
        const double tailStart = traj.samples[first].t;
        if (traj.t1 - tailStart < stallWindow) return report;
        entry = tailStart;
    }

    std::vector<NodeId> terminal, stalled;
    classifyRestingNodes(fan, last, terminal, stalled);
    if (stalled.empty()) return report;  // came to rest on the terminal set

    report.kind = terminal.empty() ? SinkKind::Total : SinkKind::Partial;
    report.entryTime = entry;
    report.sinkEstimate = wrapState(fan.net, last);
    report.terminalNodes = std::move(terminal);
    report.stalledNodes = std::move(stalled);
    return report;
}

DeadlockReport detectLivelock(const Trajectory& traj, const Fan& fan, double minPeriod,
                              double maxPeriod, double tol) {
    DeadlockReport report;
    if (traj.samples.size() < 4) return report;
    if (!(minPeriod > 0.0) || !(maxPeriod > minPeriod))
        throw ConfigError("detectLivelock: need 0 < minPeriod < maxPeriod");

    const AsyncNetwork& net = fan.net;
    const double span = traj.t1 - traj.t0;
    // Four period lengths must fit in the trajectory: one for the comparison
    // offset and three of sustained recurrence behind it.
    const double pHi = std::min(maxPeriod, span / 4.0);
    if (pHi <= minPeriod) return report;

    constexpr int kBasePoints = 64;
    auto defect = [&](double period) {
        return recurrenceDefect(traj, net, period, traj.t1 - 4.0 * period,
                                traj.t1 - period, kBasePoints);
    };

    // Coarse sweep, then refine each local minimum with a ternary search and
    // keep the smallest period whose defect passes the tolerance.
    constexpr int kCoarse = 256;
    std::vector<double> d(kCoarse);
    std::vector<double> p(kCoarse);
    for (int j = 0; j < kCoarse; ++j) {
        p[j] = minPeriod + (pHi - minPeriod) * static_cast<double>(j) / (kCoarse - 1);
        d[j] = defect(p[j]);
    }

    double best = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < kCoarse; ++j) {
        const bool leftOk = j == 0 || d[j] <= d[j - 1];
        const bool rightOk = j == kCoarse - 1 || d[j] <= d[j + 1];
        if (!leftOk || !rightOk) continue;
        double lo = p[std::max(0, j - 1)];
        double hi = p[std::min(kCoarse - 1, j + 1)];
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (defect(m1) <= defect(m2))
                hi = m2;
            else
                lo = m1;
        }
        const double cand = 0.5 * (lo + hi);
        if (defect(cand) <= tol) {
            best = cand;
            break;  // coarse sweep ascends in period, so this is the smallest
        }
    }
    if (std::isnan(best)) return report;

    // A fixed point recurs at every period; demand an actual orbit.
    double extent = 0.0;
    const std::vector<double> final = traj.samples.back().x;
    for (int j = 0; j < kBasePoints; ++j) {
        const double t = traj.t1 - 4.0 * best +
                         3.0 * best * static_cast<double>(j) / (kBasePoints - 1);
        extent = std::max(extent, stateDistance(net, traj.stateAt(t), final));
    }
    if (extent <= 10.0 * tol) return report;

    // Recurrence without progress: no node may have closed in on its terminal
    // guard over the sustained window.
    const double progressTol = IntegratorConfig{}.stateTol;
    const double wStart = traj.t1 - 3.0 * best;
    const std::vector<double> xs = traj.stateAt(wStart);
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const NodeGuard& g = fan.guards[i];
        if (g.degenerate() || net.spaces[i] == PhaseSpace::Circle) continue;
        const double before = (g.term - xs[i]) * g.dir();
        const double after = (g.term - final[i]) * g.dir();
        if (before - after > progressTol) return report;
    }

    // Earliest grid time from which the recurrence holds through to the end.
    const double pitch = best / 32.0;
    double entry = traj.t1 - best;
    for (double t = traj.t1 - best; t >= traj.t0 - 1e-12; t -= pitch) {
        const double tt = std::max(t, traj.t0);
        if (stateDistance(net, traj.stateAt(tt), traj.stateAt(tt + best)) > tol) break;
        entry = tt;
        if (tt == traj.t0) break;
    }

    report.kind = SinkKind::Livelock;
    report.entryTime = entry;
    report.period = best;
    report.sinkEstimate = wrapState(net, final);
    classifyRestingNodes(fan, final, report.terminalNodes, report.stalledNodes);
    return report;
}

DeadlockReport classifySink(const Trajectory& traj, const Fan& fan) {
    DeadlockReport stall = detectStall(traj, fan);
    if (stall.kind != SinkKind::None) return stall;

    const double span = traj.t1 - traj.t0;
    if (span <= 0.0) return stall;
    const double minP = std::max(1e-2, span / 100.0);
    const double maxP = span / 4.0;
    if (maxP <= minP) return stall;
    return detectLivelock(traj, fan, minP, maxP);
}

bool HiddenScanReport::contains(const std::vector<double>& T) const {
    for (const HiddenDeadlockWitness& w : witnesses) {
        if (w.T.size() != T.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < T.size(); ++i) {
            if (std::abs(w.T[i] - T[i]) > 1e-12) {
                same = false;
                break;
            }
        }
        if (same) return true;
    }
    return false;
}

std::string HiddenScanReport::toJson() const {
    nlohmann::json j;
    j["checked"] = checked;
    j["witnesses"] = nlohmann::json::array();
    for (const HiddenDeadlockWitness& w : witnesses) {
        nlohmann::json e;
        e["X"] = w.X;
        e["T"] = w.T;
        e["kind"] = sinkKindName(w.report.kind);
        e["entry_time"] = w.report.entryTime;
        e["sink"] = w.report.sinkEstimate;
        if (w.report.kind == SinkKind::Livelock) e["period"] = w.report.period;
        j["witnesses"].push_back(std::move(e));
    }
    return j.dump(2);
}

std::string HiddenScanReport::toCsv() const {
    std::ostringstream os;
    os.precision(17);
    const std::size_t k = cells.empty() ? 0 : cells.front().first.size();
    for (std::size_t i = 1; i <= k; ++i) os << "T_" << i << ",";
    os << "code\n";
    for (const auto& [T, code] : cells) {
        for (double t : T) os << t << ",";
        os << code << "\n";
    }
    return os.str();
}

HiddenScanReport hiddenDeadlockScan(const Fan& fan, const std::vector<double>& tGrid,
                                    int xSamples, double tMax, unsigned seed,
                                    const IntegratorConfig& cfg) {
    if (tGrid.empty()) throw ConfigError("hiddenDeadlockScan: empty start-time grid");
    for (double t : tGrid) {
        if (!std::isfinite(t) || t < 0.0)
            throw ConfigError("hiddenDeadlockScan: grid start times must be finite and >= 0");
    }
    if (xSamples < 1) throw ConfigError("hiddenDeadlockScan: need at least one state sample");

    const std::size_t k = fan.size();
    double cellsD = 1.0;
    for (std::size_t i = 0; i < k; ++i) cellsD *= static_cast<double>(tGrid.size());
    if (cellsD > 100000.0) throw ConfigError("hiddenDeadlockScan: start-time grid too large");
    const std::size_t nCells = static_cast<std::size_t>(cellsD);

    std::mt19937 rng(seed);
    HiddenScanReport report;
    std::vector<int> worst(nCells, 0);
    std::vector<std::vector<double>> grid(nCells);

    for (int s = 0; s < xSamples; ++s) {
        const std::vector<double> X = sampleInitState(fan, rng);

        const TransitRecord base = generalizedTransit(fan, X, std::vector<double>(k, 0.0),
                                                      tMax, cfg);
        if (!base.complete())
            throw ConfigError(
                "hiddenDeadlockScan: the simultaneous-start run already fails to transit; "
                "such sinks are not hidden");

        std::vector<std::size_t> odo(k, 0);
        for (std::size_t cell = 0; cell < nCells; ++cell) {
            std::vector<double> T(k);
            for (std::size_t i = 0; i < k; ++i) T[i] = tGrid[odo[i]];
            if (grid[cell].empty()) grid[cell] = T;

            ++report.checked;
            int code = 0;
            try {
                const TransitRecord rec = generalizedTransit(fan, X, T, tMax, cfg);
                if (!rec.complete()) {
                    const DeadlockReport dr = classifySink(rec.traj, fan);
                    switch (dr.kind) {
                        case SinkKind::Total:
                        case SinkKind::Partial:
                            code = 1;
                            break;
                        case SinkKind::Livelock:
                            code = 2;
                            break;
                        case SinkKind::None:
                            code = 3;
                            break;
                    }
                    if (dr.kind != SinkKind::None)
                        report.witnesses.push_back({X, T, dr});
                }
            } catch (const ZenoSuspected&) {
                code = 3;
            }

            // Deadlock outranks livelock outranks unresolved in the heat map.
            static constexpr int rank[4] = {0, 3, 2, 1};
            if (rank[code] > rank[worst[cell]]) worst[cell] = code;

            for (std::size_t i = 0; i < k; ++i) {
                if (++odo[i] < tGrid.size()) break;
                odo[i] = 0;
            }
        }
    }

    report.cells.reserve(nCells);
    for (std::size_t cell = 0; cell < nCells; ++cell)
        report.cells.emplace_back(std::move(grid[cell]), worst[cell]);
    return report;
}

}  // namespace fan
