#include "fan/geninit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fan/deadlock.hpp"
#include "json.hpp"

namespace fan {

SwitchSchedule switchSchedule(const std::vector<double>& T) {
    SwitchSchedule out;
    for (double t : T) {
        if (!std::isfinite(t) || t < 0.0)
            throw ConfigError("start times must be finite and nonnegative");
    }
    out.tau = T;
    std::sort(out.tau.begin(), out.tau.end());
    out.tau.erase(std::unique(out.tau.begin(), out.tau.end()), out.tau.end());
    out.J.reserve(out.tau.size());
    for (double tau : out.tau) {
        std::set<NodeId> running;
        for (std::size_t i = 0; i < T.size(); ++i)
            if (T[i] <= tau) running.insert(static_cast<NodeId>(i + 1));
        out.J.push_back(std::move(running));
    }
    return out;
}

namespace {

void checkStartTimes(const Fan& fan, const State& X, const std::vector<double>& T) {
    if (X.size() != fan.size())
        throw ConfigError("generalized initialization: state size does not match the network");
    if (T.size() != fan.size())
        throw ConfigError("generalized initialization: start-time vector size does not match");
    switchSchedule(T);  // validates entries
}

}  // namespace

Trajectory evolveGeneralized(const Fan& fan, const State& X, const std::vector<double>& T,
                             double tEnd, const IntegratorConfig& cfg,
                             const AdvanceOptions& extra) {
    checkStartTimes(fan, X, T);
    AdvanceOptions opts = extra;
    opts.startTimes = T;
    return advance(fan.net, X, noLatches(fan.size()), 0.0, tEnd, cfg, opts);
}

TransitRecord generalizedTransit(const Fan& fan, const State& X,
                                 const std::vector<double>& T, double tMax,
                                 const IntegratorConfig& cfg) {
    checkStartTimes(fan, X, T);
    const std::size_t k = fan.size();

    AdvanceOptions opts;
    opts.startTimes = T;
    std::size_t need = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (fan.guards[i].degenerate()) continue;
        opts.watches.push_back({static_cast<NodeId>(i + 1), fan.guards[i].term, "term"});
        ++need;
    }
    opts.stopWhen = [need](const Trajectory& tr) {
        std::set<NodeId> hit;
        for (const auto& e : tr.events)
            if (e.kind == EventKind::TerminalHit && e.note == "term") hit.insert(e.node);
        return hit.size() >= need;
    };

    TransitRecord rec;
    rec.traj = advance(fan.net, X, noLatches(k), 0.0, tMax, cfg, opts);
    rec.S.assign(k, std::nullopt);
    rec.Y.assign(k, 0.0);
    for (const auto& e : rec.traj.events) {
        if (e.kind == EventKind::TerminalHit && e.note == "term") {
            if (!rec.S[e.node - 1].has_value()) rec.S[e.node - 1] = e.t;
        } else if (e.kind == EventKind::Stall && !rec.stalled) {
            rec.stalled = true;
            rec.stallTime = e.t;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (fan.guards[i].degenerate()) {
            // Pass-through node: its (trivial) passage happens at its own
            // start time, at its own coordinate.
            rec.S[i] = T[i];
            rec.Y[i] = X[i];
        } else if (rec.S[i].has_value()) {
            rec.Y[i] = rec.traj.stateAt(*rec.S[i])[i];
        } else {
            rec.Y[i] = rec.traj.finalState()[i];
        }
    }
    return rec;
}

Transition generalizedTransition(const Fan& fan, const State& X,
                                 const std::vector<double>& T, double tMax,
                                 const IntegratorConfig& cfg) {
    TransitRecord rec = generalizedTransit(fan, X, T, tMax, cfg);
    if (!rec.complete()) {
        if (rec.stalled)
            throw DeadlockDetected(rec.unreached(), rec.traj.finalState(), rec.stallTime);
        throw NotConnected("generalized transit incomplete within tMax", rec.unreached());
    }
    Transition out;
    out.Y = rec.Y;
    out.S.resize(fan.size());
    for (std::size_t i = 0; i < fan.size(); ++i) out.S[i] = *rec.S[i];
    return out;
}

double uniformShiftCheck(const Fan& fan, const State& X, double T, double tMax,
                         const IntegratorConfig& cfg) {
    Transition base = transition(fan, X, tMax, cfg);
    Transition shifted = generalizedTransition(
        fan, X, std::vector<double>(fan.size(), T), tMax + T, cfg);
    double dev = stateDistance(fan.net, base.Y, shifted.Y);
    for (std::size_t i = 0; i < fan.size(); ++i)
        dev = std::max(dev, std::fabs(shifted.S[i] - (base.S[i] + T)));
    return dev;
}

State sampleInitState(const Fan& fan, std::mt19937& rng) {
    State x(fan.size(), 0.0);
    std::uniform_real_distribution<double> circle(0.0, 1.0);
    for (std::size_t i = 0; i < fan.size(); ++i) {
        if (fan.net.spaces[i] == PhaseSpace::Circle)
            x[i] = circle(rng);
        else if (fan.guards[i].degenerate())
            x[i] = fan.guards[i].term;
        else
            x[i] = fan.guards[i].init;
    }
    return x;
}

RegularityReport regularityScan(const Fan& fan, int nX, int nT, double Tmax,
                                double tMax, unsigned seed, const IntegratorConfig& cfg) {
    if (nX < 1 || nT < 1) throw ConfigError("regularity scan needs at least one sample");
    if (Tmax < 0.0) throw ConfigError("regularity scan: Tmax must be nonnegative");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> start(0.0, Tmax);

    RegularityReport rep;
    for (int ix = 0; ix < nX; ++ix) {
        const State X = sampleInitState(fan, rng);
        for (int it = 0; it < nT; ++it) {
            std::vector<double> T(fan.size(), 0.0);
            if (Tmax > 0.0)
                for (auto& t : T) t = start(rng);
            ++rep.samples;
            TransitRecord rec;
            try {
                rec = generalizedTransit(fan, X, T, tMax, cfg);
            } catch (const ZenoSuspected&) {
                rep.failures.push_back({X, T, "unresolved"});
                continue;
            }
            if (rec.complete()) {
                ++rep.connected;
                continue;
            }
            DeadlockReport sink = classifySink(rec.traj, fan);
            std::string label = "unresolved";
            switch (sink.kind) {
                case SinkKind::Total: label = "deadlock-total"; break;
                case SinkKind::Partial: label = "deadlock-partial"; break;
                case SinkKind::Livelock: label = "livelock"; break;
                case SinkKind::None: break;
            }
            rep.failures.push_back({X, T, label});
        }
    }
    return rep;
}

std::string RegularityReport::toJson() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["connected"] = connected;
    j["connected_fraction"] = connectedFraction();
    j["failures"] = nlohmann::json::array();
    for (const auto& f : failures) {
        nlohmann::json jf;
        jf["X"] = f.X;
        jf["T"] = f.T;
        jf["classification"] = f.classification;
        j["failures"].push_back(std::move(jf));
    }
    return j.dump(2);
}

}  // namespace fan
