// ===========================================================================
// semiflow.cpp — event-driven evolution of asynchronous networks.
//
// The state advances segment by segment. Within a segment the active clause
// set (and hence the resolved per-node fields) is frozen; the segment ends at
// the earliest crossing of any guard function, at a scheduled node start, or
// at tEnd. All predicate atoms are covered by guard functions, so clause
// truth cannot change inside a segment.
// ===========================================================================

#include "fan/semiflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "fan/errors.hpp"
#include "json.hpp"

namespace fan {

const char* eventKindName(EventKind k) {
    switch (k) {
        case EventKind::Switch: return "switch";
        case EventKind::Latch: return "latch";
        case EventKind::Unlatch: return "unlatch";
        case EventKind::TerminalHit: return "terminal_hit";
        case EventKind::Stall: return "stall";
        case EventKind::Recurrence: return "recurrence";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Guard functions
//
// Every predicate atom (and every caller watch) contributes a scalar function
// whose sign changes exactly when the atom's truth can change:
//   Level    g = x_a - c            (lt / gt / at thresholds, watches)
//   CircDist g = circDist(a,b) - c
//   Meet     g = (x_a - x_b) - c    (c = 0 capture level, c = +/-tol truth
//                                    boundary of the meet atom)
// ---------------------------------------------------------------------------
struct GuardFn {
    enum class Kind { Level, CircDist, Meet };
    Kind kind = Kind::Level;
    NodeId a = 0, b = 0;
    double c = 0.0;
    bool capture = false;  ///< a crossing may snap + latch (at atom / meet centre)
    double tol = 0.0;      ///< meet tolerance (capture guards only)
    int watch = -1;        ///< index into AdvanceOptions::watches, or -1

    double eval(const State& x) const {
        switch (kind) {
            case Kind::Level: return x[a - 1] - c;
            case Kind::CircDist: return circleDist(x[a - 1], x[b - 1]) - c;
            case Kind::Meet: return (x[a - 1] - x[b - 1]) - c;
        }
        return 0.0;
    }
};

void collectAtomGuards(const Predicate& p, std::vector<GuardFn>& out) {
    switch (p.kind) {
        case Predicate::Kind::Lt:
        case Predicate::Kind::Gt:
            out.push_back({GuardFn::Kind::Level, p.node, 0, p.value, false, 0.0, -1});
            break;
        case Predicate::Kind::At:
            out.push_back({GuardFn::Kind::Level, p.node, 0, p.value, true, 0.0, -1});
            break;
        case Predicate::Kind::CircDistLt:
            out.push_back({GuardFn::Kind::CircDist, p.node, p.node2, p.value, false, 0.0, -1});
            break;
        case Predicate::Kind::Meet:
            out.push_back({GuardFn::Kind::Meet, p.node, p.node2, 0.0, true, p.value, -1});
            out.push_back({GuardFn::Kind::Meet, p.node, p.node2, -p.value, false, 0.0, -1});
            out.push_back({GuardFn::Kind::Meet, p.node, p.node2, p.value, false, 0.0, -1});
            break;
        case Predicate::Kind::And:
        case Predicate::Kind::Or:
        case Predicate::Kind::Not:
            for (const auto& k : p.kids) collectAtomGuards(k, out);
            break;
        case Predicate::Kind::True:
            break;
    }
}

std::vector<GuardFn> collectGuards(const AsyncNetwork& net, const AdvanceOptions& opts) {
    std::vector<GuardFn> raw;
    for (const auto& cl : net.clauses) collectAtomGuards(cl.when, raw);

    // Deduplicate atom guards on (kind, nodes, level); capture flags merge.
    std::vector<GuardFn> out;
    std::map<std::tuple<int, NodeId, NodeId, double>, std::size_t> seen;
    for (const auto& g : raw) {
        auto key = std::make_tuple(static_cast<int>(g.kind), g.a, g.b, g.c);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, out.size());
            out.push_back(g);
        } else {
            GuardFn& h = out[it->second];
            h.capture = h.capture || g.capture;
            h.tol = std::max(h.tol, g.tol);
        }
    }
    // Watches stay separate entries even when they coincide with an atom
    // level: both the terminal-hit log and the clause re-evaluation must fire.
    for (std::size_t w = 0; w < opts.watches.size(); ++w) {
        const Watch& wa = opts.watches[w];
        out.push_back({GuardFn::Kind::Level, wa.node, 0, wa.threshold, false, 0.0,
                       static_cast<int>(w)});
    }
    return out;
}

// A tentative capture produced by a crossing of an `at` threshold or a meet
// level. Applied speculatively; kept only while the joint evaluation pins the
// captured node(s) with an exactly zero field.
struct Candidate {
    bool isMeet = false;
    NodeId a = 0, b = 0;  ///< b only for meet
    double level = 0.0;   ///< at threshold (meet latches at the midpoint)
    bool held = false;
    bool logged = false;
    std::vector<std::pair<NodeId, double>> restore;
};

std::string joinIds(const std::vector<std::string>& ids, char sep = '|') {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) s += sep;
        s += ids[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------
class Engine {
  public:
    Engine(const AsyncNetwork& net, const State& x0, const LatchState& latches0, double t0,
           double tEnd, const IntegratorConfig& cfg, const AdvanceOptions& opts)
        : net_(net), cfg_(cfg), opts_(opts), x_(x0), latches_(latches0), t_(t0), tEnd_(tEnd) {
        const std::size_t k = net_.size();
        if (x_.size() != k || latches_.size() != k)
            throw ConfigError("advance: state/latch size does not match the network");
        if (tEnd_ < t_) throw ConfigError("advance: tEnd < t0");
        if (cfg_.hMax <= 0 || cfg_.tEventLocalize <= 0 || cfg_.latchEps <= 0)
            throw ConfigError("advance: integrator steps/tolerances must be positive");
        if (cfg_.zenoLimit < 2) throw ConfigError("advance: zenoLimit must be at least 2");
        startTimes_ = opts_.startTimes;
        if (startTimes_.empty()) startTimes_.assign(k, t_);
        if (startTimes_.size() != k)
            throw ConfigError("advance: startTimes size does not match the network");
        frozen_.resize(k);
        for (std::size_t i = 0; i < k; ++i) frozen_[i] = startTimes_[i] > t_ ? 1 : 0;
        for (double s : startTimes_)
            if (s > t_) schedule_.push_back(s);
        std::sort(schedule_.begin(), schedule_.end());
        schedule_.erase(std::unique(schedule_.begin(), schedule_.end()), schedule_.end());
        guards_ = collectGuards(net_, opts_);
        traj_.t0 = t_;
    }

    Trajectory run() {
        std::vector<NodeId> initial;
        for (std::size_t i = 0; i < net_.size(); ++i)
            if (!frozen_[i]) initial.push_back(static_cast<NodeId>(i + 1));
        settle(initialCaptures(initial), "init", true);
        pushSample();
        if (shouldStop()) return finish();

        while (t_ < tEnd_) {
            resolveStable();
            if (stallCheck()) break;

            const double tStop = std::min(tEnd_, nextScheduleTime());
            segLinear_ = allConstantFlow();
            const bool capped = segLinear_ || (tStop - t_) <= cfg_.hMax;
            const double h = capped ? (tStop - t_) : cfg_.hMax;
            segVel_ = flowVelocities(x_);

            State xTry = stepFrom(x_, h);
            double tau = 0.0;
            std::vector<std::size_t> hit;
            if (!locateCrossings(xTry, h, tau, hit)) {
                x_ = std::move(xTry);
                t_ = capped ? tStop : t_ + h;
                pushSample();
                processWindowStarts();
                if (shouldStop()) break;
                continue;
            }

            // Advance to the localized event time and process the tie group.
            x_ = stepFrom(x_, tau);
            t_ = (capped && tau == h) ? tStop : t_ + tau;
            noteEventForZeno();

            std::vector<Candidate> cands;
            for (std::size_t gi : hit) {
                const GuardFn& g = guards_[gi];
                if (g.watch >= 0) {
                    traj_.events.push_back({t_, EventKind::TerminalHit, g.a, g.c, lastActive_,
                                            opts_.watches[g.watch].tag});
                } else if (g.capture) {
                    Candidate c;
                    c.isMeet = (g.kind == GuardFn::Kind::Meet);
                    c.a = g.a;
                    c.b = g.b;
                    c.level = g.c;
                    cands.push_back(c);
                }
            }
            settle(std::move(cands), "", false);
            pushSample();
            processWindowStarts();
            if (shouldStop()) break;
        }
        return finish();
    }

  private:
    // --- flow ---------------------------------------------------------------

    /// Velocity used for stepping: frozen and latched nodes are pinned.
    std::vector<double> flowVelocities(const State& s) const {
        std::vector<double> v(net_.size(), 0.0);
        for (std::size_t i = 0; i < net_.size(); ++i) {
            if (frozen_[i] || latches_[i].has_value()) continue;
            v[i] = seg_.specs[i]->eval(static_cast<NodeId>(i + 1), s);
        }
        return v;
    }

    /// Velocity the resolved field would impose, ignoring latch pinning: used
    /// to decide whether a capture holds and whether a latch releases.
    std::vector<double> rawVelocities(const State& s) const {
        std::vector<double> v(net_.size(), 0.0);
        for (std::size_t i = 0; i < net_.size(); ++i) {
            if (frozen_[i]) continue;
            v[i] = seg_.specs[i]->eval(static_cast<NodeId>(i + 1), s);
        }
        return v;
    }

    bool allConstantFlow() const {
        for (std::size_t i = 0; i < net_.size(); ++i) {
            if (frozen_[i] || latches_[i].has_value()) continue;
            if (!seg_.specs[i]->isConstant()) return false;
        }
        return true;
    }

    State stepFrom(const State& s, double h) const {
        const std::size_t k = net_.size();
        State out(k);
        if (segLinear_) {
            for (std::size_t i = 0; i < k; ++i) out[i] = s[i] + segVel_[i] * h;
            return out;
        }
        auto axpy = [&](const State& base, double f, const std::vector<double>& d) {
            State r(k);
            for (std::size_t i = 0; i < k; ++i) r[i] = base[i] + f * d[i];
            return r;
        };
        auto k1 = flowVelocities(s);
        auto k2 = flowVelocities(axpy(s, h / 2, k1));
        auto k3 = flowVelocities(axpy(s, h / 2, k2));
        auto k4 = flowVelocities(axpy(s, h, k3));
        for (std::size_t i = 0; i < k; ++i)
            out[i] = s[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        return out;
    }

    // --- event localization ---------------------------------------------------

    /// Detect the earliest guard crossing within (0, h]. Returns false when no
    /// guard crosses. On success `tau` is the localized event offset and `hit`
    /// lists all guards crossing within one localization window of it.
    bool locateCrossings(const State& xTry, double h, double& tau, std::vector<std::size_t>& hit) {
        struct Cross {
            std::size_t gi;
            double tau;
        };
        std::vector<Cross> crossings;
        for (std::size_t gi = 0; gi < guards_.size(); ++gi) {
            const GuardFn& g = guards_[gi];
            if (g.kind == GuardFn::Kind::Meet && (frozen_[g.a - 1] || frozen_[g.b - 1]))
                continue;  // a pre-start node is not on the network yet
            const double s0 = g.eval(x_);
            if (s0 == 0.0) continue;  // truth at an exact threshold is settled by the probe
            const double s1 = g.eval(xTry);
            const bool crossed = (s0 < 0.0 && s1 >= 0.0) || (s0 > 0.0 && s1 <= 0.0);
            if (!crossed) continue;
            crossings.push_back({gi, bisect(g, s0, h)});
        }
        if (crossings.empty()) return false;
        tau = std::numeric_limits<double>::infinity();
        for (const auto& c : crossings) tau = std::min(tau, c.tau);
        for (const auto& c : crossings)
            if (c.tau <= tau + cfg_.tEventLocalize) hit.push_back(c.gi);
        return true;
    }

    /// Shrink [lo, hi] around the first sign change; the returned offset lies
    /// on the crossed side and, when feasible, within latchEps of the level so
    /// that a capture snap moves the coordinate by at most latchEps.
    double bisect(const GuardFn& g, double s0, double h) const {
        double lo = 0.0, hi = h;
        double ghi = g.eval(stepFrom(x_, hi));
        for (int it = 0; it < 80; ++it) {
            if (hi - lo <= cfg_.tEventLocalize && std::fabs(ghi) <= cfg_.latchEps) break;
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double gm = g.eval(stepFrom(x_, mid));
            if (gm != 0.0 && ((gm < 0.0) == (s0 < 0.0))) {
                lo = mid;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        return hi;
    }

    // --- event processing -----------------------------------------------------

    /// Active-set resolution with the right-limit probe fixed point. The probe
    /// nudges every coordinate by its flow velocity over latchEps so strict
    /// atoms evaluated exactly on a threshold take their right-limit truth.
    void resolveStable() {
        seg_ = resolveFields(net_, x_, latches_, nullptr, &frozen_);
        for (int it = 0; it < 8; ++it) {
            State probe = x_;
            auto v = flowVelocities(x_);
            for (std::size_t i = 0; i < net_.size(); ++i) probe[i] += v[i] * cfg_.latchEps;
            FieldResolution next = resolveFields(net_, x_, latches_, &probe, &frozen_);
            if (next.eval.activeIds == seg_.eval.activeIds) {
                seg_ = std::move(next);
                return;
            }
            seg_ = std::move(next);
        }
        throw ZenoSuspected(t_);
    }

    void applyCandidate(Candidate& c) {
        const double snapCap = 64.0 * cfg_.latchEps;
        if (c.isMeet) {
            if (frozen_[c.a - 1] || frozen_[c.b - 1] || latches_[c.a - 1] || latches_[c.b - 1])
                return;
            const double m = 0.5 * (x_[c.a - 1] + x_[c.b - 1]);
            if (std::fabs(x_[c.a - 1] - m) > snapCap || std::fabs(x_[c.b - 1] - m) > snapCap)
                throw std::logic_error("capture snap exceeded the localization budget");
            c.restore = {{c.a, x_[c.a - 1]}, {c.b, x_[c.b - 1]}};
            x_[c.a - 1] = x_[c.b - 1] = m;
            latches_[c.a - 1] = Latch{m};
            latches_[c.b - 1] = Latch{m};
            c.level = m;
            c.held = true;
        } else {
            if (frozen_[c.a - 1] || latches_[c.a - 1]) return;
            if (std::fabs(x_[c.a - 1] - c.level) > snapCap)
                throw std::logic_error("capture snap exceeded the localization budget");
            c.restore = {{c.a, x_[c.a - 1]}};
            x_[c.a - 1] = c.level;
            latches_[c.a - 1] = Latch{c.level};
            c.held = true;
        }
    }

    void revertCandidate(Candidate& c) {
        for (const auto& [n, orig] : c.restore) {
            x_[n - 1] = orig;
            latches_[n - 1].reset();
        }
        c.held = false;
    }

    /// Joint event resolution at the current time: apply tentative captures,
    /// then iterate (revert unpinned captures) / (release latches no longer
    /// pinned) / (probe refinement) until the evaluation is stable.
    void settle(std::vector<Candidate> cands, const std::string& note, bool forceSwitch) {
        for (auto& c : cands) applyCandidate(c);
        for (int round = 0; round < 16; ++round) {
            resolveStable();
            const auto raw = rawVelocities(x_);
            bool changed = false;
            for (auto& c : cands) {
                if (!c.held) continue;
                bool pinned = raw[c.a - 1] == 0.0 && (!c.isMeet || raw[c.b - 1] == 0.0);
                if (!pinned) {
                    revertCandidate(c);
                    changed = true;
                }
            }
            if (changed) continue;
            for (std::size_t i = 0; i < net_.size(); ++i) {
                if (!latches_[i].has_value() || raw[i] == 0.0) continue;
                bool heldHere = false;
                for (const auto& c : cands)
                    if (c.held && (c.a == static_cast<NodeId>(i + 1) ||
                                   (c.isMeet && c.b == static_cast<NodeId>(i + 1))))
                        heldHere = true;
                if (heldHere) continue;
                traj_.events.push_back({t_, EventKind::Unlatch, static_cast<NodeId>(i + 1),
                                        latches_[i]->threshold, seg_.eval.activeIds, ""});
                latches_[i].reset();
                changed = true;
            }
            if (changed) continue;

            for (auto& c : cands) {
                if (!c.held || c.logged) continue;
                traj_.events.push_back({t_, EventKind::Latch, c.a, c.level, seg_.eval.activeIds,
                                        c.isMeet ? "meet" : ""});
                if (c.isMeet)
                    traj_.events.push_back(
                        {t_, EventKind::Latch, c.b, c.level, seg_.eval.activeIds, "meet"});
                c.logged = true;
            }
            if (forceSwitch || seg_.eval.activeIds != lastActive_)
                traj_.events.push_back({t_, EventKind::Switch, 0, 0.0, seg_.eval.activeIds, note});
            lastActive_ = seg_.eval.activeIds;
            return;
        }
        throw ZenoSuspected(t_);
    }

    std::vector<Candidate> initialCaptures(const std::vector<NodeId>& started) const {
        std::vector<Candidate> cands;
        auto justStarted = [&](NodeId n) {
            return std::find(started.begin(), started.end(), n) != started.end();
        };
        for (const auto& g : guards_) {
            if (!g.capture) continue;
            if (g.kind == GuardFn::Kind::Level) {
                if (!justStarted(g.a) || latches_[g.a - 1]) continue;
                if (std::fabs(x_[g.a - 1] - g.c) <= cfg_.latchEps)
                    cands.push_back({false, g.a, 0, g.c, false, false, {}});
            } else if (g.kind == GuardFn::Kind::Meet) {
                if (!justStarted(g.a) && !justStarted(g.b)) continue;
                if (frozen_[g.a - 1] || frozen_[g.b - 1]) continue;
                if (latches_[g.a - 1] || latches_[g.b - 1]) continue;
                if (std::fabs(x_[g.a - 1] - x_[g.b - 1]) <= std::max(g.tol, cfg_.latchEps))
                    cands.push_back({true, g.a, g.b, 0.0, false, false, {}});
            }
        }
        return cands;
    }

    // --- schedule, stall, bookkeeping -----------------------------------------

    double nextScheduleTime() const {
        return scheduleIdx_ < schedule_.size() ? schedule_[scheduleIdx_]
                                               : std::numeric_limits<double>::infinity();
    }

    void processWindowStarts() {
        while (scheduleIdx_ < schedule_.size() && t_ >= schedule_[scheduleIdx_]) {
            const double w = schedule_[scheduleIdx_];
            std::vector<NodeId> started;
            for (std::size_t i = 0; i < net_.size(); ++i) {
                if (frozen_[i] && startTimes_[i] == w) {
                    frozen_[i] = 0;
                    started.push_back(static_cast<NodeId>(i + 1));
                }
            }
            ++scheduleIdx_;
            settle(initialCaptures(started), "start " + joinIds(idsOf(started), ','), true);
            pushSample();
        }
    }

    static std::vector<std::string> idsOf(const std::vector<NodeId>& ns) {
        std::vector<std::string> out;
        for (NodeId n : ns) out.push_back(std::to_string(n));
        return out;
    }

    /// True when the state can provably never move again: every started node
    /// is latched or carries a constant zero field, and no starts are pending.
    bool stallCheck() {
        if (scheduleIdx_ < schedule_.size()) return false;
        for (std::size_t i = 0; i < net_.size(); ++i) {
            if (frozen_[i] || latches_[i].has_value()) continue;
            const FieldSpec* s = seg_.specs[i];
            if (!s->isConstant()) return false;
            if (s->eval(static_cast<NodeId>(i + 1), x_) != 0.0) return false;
        }
        traj_.events.push_back(
            {t_, EventKind::Stall, 0, t_, seg_.eval.activeIds, "all velocities zero"});
        if (tEnd_ > t_) {
            t_ = tEnd_;
            pushSample();
        }
        return true;
    }

    void noteEventForZeno() {
        recentEventTimes_.push_back(t_);
        if (recentEventTimes_.size() > static_cast<std::size_t>(cfg_.zenoLimit))
            recentEventTimes_.pop_front();
        if (recentEventTimes_.size() == static_cast<std::size_t>(cfg_.zenoLimit) &&
            t_ - recentEventTimes_.front() <= 1e4 * cfg_.tEventLocalize)
            throw ZenoSuspected(t_);
        if (++eventsTotal_ > 2000000) throw ZenoSuspected(t_);
    }

    void pushSample() {
        if (!traj_.samples.empty() && traj_.samples.back().t == t_) {
            traj_.samples.back().x = x_;
            return;
        }
        traj_.samples.push_back({t_, x_});
    }

    bool shouldStop() { return opts_.stopWhen && opts_.stopWhen(traj_); }

    Trajectory finish() {
        pushSample();
        traj_.t1 = t_;
        traj_.finalLatches = latches_;
        return std::move(traj_);
    }

    const AsyncNetwork& net_;
    const IntegratorConfig& cfg_;
    const AdvanceOptions& opts_;

    State x_;
    LatchState latches_;
    double t_ = 0.0, tEnd_ = 0.0;
    std::vector<double> startTimes_;
    std::vector<char> frozen_;
    std::vector<double> schedule_;
    std::size_t scheduleIdx_ = 0;
    std::vector<GuardFn> guards_;

    FieldResolution seg_;
    bool segLinear_ = false;
    std::vector<double> segVel_;
    std::vector<std::string> lastActive_{"\x01uninitialized"};

    std::deque<double> recentEventTimes_;
    long eventsTotal_ = 0;

    Trajectory traj_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

Trajectory advance(const AsyncNetwork& net, const State& x0, const LatchState& latches0,
                   double t0, double tEnd, const IntegratorConfig& cfg,
                   const AdvanceOptions& opts) {
    return Engine(net, x0, latches0, t0, tEnd, cfg, opts).run();
}

Trajectory advance(const AsyncNetwork& net, const State& x0, double tEnd,
                   const IntegratorConfig& cfg) {
    return advance(net, x0, noLatches(net.size()), 0.0, tEnd, cfg);
}

double semigroupCheck(const AsyncNetwork& net, const State& x0, double s, double t,
                      const IntegratorConfig& cfg) {
    Trajectory whole = advance(net, x0, noLatches(net.size()), 0.0, s + t, cfg);
    Trajectory first = advance(net, x0, noLatches(net.size()), 0.0, s, cfg);
    Trajectory second = advance(net, first.finalState(), first.finalLatches, s, s + t, cfg);
    return stateDistance(net, whole.finalState(), second.finalState());
}

double stateDistance(const AsyncNetwork& net, const State& a, const State& b) {
    if (a.size() != net.size() || b.size() != net.size())
        throw ConfigError("stateDistance: state size does not match the network");
    double d = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const double di = net.spaces[i] == PhaseSpace::Circle ? circleDist(a[i], b[i])
                                                              : std::fabs(a[i] - b[i]);
        d = std::max(d, di);
    }
    return d;
}

State Trajectory::stateAt(double t) const {
    if (samples.empty()) throw ConfigError("stateAt: empty trajectory");
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double v) { return s.t < v; });
    if (it->t == t) return it->x;
    const Sample& hi = *it;
    const Sample& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    State out(lo.x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lo.x[i] + w * (hi.x[i] - lo.x[i]);
    return out;
}

std::vector<std::string> Trajectory::activeAt(double t) const {
    std::vector<std::string> out;
    for (const auto& e : events) {
        if (e.t > t) break;
        out = e.active;
    }
    return out;
}

void writeCsv(std::ostream& os, const AsyncNetwork& net, const Trajectory& traj,
              double sampleDt) {
    os << "t";
    for (std::size_t i = 1; i <= net.size(); ++i) os << ",x_" << i;
    os << ",clauses\n";
    os.precision(15);

    std::vector<double> times;
    for (const auto& s : traj.samples) times.push_back(s.t);
    if (sampleDt > 0.0) {
        for (long k = 0;; ++k) {
            const double t = traj.t0 + static_cast<double>(k) * sampleDt;
            if (t > traj.t1 + sampleDt * 1e-9) break;
            times.push_back(t);
        }
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
    }

    for (double t : times) {
        State x = traj.stateAt(t);
        os << t;
        for (std::size_t i = 0; i < net.size(); ++i) {
            const double v = net.spaces[i] == PhaseSpace::Circle ? wrapCircle(x[i]) : x[i];
            os << ',' << v;
        }
        os << ',' << joinIds(traj.activeAt(t)) << '\n';
    }
}

void writeEventsJsonl(std::ostream& os, const Trajectory& traj) {
    for (const auto& e : traj.events) {
        nlohmann::json j{{"t", e.t},           {"kind", eventKindName(e.kind)},
                         {"node", e.node},     {"value", e.value},
                         {"active", e.active}, {"note", e.note}};
        os << j.dump() << '\n';
    }
}

}  // namespace fan
