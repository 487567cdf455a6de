#pragma once

#include "cost_model.hpp"
#include "errors.hpp"
#include "max_flow.hpp"
#include "network.hpp"
#include "rational.hpp"
#include "shortest_path.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace convexflow {

enum class SolveStatus { Optimal, Infeasible, Unbounded };

inline std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Backend contract.

struct TrialResult {
    std::vector<Rational> flow;
    // Node potentials making every F-arc tight. Absent entries stand for +inf
    // (a good priced at zero).
    std::vector<std::optional<Rational>> potentials;
};

struct ErrorResult {
    std::optional<Rational> err;                  // nullopt = infinity
    std::optional<std::vector<Rational>> witness; // absent if err is an unattained infimum
};

class BackendHooks {
public:
    virtual ~BackendHooks() = default;
    // F-tight x with x = 0 off F and rho_x = b_hat.
    virtual TrialResult trial(const RevealedArcSet& F, std::span<const Rational> b_hat) const = 0;
    // err_F(f) for an F-tight f, with potentials certifying (err, F)-feasibility.
    virtual ErrorResult error(std::span<const Rational> f, const RevealedArcSet& F) const = 0;
    // Potentials certifying (delta, F)-feasibility of f, for any delta > err_F(f).
    virtual std::optional<std::vector<Rational>> witness(std::span<const Rational> f, const RevealedArcSet& F,
                                                         const Rational& delta) const = 0;
};

// ---------------------------------------------------------------------------
// Event log.

enum class EventType { PhaseStart, Augment, Extend, Reroute, Adjust, TrialSuccess, TrialFail, Halve, Terminate };

inline std::string to_string(EventType t)
{
    switch (t) {
    case EventType::PhaseStart: return "phase_start";
    case EventType::Augment: return "augment";
    case EventType::Extend: return "extend";
    case EventType::Reroute: return "reroute";
    case EventType::Adjust: return "adjust";
    case EventType::TrialSuccess: return "trial_success";
    case EventType::TrialFail: return "trial_fail";
    case EventType::Halve: return "halve";
    case EventType::Terminate: return "terminate";
    }
    return "?";
}

struct PathStep {
    ArcId arc;
    bool forward;
    friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct Event {
    EventType type;
    std::size_t phase;
    Rational delta;
    std::vector<PathStep> path;   // Augment, Reroute
    std::optional<ArcId> arc;     // Extend, Reroute
    std::optional<Rational> value; // excess, err or rerouted amount
    std::string note;
};

// ---------------------------------------------------------------------------
// Runtime-checked invariants.

struct CheckCounter {
    std::size_t checks = 0;
    std::size_t violations = 0;
};

struct InvariantReport {
    CheckCounter adjust_excess;        // Ex(after) <= Ex(before) + m_N delta'
    CheckCounter augmentations;        // <= 2n + m_N per phase
    CheckCounter phase_excess;         // Ex <= (2n+m_N) delta at start, <= n delta at end
    CheckCounter multiples;            // f off F is a multiple of delta in the main part
    CheckCounter error_bound;          // err <= 2(2n+m+4) m delta at every trial
    CheckCounter restricted_sign;      // f >= 0 on restricted arcs
    CheckCounter certificate;          // (delta, F)-feasibility by direct scan
    CheckCounter phase_bound;          // phases <= (n+m_N) 2 ceil(log2(8(2n+m+4)m)) + 1
    CheckCounter revealed_tight;       // every arc of F tight at the optimum
    std::size_t max_augmentations = 0;
    std::size_t phase_limit = 0;
    std::vector<std::string> messages;

    std::size_t total_violations() const
    {
        return adjust_excess.violations + augmentations.violations + phase_excess.violations +
               multiples.violations + error_bound.violations + restricted_sign.violations +
               certificate.violations + phase_bound.violations + revealed_tight.violations;
    }
};

struct EngineOptions {
    bool strict = false;                    // throw on the first violated invariant
    std::optional<std::size_t> max_phases;  // hard stop; default is a multiple of the phase bound
};

struct EngineResult {
    SolveStatus status = SolveStatus::Optimal;
    std::vector<Rational> flow;
    std::vector<Rational> potentials;
    std::vector<ArcId> revealed;
    std::size_t phases = 0;
    Rational initial_delta = 0;
    std::vector<Event> events;
    InvariantReport report;
};

// Phase bound (n + m_N) * 2 ceil(log2(8(2n+m+4)m)) + 1.
inline std::size_t phase_bound(std::size_t n, std::size_t m, std::size_t m_nonlinear)
{
    Rational T = Rational(8 * (2 * n + m + 4)) * Rational(std::max<std::size_t>(m, 1));
    return (n + m_nonlinear) * 2 * ceil_log2(T) + 1;
}

// ---------------------------------------------------------------------------
// Potential maintenance helpers shared by Basic and Enhanced.

// Label-correcting search for potentials with nonnegative reduced costs.
template <class Scale>
std::optional<std::vector<Rational>> feasible_potentials(std::size_t n, std::span<const WeightedArc> arcs)
{
    std::vector<Rational> p(n, Scale::unit());
    for (std::size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (const auto& a : arcs) {
            if (!a.cost) continue;
            Rational cand = Scale::combine(p[a.tail], *a.cost);
            if (cand < p[a.head]) {
                p[a.head] = std::move(cand);
                changed = true;
            }
        }
        if (!changed) return p;
    }
    return std::nullopt;
}

// (f, pi) satisfies pi_j - pi_i <= C'(f + delta) on every arc of E_f^F(delta).
template <class Scale>
std::optional<std::string> feasibility_violation(const FlowNetwork& net, std::span<const Rational> f,
                                                 const RevealedArcSet& F, const Rational& delta,
                                                 std::span<const Rational> pi)
{
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        Rational fwd = Scale::reduce(Scale::slope(arc.cost, f[a] + delta), pi[arc.tail], pi[arc.head]);
        if (fwd < Scale::unit()) return "arc " + std::to_string(a) + " forward reduced cost " + to_string(fwd);
        if (reverse_residual(F, f[a], a, delta)) {
            Rational rev = Scale::reduce(Scale::slope(arc.cost, f[a] - delta), pi[arc.tail], pi[arc.head]);
            if (rev > Scale::unit()) return "arc " + std::to_string(a) + " reverse reduced cost " + to_string(rev);
        }
    }
    return std::nullopt;
}

template <class Scale>
std::vector<WeightedArc> weighted_residual(const FlowNetwork& net, std::span<const Rational> f,
                                           const RevealedArcSet& F, const Rational& delta,
                                           std::vector<ResidualArc>* layout = nullptr)
{
    auto res = residual_arcs(net, f, F, delta);
    std::vector<WeightedArc> out;
    out.reserve(res.size());
    for (const auto& r : res) {
        const CostDescriptor& cost = net.arc(r.arc).cost;
        if (r.forward) out.push_back({r.tail, r.head, Scale::slope(cost, f[r.arc] + delta)});
        else out.push_back({r.tail, r.head, Scale::reverse_cost(cost, f[r.arc] - delta)});
    }
    if (layout) *layout = std::move(res);
    return out;
}

// Adjust, arc by arc: move each arc by +-delta where its slope and the potentials disagree.
template <class Scale>
std::vector<Rational> adjust(const FlowNetwork& net, std::vector<Rational> f, std::span<const Rational> pi,
                             const Rational& delta, const RevealedArcSet& F)
{
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        bool up = Scale::reduce(Scale::slope(arc.cost, f[a] + delta), pi[arc.tail], pi[arc.head]) < Scale::unit();
        bool down = (f[a] >= delta || F.contains(a)) &&
                    Scale::reduce(Scale::slope(arc.cost, f[a] - delta), pi[arc.tail], pi[arc.head]) > Scale::unit();
        if (up && down) throw InvariantViolation("adjust: both conditions hold on arc " + std::to_string(a));
        if (up) f[a] += delta;
        else if (down) f[a] -= delta;
    }
    return f;
}

// Turn an F-optimal vector into an optimal flow by one feasible
// flow computation over the tight linear arcs H.
template <class Scale>
std::vector<Rational> f_optimal_to_optimal(const FlowNetwork& net, std::span<const Rational> f,
                                           std::span<const Rational> pi)
{
    auto rho = node_balance(net, f);
    bool feasible = rho == net.demands();
    for (ArcId a = 0; a < net.arc_count() && feasible; ++a) feasible = f[a] >= 0;
    if (feasible) return {f.begin(), f.end()};

    std::vector<BoundedArc> bounded;
    bounded.reserve(net.arc_count());
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        bool tight = arc.cost.is_linear() &&
                     Scale::reduce(Scale::slope(arc.cost, f[a]), pi[arc.tail], pi[arc.head]) == Scale::unit();
        if (tight) bounded.push_back({arc.tail, arc.head, 0, std::nullopt});
        else {
            if (f[a] < 0) throw InvariantViolation("f_optimal_to_optimal: negative flow on non-tight arc");
            bounded.push_back({arc.tail, arc.head, f[a], f[a]});
        }
    }
    auto x = feasible_flow(net.node_count(), bounded, net.demands());
    if (!x) throw InvariantViolation("f_optimal_to_optimal: circulation infeasible");
    return *x;
}

// ---------------------------------------------------------------------------
// Engine.

struct KeepAndHalve {};
struct NewState {
    std::vector<Rational> flow;
    Rational delta;
    std::vector<Rational> potentials;
};
struct Terminate {
    std::vector<Rational> flow;
    std::vector<Rational> potentials;
};
using TrialOutcome = std::variant<KeepAndHalve, NewState, Terminate>;

template <class Scale>
class ScalingEngine {
public:
    ScalingEngine(const FlowNetwork& net, const BackendHooks& hooks, EngineOptions opt = {})
        : net_(net), hooks_(hooks), opt_(opt), n_(net.node_count()), m_(net.arc_count()),
          mN_(net.nonlinear_count()), F_(net)
    {
        if (net.mode() != Scale::mode) throw ContractViolation("engine scale does not match network mode");
        report_.phase_limit = phase_bound(n_, m_, mN_);
    }

    // State access, mainly for tests driving single steps.
    const Rational& delta() const { return delta_; }
    const std::vector<Rational>& flow() const { return f_; }
    const std::vector<Rational>& potentials() const { return pi_; }
    const RevealedArcSet& revealed() const { return F_; }
    const std::vector<Event>& events() const { return events_; }
    const InvariantReport& report() const { return report_; }
    std::size_t phase() const { return phase_; }

    void set_state(std::vector<Rational> f, std::vector<Rational> pi, Rational delta)
    {
        f_ = std::move(f);
        pi_ = std::move(pi);
        delta_ = std::move(delta);
    }
    void reveal(ArcId a) { F_.insert(a); }

    std::vector<Rational> gap() const
    {
        auto rho = node_balance(net_, f_);
        for (NodeId v = 0; v < n_; ++v) rho[v] -= net_.demand(v);
        return rho;
    }

    Rational current_excess() const { return excess(net_, f_); }

    void check_certificate()
    {
        auto bad = feasibility_violation<Scale>(net_, f_, F_, delta_, pi_);
        record(report_.certificate, !bad, bad ? "certificate: " + *bad : "");
    }

    // Adjust(delta') on the current state, with the excess bound checked.
    void adjust_to(const Rational& new_delta)
    {
        Rational before = current_excess();
        f_ = adjust<Scale>(net_, std::move(f_), pi_, new_delta, F_);
        Rational after = current_excess();
        record(report_.adjust_excess, after <= before + Rational(mN_) * new_delta,
               "adjust: excess grew from " + to_string(before) + " to " + to_string(after));
        check_restricted();
        log(EventType::Adjust, {}, std::nullopt, after);
    }

    // Main part of a phase. Returns the number of augmentations.
    std::size_t run_phase_main()
    {
        {
            Rational ex = current_excess();
            record(report_.phase_excess, ex <= Rational(2 * n_ + mN_) * delta_,
                   "phase start: excess " + to_string(ex) + " above (2n+m_N) delta");
        }
        bool multiples = true;
        for (ArcId a = 0; a < m_; ++a)
            if (!F_.contains(a)) {
                Rational q = f_[a] / delta_;
                if (q.get_den() != 1) multiples = false;
            }
        record(report_.multiples, multiples, "main part: flow off F is not a multiple of delta");

        std::size_t count = 0;
        for (;;) {
            auto g = gap();
            std::vector<bool> S(n_), T(n_);
            bool anyS = false, anyT = false;
            for (NodeId v = 0; v < n_; ++v) {
                S[v] = g[v] >= delta_;
                T[v] = g[v] <= -delta_;
                anyS = anyS || S[v];
                anyT = anyT || T[v];
            }
            if (!anyS || !anyT) break;
            std::vector<ResidualArc> layout;
            auto arcs = weighted_residual<Scale>(net_, f_, F_, delta_, &layout);
            auto sp = shortest_path<Scale>(n_, arcs, S, T, std::move(pi_));
            pi_ = std::move(sp.potentials);
            std::vector<PathStep> path;
            for (std::size_t e : sp.arcs) {
                const auto& r = layout[e];
                if (r.forward) f_[r.arc] += delta_;
                else f_[r.arc] -= delta_;
                path.push_back({r.arc, r.forward});
            }
            ++count;
            check_restricted();
            log(EventType::Augment, std::move(path));
        }
        report_.max_augmentations = std::max(report_.max_augmentations, count);
        record(report_.augmentations, count <= 2 * n_ + mN_,
               "main part: " + std::to_string(count) + " augmentations");
        Rational ex = current_excess();
        record(report_.phase_excess, ex <= Rational(n_) * delta_,
               "phase end: excess " + to_string(ex) + " above n delta");
        return count;
    }

    // Extend. Returns true if F grew.
    bool extend()
    {
        Rational threshold = Rational(2 * n_ + m_ + 1) * delta_;
        bool grew = false;
        for (ArcId a = 0; a < m_; ++a) {
            if (F_.contains(a) || f_[a] <= threshold) continue;
            if (F_.can_insert(a)) {
                F_.insert(a);
                grew = true;
                log(EventType::Extend, {}, a);
                continue;
            }
            const Arc& arc = net_.arc(a);
            auto route = F_.linear_path(arc.tail, arc.head);
            Rational amount = f_[a];
            std::vector<PathStep> path;
            for (auto [b, fwd] : route) {
                if (fwd) f_[b] += amount;
                else f_[b] -= amount;
                path.push_back({b, fwd});
            }
            f_[a] = 0;
            log(EventType::Reroute, std::move(path), a, amount);
        }
        return grew;
    }

    std::vector<Rational> anchored_demand() const
    {
        std::vector<Rational> sum(n_);
        std::vector<std::optional<NodeId>> anchor(n_);
        for (NodeId v = 0; v < n_; ++v) {
            std::size_t c = F_.component(v);
            sum[c] += net_.demand(v);
            if (!anchor[c]) anchor[c] = v;
        }
        if (auto t = net_.anchor()) anchor[F_.component(*t)] = *t;
        std::vector<Rational> b_hat = net_.demands();
        for (std::size_t c = 0; c < n_; ++c)
            if (anchor[c]) b_hat[*anchor[c]] -= sum[c];
        return b_hat;
    }

    TrialOutcome trial_and_error()
    {
        auto b_hat = anchored_demand();
        auto trial = hooks_.trial(F_, b_hat);
        auto& x = trial.flow;
        for (ArcId a = 0; a < m_; ++a)
            if (!F_.contains(a) && x[a] != 0) throw InvariantViolation("trial: nonzero flow off F");
        if (node_balance(net_, x) != b_hat) throw InvariantViolation("trial: conservation against b_hat fails");
        for (ArcId a = 0; a < m_; ++a)
            if (net_.arc(a).cost.is_restricted() && x[a] < 0)
                throw InvariantViolation("trial: negative flow on restricted arc " + std::to_string(a));

        auto err = hooks_.error(x, F_);
        Rational bound = Rational(2 * (2 * n_ + m_ + 4) * m_) * delta_;
        record(report_.error_bound, err.err && *err.err <= bound,
               "trial: err " + (err.err ? to_string(*err.err) : std::string("inf")) + " above " + to_string(bound));

        bool exact = b_hat == net_.demands();
        if (err.err && *err.err == 0 && exact) {
            if (!err.witness) throw InvariantViolation("trial: zero error without a witness at an exact trial");
            log(EventType::TrialSuccess, {}, std::nullopt, Rational(0), "terminate");
            return Terminate{std::move(x), std::move(*err.witness)};
        }
        if (!err.err || *err.err >= delta_ / 2) {
            log(EventType::TrialFail, {}, std::nullopt, err.err, "keep");
            return KeepAndHalve{};
        }
        Rational next = max_of(*err.err, excess(net_, x) / Rational(2 * n_ + mN_));
        if (next <= 0) throw InvariantViolation("trial: next delta is zero");
        std::optional<std::vector<Rational>> pi = std::move(err.witness);
        if (!pi) pi = hooks_.witness(x, F_, next);
        if (!pi) throw InvariantViolation("trial: backend produced no witness at the next delta");
        log(EventType::TrialSuccess, {}, std::nullopt, *err.err, "new_state");
        return NewState{std::move(x), std::move(next), std::move(*pi)};
    }

    EngineResult run()
    {
        f_.assign(m_, Rational(0));
        auto err0 = hooks_.error(f_, F_);
        EngineResult out;
        if (!err0.err) {
            out.status = has_feasible_flow() ? SolveStatus::Unbounded : SolveStatus::Infeasible;
            out.flow = f_;
            return finish(std::move(out));
        }
        delta_ = max_of(*err0.err, excess(net_, f_) / Rational(2 * n_ + mN_));
        out.initial_delta = delta_;
        if (delta_ == 0) {
            if (!err0.witness) throw InvariantViolation("run: zero initial delta without a witness");
            pi_ = std::move(*err0.witness);
            log(EventType::Terminate);
            return conclude(std::move(out), f_, pi_);
        }
        if (err0.witness) pi_ = std::move(*err0.witness);
        else {
            auto w = hooks_.witness(f_, F_, delta_);
            if (!w) throw InvariantViolation("run: no initial witness");
            pi_ = std::move(*w);
        }

        std::size_t limit = opt_.max_phases.value_or(4 * report_.phase_limit + 64);
        for (;;) {
            ++phase_;
            record(report_.phase_bound, phase_ <= report_.phase_limit,
                   "phase " + std::to_string(phase_) + " exceeds bound " + std::to_string(report_.phase_limit));
            if (phase_ > limit) throw InvariantViolation("run: phase limit reached");
            log(EventType::PhaseStart, {}, std::nullopt, current_excess());
            check_certificate();
            run_phase_main();
            bool grew = extend();
            if (grew && discrepancy(F_, net_.demands()) <= delta_) {
                auto outcome = trial_and_error();
                if (auto* t = std::get_if<Terminate>(&outcome)) {
                    log(EventType::Terminate);
                    return conclude(std::move(out), std::move(t->flow), std::move(t->potentials));
                }
                if (auto* s = std::get_if<NewState>(&outcome)) {
                    f_ = std::move(s->flow);
                    pi_ = std::move(s->potentials);
                    delta_ = std::move(s->delta);
                    check_restricted();
                    continue;
                }
            }
            adjust_to(delta_ / 2);
            delta_ /= 2;
            log(EventType::Halve);
        }
    }

private:
    void record(CheckCounter& c, bool ok, const std::string& message)
    {
        ++c.checks;
        if (ok) return;
        ++c.violations;
        if (report_.messages.size() < 32) report_.messages.push_back(message);
        if (opt_.strict) throw InvariantViolation(message);
    }

    void check_restricted()
    {
        bool ok = true;
        for (ArcId a = 0; a < m_; ++a)
            if (net_.arc(a).cost.is_restricted() && f_[a] < 0) ok = false;
        record(report_.restricted_sign, ok, "negative flow on a restricted arc");
    }

    void log(EventType type, std::vector<PathStep> path = {}, std::optional<ArcId> arc = std::nullopt,
             std::optional<Rational> value = std::nullopt, std::string note = {})
    {
        events_.push_back({type, phase_, delta_, std::move(path), arc, std::move(value), std::move(note)});
    }

    bool has_feasible_flow() const
    {
        std::vector<BoundedArc> arcs;
        for (ArcId a = 0; a < m_; ++a)
            if (net_.role(a) == ArcRole::Original) arcs.push_back({net_.arc(a).tail, net_.arc(a).head, 0, std::nullopt});
        return feasible_flow(n_, arcs, net_.demands()).has_value();
    }

    EngineResult conclude(EngineResult out, std::vector<Rational> f_hat, std::vector<Rational> pi)
    {
        auto f = f_optimal_to_optimal<Scale>(net_, f_hat, pi);
        RevealedArcSet none(net_);
        auto bad = feasibility_violation<Scale>(net_, f, none, Rational(0), pi);
        record(report_.certificate, !bad, bad ? "final: " + *bad : "");
        for (ArcId a : F_.arcs()) {
            const Arc& arc = net_.arc(a);
            bool tight = Scale::reduce(Scale::slope(arc.cost, f[a]), pi[arc.tail], pi[arc.head]) == Scale::unit();
            record(report_.revealed_tight, tight, "revealed arc " + std::to_string(a) + " not tight at the optimum");
        }
        out.status = SolveStatus::Optimal;
        for (ArcId a = 0; a < m_; ++a)
            if (net_.role(a) != ArcRole::Original && f[a] != 0) out.status = SolveStatus::Infeasible;
        f_ = f;
        pi_ = pi;
        out.flow = std::move(f);
        out.potentials = std::move(pi);
        return finish(std::move(out));
    }

    EngineResult finish(EngineResult out)
    {
        out.revealed = F_.arcs();
        out.phases = phase_;
        out.events = events_;
        out.report = report_;
        return out;
    }

    const FlowNetwork& net_;
    const BackendHooks& hooks_;
    EngineOptions opt_;
    std::size_t n_, m_, mN_;
    RevealedArcSet F_;
    Rational delta_ = 0;
    std::vector<Rational> f_;
    std::vector<Rational> pi_;
    std::size_t phase_ = 0;
    std::vector<Event> events_;
    InvariantReport report_;
};

inline EngineResult run_enhanced(const FlowNetwork& net, const BackendHooks& hooks, EngineOptions opt = {})
{
    if (!strongly_connected(net)) throw ContractViolation("run_enhanced: network is not strongly connected");
    net.validate();
    if (net.mode() == OracleMode::Additive) return ScalingEngine<AdditiveScale>(net, hooks, opt).run();
    return ScalingEngine<MultiplicativeScale>(net, hooks, opt).run();
}

// ---------------------------------------------------------------------------
// Basic algorithm (no revealed arcs, no termination), budgeted.

struct BasicRun {
    std::vector<Rational> flow;
    std::vector<Rational> potentials;
    Rational delta;                            // scale after the last halving
    std::vector<std::vector<Rational>> main_end; // flow at the end of each phase's main part
    InvariantReport report;
};

template <class Scale>
BasicRun run_basic_scaled(const FlowNetwork& net, const Rational& delta0, std::size_t budget)
{
    if (delta0 <= 0) throw ContractViolation("run_basic: delta0 must be positive");
    std::vector<Rational> zero(net.arc_count(), Rational(0));
    RevealedArcSet none(net);
    if (excess(net, zero) > Rational(2 * net.node_count() + net.arc_count()) * delta0)
        throw ContractViolation("run_basic: initial excess above (2n+m) delta0");
    auto arcs = weighted_residual<Scale>(net, zero, none, delta0);
    auto pi = feasible_potentials<Scale>(net.node_count(), arcs);
    if (!pi) throw ContractViolation("run_basic: zero flow is not delta0-feasible");

    struct NoHooks : BackendHooks {
        TrialResult trial(const RevealedArcSet&, std::span<const Rational>) const override { return {}; }
        ErrorResult error(std::span<const Rational>, const RevealedArcSet&) const override { return {}; }
        std::optional<std::vector<Rational>> witness(std::span<const Rational>, const RevealedArcSet&,
                                                     const Rational&) const override
        {
            return std::nullopt;
        }
    } hooks;
    ScalingEngine<Scale> engine(net, hooks);
    engine.set_state(zero, std::move(*pi), delta0);
    BasicRun out;
    for (std::size_t k = 0; k < budget; ++k) {
        engine.check_certificate();
        engine.run_phase_main();
        out.main_end.push_back(engine.flow());
        Rational half = engine.delta() / 2;
        engine.adjust_to(half);
        engine.set_state(engine.flow(), engine.potentials(), half);
    }
    out.flow = engine.flow();
    out.potentials = engine.potentials();
    out.delta = engine.delta();
    out.report = engine.report();
    return out;
}

inline BasicRun run_basic(const FlowNetwork& net, const Rational& delta0, std::size_t budget)
{
    if (!strongly_connected(net)) throw ContractViolation("run_basic: network is not strongly connected");
    if (net.mode() == OracleMode::Additive) return run_basic_scaled<AdditiveScale>(net, delta0, budget);
    return run_basic_scaled<MultiplicativeScale>(net, delta0, budget);
}

}
