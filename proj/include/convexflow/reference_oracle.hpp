#pragma once

// Brute-force solvers and checkers for validating the scaling engine on small
// instances. Apart from the backend's trial hook, nothing here calls engine
// code: shortest paths, union-find and max-flow are separate implementations.

#include "cost_model.hpp"
#include "network.hpp"
#include "rational.hpp"
#include "scaling_engine.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace convexflow::reference {

struct KktReport {
    bool optimal = true;
    std::optional<ArcId> arc;
    bool forward = true;
    Rational slack = 0;
    std::string reason;
};

namespace detail {

inline Rational slope(OracleMode mode, const CostDescriptor& c, const Rational& x)
{
    return mode == OracleMode::Additive ? derivative(c, x) : e_derivative(c, x);
}

// Slack of the constraint on arc a in the given direction; negative means violated.
// Additive: forward C'(x) - (pi_h - pi_t), reverse (pi_h - pi_t) - C'(x).
// Multiplicative: forward gamma mu_t / mu_h - 1, reverse 1 - gamma mu_t / mu_h.
inline Rational slack(const FlowNetwork& net, ArcId a, const Rational& x, std::span<const Rational> pi, bool forward)
{
    const Arc& arc = net.arc(a);
    Rational g = slope(net.mode(), arc.cost, x);
    Rational s = net.mode() == OracleMode::Additive ? Rational(g - pi[arc.head] + pi[arc.tail])
                                                    : Rational(g * pi[arc.tail] / pi[arc.head] - 1);
    return forward ? s : Rational(-s);
}

class Components {
public:
    explicit Components(std::size_t n) : up_(n)
    {
        for (std::size_t i = 0; i < n; ++i) up_[i] = i;
    }
    std::size_t root(std::size_t x) const
    {
        while (up_[x] != x) x = up_[x];
        return x;
    }
    bool join(std::size_t a, std::size_t b)
    {
        a = root(a), b = root(b);
        if (a == b) return false;
        up_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> up_;
};

// Dense augmenting-path max-flow; nullopt capacity is infinite.
class DenseFlow {
public:
    explicit DenseFlow(std::size_t n) : n_(n), cap_(n * n, Rational(0)), inf_(n * n, false), flow_(n * n, Rational(0)) {}

    void add(std::size_t u, std::size_t v, const std::optional<Rational>& c)
    {
        if (!c) inf_[u * n_ + v] = true;
        else cap_[u * n_ + v] += *c;
    }
    Rational flow(std::size_t u, std::size_t v) const { return flow_[u * n_ + v]; }

    Rational maximize(std::size_t s, std::size_t t)
    {
        Rational total = 0;
        for (;;) {
            std::vector<long> prev(n_, -1);
            prev[s] = static_cast<long>(s);
            std::vector<std::size_t> queue{s};
            for (std::size_t qi = 0; qi < queue.size() && prev[t] < 0; ++qi) {
                std::size_t u = queue[qi];
                for (std::size_t v = 0; v < n_; ++v)
                    if (prev[v] < 0 && room(u, v)) {
                        prev[v] = static_cast<long>(u);
                        queue.push_back(v);
                    }
            }
            if (prev[t] < 0) return total;
            std::optional<Rational> push;
            for (std::size_t v = t; v != s; v = static_cast<std::size_t>(prev[v])) {
                std::size_t u = static_cast<std::size_t>(prev[v]);
                auto r = residual(u, v);
                if (r && (!push || *r < *push)) push = r;
            }
            if (!push) return total; // unbounded path; callers never build one
            for (std::size_t v = t; v != s; v = static_cast<std::size_t>(prev[v])) {
                std::size_t u = static_cast<std::size_t>(prev[v]);
                flow_[u * n_ + v] += *push;
                flow_[v * n_ + u] -= *push;
            }
            total += *push;
        }
    }

private:
    std::optional<Rational> residual(std::size_t u, std::size_t v) const
    {
        if (inf_[u * n_ + v]) return std::nullopt;
        return cap_[u * n_ + v] - flow_[u * n_ + v];
    }
    bool room(std::size_t u, std::size_t v) const
    {
        auto r = residual(u, v);
        return !r || *r > 0;
    }

    std::size_t n_;
    std::vector<Rational> cap_;
    std::vector<bool> inf_;
    std::vector<Rational> flow_;
};

}

struct BoxArc {
    NodeId tail;
    NodeId head;
    Rational lower;
    std::optional<Rational> upper;
};

// Existence of x with lower <= x <= upper and inflow - outflow = demand.
// Parallel arcs are merged, so only existence is reported.
inline bool box_flow_exists(std::size_t n, std::span<const BoxArc> arcs, std::span<const Rational> demand)
{
    std::vector<Rational> need(demand.begin(), demand.end());
    Rational total = 0;
    for (const auto& d : demand) total += d;
    if (total != 0) return false;
    detail::DenseFlow g(n + 2);
    for (const auto& a : arcs) {
        if (a.upper && *a.upper < a.lower) return false;
        need[a.head] -= a.lower;
        need[a.tail] += a.lower;
        if (a.upper) g.add(a.tail, a.head, *a.upper - a.lower);
        else g.add(a.tail, a.head, std::nullopt);
    }
    Rational want = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (need[v] < 0) g.add(n, v, Rational(-need[v]));
        if (need[v] > 0) {
            g.add(v, n + 1, need[v]);
            want += need[v];
        }
    }
    return g.maximize(n, n + 1) == want;
}

inline bool feasible(const FlowNetwork& net)
{
    std::vector<BoxArc> arcs;
    for (const auto& a : net.arcs()) arcs.push_back({a.tail, a.head, 0, std::nullopt});
    return box_flow_exists(net.node_count(), arcs, net.demands());
}

// Exact KKT check: x is a feasible flow and pi certifies that E_x has no
// negative cycle under the derivative costs.
inline KktReport kkt_check(const FlowNetwork& net, std::span<const Rational> x, std::span<const Rational> pi)
{
    KktReport r;
    std::vector<Rational> rho(net.node_count());
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        if (x[a] < 0) return {false, a, true, x[a], "negative flow"};
        rho[net.arc(a).head] += x[a];
        rho[net.arc(a).tail] -= x[a];
    }
    for (NodeId v = 0; v < net.node_count(); ++v)
        if (rho[v] != net.demand(v)) return {false, std::nullopt, true, rho[v] - net.demand(v), "conservation at node " + std::to_string(v)};
    if (net.mode() == OracleMode::Multiplicative)
        for (const auto& p : pi)
            if (p <= 0) return {false, std::nullopt, true, p, "nonpositive potential"};
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        Rational s = detail::slack(net, a, x[a], pi, true);
        if (s < 0) return {false, a, true, s, "forward arc"};
        if (x[a] > 0) {
            s = detail::slack(net, a, x[a], pi, false);
            if (s < 0) return {false, a, false, s, "reverse arc"};
        }
    }
    return r;
}

// Potentials for x via Bellman-Ford on E_x, or nullopt if E_x has a negative cycle.
inline std::optional<std::vector<Rational>> optimality_potentials(const FlowNetwork& net, std::span<const Rational> x)
{
    bool mult = net.mode() == OracleMode::Multiplicative;
    struct Edge {
        NodeId from, to;
        Rational w;
    };
    std::vector<Edge> edges;
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        Rational g = detail::slope(net.mode(), arc.cost, x[a]);
        if (mult && g == 0) return std::nullopt; // derivative -inf on a usable arc
        edges.push_back({arc.tail, arc.head, g});
        if (x[a] > 0) edges.push_back({arc.head, arc.tail, mult ? Rational(1 / g) : Rational(-g)});
    }
    std::size_t n = net.node_count();
    std::vector<Rational> d(n, mult ? Rational(1) : Rational(0));
    for (std::size_t round = 0; round <= n; ++round) {
        bool moved = false;
        for (const auto& e : edges) {
            Rational c = mult ? Rational(d[e.from] * e.w) : Rational(d[e.from] + e.w);
            if (c < d[e.to]) {
                d[e.to] = c;
                moved = true;
            }
        }
        if (!moved) return d;
    }
    return std::nullopt;
}

struct BruteForceResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<Rational> flow;
    std::vector<Rational> potentials;
    std::vector<ArcId> support;
    std::size_t leaves = 0;
    std::size_t trials = 0;
};

// Enumerates linear-acyclic arc sets F with zero discrepancy, asks the backend
// for the F-tight vector with demands b, and returns the first one that is a
// nonnegative flow passing the KKT test.
inline BruteForceResult brute_force_support(const FlowNetwork& net, const BackendHooks& backend)
{
    std::size_t n = net.node_count(), m = net.arc_count();
    if (m > 24) throw ContractViolation("brute_force_support: too many arcs");
    BruteForceResult out;

    // Last arc index touching each node: past it, a node with b != 0 must already be covered.
    std::vector<long> last(n, -1);
    for (ArcId a = 0; a < m; ++a) last[net.arc(a).tail] = last[net.arc(a).head] = static_cast<long>(a);
    std::vector<std::vector<NodeId>> closes(m);
    for (NodeId v = 0; v < n; ++v) {
        if (net.demand(v) == 0) continue;
        if (last[v] < 0) {
            out.status = SolveStatus::Infeasible;
            return out;
        }
        closes[static_cast<std::size_t>(last[v])].push_back(v);
    }

    std::vector<bool> chosen(m, false);
    std::vector<int> cover(n, 0);
    bool found = false;

    auto leaf = [&]() {
        ++out.leaves;
        detail::Components comp(n);
        for (ArcId a = 0; a < m; ++a)
            if (chosen[a]) comp.join(net.arc(a).tail, net.arc(a).head);
        std::vector<Rational> sum(n);
        for (NodeId v = 0; v < n; ++v) sum[comp.root(v)] += net.demand(v);
        for (const auto& s : sum)
            if (s != 0) return;
        RevealedArcSet F(net);
        for (ArcId a = 0; a < m; ++a)
            if (chosen[a]) F.insert(a);
        ++out.trials;
        TrialResult t;
        try {
            t = backend.trial(F, net.demands());
        } catch (const ContractViolation&) {
            return;
        }
        for (const auto& v : t.flow)
            if (v < 0) return;
        auto pi = optimality_potentials(net, t.flow);
        if (!pi || !kkt_check(net, t.flow, *pi).optimal) return;
        found = true;
        out.status = SolveStatus::Optimal;
        out.flow = std::move(t.flow);
        out.potentials = std::move(*pi);
        for (ArcId a = 0; a < m; ++a)
            if (chosen[a]) out.support.push_back(a);
    };

    std::function<void(ArcId, const detail::Components&)> walk = [&](ArcId a, const detail::Components& lin) {
        if (found) return;
        if (a == m) return leaf();
        const Arc& arc = net.arc(a);
        auto closed_ok = [&]() {
            for (NodeId v : closes[a])
                if (cover[v] == 0) return false;
            return true;
        };
        // Include a.
        detail::Components next = lin;
        if (!arc.cost.is_linear() || next.join(arc.tail, arc.head)) {
            chosen[a] = true;
            ++cover[arc.tail];
            ++cover[arc.head];
            if (closed_ok()) walk(a + 1, next);
            --cover[arc.tail];
            --cover[arc.head];
            chosen[a] = false;
        }
        if (found) return;
        // Exclude a.
        if (closed_ok()) walk(a + 1, lin);
    };
    walk(0, detail::Components(n));
    if (found) return out;
    out.status = feasible(net) ? SolveStatus::Unbounded : SolveStatus::Infeasible;
    return out;
}

}
