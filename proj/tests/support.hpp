#pragma once

// Random instance generators and small helpers shared by the unit tests and
// the acceptance runner.

#include <convexflow/fisher.hpp>
#include <convexflow/network.hpp>
#include <convexflow/quadratic.hpp>
#include <convexflow/reference_oracle.hpp>
#include <convexflow/scaling_engine.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace cftest {

using namespace convexflow;
using Rng = std::mt19937_64;

inline long uniform(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// mpq_class(num, den) does not reduce; comparisons need canonical form.
inline Rational frac(long num, long den)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Integer demands in [-limit, limit] summing to zero.
inline std::vector<Rational> balanced_demand(Rng& rng, std::size_t n, long limit)
{
    for (;;) {
        std::vector<Rational> b(n);
        long sum = 0;
        for (std::size_t v = 0; v + 1 < n; ++v) {
            long x = uniform(rng, -limit / 2, limit / 2);
            b[v] = x;
            sum += x;
        }
        if (std::labs(sum) > limit) continue;
        b[n - 1] = -sum;
        std::shuffle(b.begin(), b.end(), rng);
        return b;
    }
}

// Arc endpoints, optionally led by a Hamiltonian cycle, then random pairs.
inline std::vector<std::pair<NodeId, NodeId>> random_endpoints(Rng& rng, std::size_t n, std::size_t m, bool cycle_first)
{
    std::vector<std::pair<NodeId, NodeId>> out;
    if (cycle_first && n >= 2 && m >= n) {
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) out.push_back({perm[i], perm[(i + 1) % n]});
    }
    while (out.size() < m) {
        NodeId u = static_cast<NodeId>(uniform(rng, 0, static_cast<long>(n) - 1));
        NodeId v = static_cast<NodeId>(uniform(rng, 0, static_cast<long>(n) - 1));
        if (u != v) out.push_back({u, v});
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

// Uncapacitated quadratic instance: n <= 8, m <= 12, c in 0..5, d in -5..5, |b| <= 20.
inline FlowNetwork random_quadratic(Rng& rng, std::size_t max_n = 8, std::size_t max_m = 12)
{
    std::size_t n = static_cast<std::size_t>(uniform(rng, 2, static_cast<long>(max_n)));
    std::size_t m = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(max_m)));
    FlowNetwork net(OracleMode::Additive);
    for (const auto& b : balanced_demand(rng, n, 20)) net.add_node(b);
    for (auto [u, v] : random_endpoints(rng, n, m, coin(rng, 0.8)))
        net.add_arc(u, v, CostDescriptor::quadratic(uniform(rng, 0, 5), uniform(rng, -5, 5)));
    return net;
}

// Capacitated quadratic instance: n' <= 6, m' <= 8, integer 0 <= lower <= upper <= 10.
inline CapacitatedInstance random_capacitated(Rng& rng, std::size_t max_n = 6, std::size_t max_m = 8)
{
    std::size_t n = static_cast<std::size_t>(uniform(rng, 2, static_cast<long>(max_n)));
    std::size_t m = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(max_m)));
    CapacitatedInstance inst;
    inst.demand = balanced_demand(rng, n, 12);
    for (auto [u, v] : random_endpoints(rng, n, m, coin(rng, 0.8))) {
        long lo = uniform(rng, 0, 4);
        long hi = uniform(rng, lo, 10);
        inst.arcs.push_back({u, v, CostDescriptor::quadratic(uniform(rng, 0, 5), uniform(rng, -5, 5)), lo, Rational(hi)});
    }
    // Most of the time, take demands from a flow inside the bounds so the instance is feasible.
    if (coin(rng, 0.75)) {
        std::fill(inst.demand.begin(), inst.demand.end(), Rational(0));
        for (const auto& a : inst.arcs) {
            Rational x = uniform(rng, a.lower.get_num().get_si(), a.upper->get_num().get_si());
            inst.demand[a.head] += x;
            inst.demand[a.tail] -= x;
        }
    }
    return inst;
}

// Bipartite incidence with every buyer and every good on at least one pair.
inline std::set<std::pair<std::size_t, std::size_t>> random_incidence(Rng& rng, std::size_t B, std::size_t G,
                                                                      std::size_t max_pairs)
{
    for (;;) {
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < B; ++i)
            pairs.insert({i, static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(G) - 1))});
        for (std::size_t j = 0; j < G; ++j)
            pairs.insert({static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(B) - 1)), j});
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < G; ++j)
                if (coin(rng, 0.4)) pairs.insert({i, j});
        if (pairs.size() <= max_pairs) return pairs;
    }
}

// Linear Fisher market: |B|, |G| <= 4, budgets and utilities integers in 1..10.
inline LinearMarket random_linear_market(Rng& rng, std::size_t max_side = 4)
{
    std::size_t B = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(max_side)));
    std::size_t G = static_cast<std::size_t>(uniform(rng, 1, static_cast<long>(max_side)));
    LinearMarket mkt;
    for (std::size_t i = 0; i < B; ++i) mkt.budgets.push_back(uniform(rng, 1, 10));
    mkt.goods = G;
    for (auto [i, j] : random_incidence(rng, B, G, B * G))
        mkt.utilities.push_back({i, j, uniform(rng, 1, 10)});
    return mkt;
}

// Spending-constraint market with at most max_segments segments in total.
inline SpendingMarket random_spending_market(Rng& rng, std::size_t max_segments = 6)
{
    for (;;) {
        std::size_t B = static_cast<std::size_t>(uniform(rng, 1, 3));
        std::size_t G = static_cast<std::size_t>(uniform(rng, 1, 3));
        auto pairs = random_incidence(rng, B, G, max_segments);
        SpendingMarket mkt;
        mkt.goods = G;
        std::size_t budget_left = max_segments - pairs.size();
        std::vector<long> cap_total(B, 0);
        for (auto [i, j] : pairs) {
            SpendingMarket::Pair p{i, j, {}, {}};
            std::size_t levels = 1 + static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(std::min<std::size_t>(budget_left, 2))));
            budget_left -= levels - 1;
            long u = uniform(rng, static_cast<long>(levels) + 1, 12);
            for (std::size_t k = 0; k < levels; ++k) {
                p.utils.push_back(u);
                // Leave room for the remaining levels to stay positive and distinct.
                long rest = static_cast<long>(levels - k - 1);
                if (rest > 0) u = uniform(rng, std::max<long>(rest, u - 4), u - 1);
                long c = uniform(rng, 1, 6);
                p.caps.push_back(c);
                cap_total[i] += c;
            }
            mkt.pairs.push_back(std::move(p));
        }
        for (std::size_t i = 0; i < B; ++i) mkt.budgets.push_back(uniform(rng, 1, std::max<long>(1, cap_total[i])));
        return mkt;
    }
}

// Strongly connected linear-only network, built in both modes: Linear(d)
// additively and NegLogConstant(2^-d) multiplicatively, so gamma = 2^d.
struct TwinNetworks {
    FlowNetwork additive{OracleMode::Additive};
    FlowNetwork multiplicative{OracleMode::Multiplicative};
};

inline Rational pow2(long e)
{
    Rational r = 1;
    for (long i = 0; i < std::labs(e); ++i) r *= 2;
    return e >= 0 ? r : Rational(1 / r);
}

inline TwinNetworks random_linear_twins(Rng& rng)
{
    std::size_t n = static_cast<std::size_t>(uniform(rng, 2, 6));
    std::size_t m = n + static_cast<std::size_t>(uniform(rng, 0, 6));
    TwinNetworks t;
    for (const auto& b : balanced_demand(rng, n, 12)) {
        t.additive.add_node(b);
        t.multiplicative.add_node(b);
    }
    for (auto [u, v] : random_endpoints(rng, n, m, true)) {
        long d = uniform(rng, 0, 4);
        t.additive.add_arc(u, v, CostDescriptor::linear(d));
        t.multiplicative.add_arc(u, v, CostDescriptor::neg_log_constant(pow2(-d)));
    }
    return t;
}

// Backend for networks whose arcs are all linear, usable in either mode.
template <class Scale>
class LinearOnlyBackend : public BackendHooks {
public:
    explicit LinearOnlyBackend(const FlowNetwork& net) : net_(net) {}

    TrialResult trial(const RevealedArcSet& F, std::span<const Rational> b_hat) const override
    {
        std::size_t n = net_.node_count();
        TrialResult out{std::vector<Rational>(net_.arc_count()), std::vector<std::optional<Rational>>(n)};
        solve_tree_flow(net_, F.arcs(), b_hat, out.flow);
        std::vector<std::vector<ArcId>> adj(n);
        for (ArcId a : F.arcs()) {
            adj[net_.arc(a).tail].push_back(a);
            adj[net_.arc(a).head].push_back(a);
        }
        for (NodeId r = 0; r < n; ++r) {
            if (out.potentials[r]) continue;
            out.potentials[r] = Scale::unit();
            std::vector<NodeId> stack{r};
            while (!stack.empty()) {
                NodeId v = stack.back();
                stack.pop_back();
                for (ArcId a : adj[v]) {
                    const Arc& arc = net_.arc(a);
                    Rational g = Scale::slope(arc.cost, 0);
                    if (arc.tail == v && !out.potentials[arc.head]) {
                        out.potentials[arc.head] = Scale::combine(*out.potentials[v], g);
                        stack.push_back(arc.head);
                    } else if (arc.head == v && !out.potentials[arc.tail]) {
                        out.potentials[arc.tail] = Scale::combine(*out.potentials[v], *Scale::reverse_cost(arc.cost, 0));
                        stack.push_back(arc.tail);
                    }
                }
            }
        }
        return out;
    }

    ErrorResult error(std::span<const Rational> f, const RevealedArcSet& F) const override
    {
        auto w = witness(f, F, 0);
        if (!w) return {std::nullopt, std::nullopt};
        return {Rational(0), std::move(w)};
    }

    std::optional<std::vector<Rational>> witness(std::span<const Rational> f, const RevealedArcSet& F,
                                                 const Rational& delta) const override
    {
        auto arcs = weighted_residual<Scale>(net_, f, F, delta);
        return feasible_potentials<Scale>(net_.node_count(), arcs);
    }

private:
    const FlowNetwork& net_;
};

// Flow values on the nonlinear arcs, for comparing optima.
inline std::vector<std::pair<ArcId, Rational>> nonlinear_values(const FlowNetwork& net, std::span<const Rational> f,
                                                                 std::size_t arcs = SIZE_MAX)
{
    std::vector<std::pair<ArcId, Rational>> out;
    for (ArcId a = 0; a < std::min(arcs, net.arc_count()); ++a)
        if (!net.arc(a).cost.is_linear()) out.push_back({a, f[a]});
    return out;
}

// Copy of a network without its hub (original nodes and arcs only).
inline FlowNetwork strip_hub(const FlowNetwork& net)
{
    FlowNetwork out(net.mode());
    std::size_t n = net.hub() ? *net.hub() : net.node_count();
    for (NodeId v = 0; v < n; ++v) out.add_node(net.demand(v));
    for (ArcId a = 0; a < net.arc_count(); ++a)
        if (net.role(a) == ArcRole::Original) out.add_arc(net.arc(a).tail, net.arc(a).head, net.arc(a).cost);
    if (net.anchor() && (!net.hub() || *net.anchor() != *net.hub())) out.set_anchor(net.anchor());
    return out;
}

// Uncapacitated instance with the arcs of net.
inline CapacitatedInstance plain(const FlowNetwork& net)
{
    CapacitatedInstance inst;
    inst.demand = net.demands();
    for (const auto& a : net.arcs()) inst.arcs.push_back({a.tail, a.head, a.cost, 0, std::nullopt});
    return inst;
}

// Minimum of sum p / sum tau over simple cycles, by enumeration. nullopt when
// some cycle has zero time and negative cost.
struct Enumerated {
    std::optional<Rational> best;
    bool zero_time_negative = false;
};

inline Enumerated enumerate_cycles(const RatioCycleInstance& inst)
{
    Enumerated out;
    std::size_t n = inst.nodes;
    std::vector<bool> on(n, false);
    std::function<void(NodeId, NodeId, Rational, Rational)> dfs = [&](NodeId start, NodeId v, Rational p, Rational t) {
        for (const auto& a : inst.arcs) {
            if (a.tail != v) continue;
            Rational p2 = p + a.cost, t2 = t + a.time;
            if (a.head == start) {
                if (t2 == 0) {
                    if (p2 < 0) out.zero_time_negative = true;
                } else {
                    Rational r = p2 / t2;
                    if (!out.best || r < *out.best) out.best = r;
                }
                continue;
            }
            // Cycles are rooted at their smallest node.
            if (a.head < start || on[a.head]) continue;
            on[a.head] = true;
            dfs(start, a.head, p2, t2);
            on[a.head] = false;
        }
    };
    for (NodeId s = 0; s < n; ++s) {
        on[s] = true;
        dfs(s, s, 0, 0);
        on[s] = false;
    }
    return out;
}

inline RatioCycleInstance random_ratio_instance(Rng& rng)
{
    RatioCycleInstance inst;
    inst.nodes = static_cast<std::size_t>(uniform(rng, 2, 6));
    std::size_t m = static_cast<std::size_t>(uniform(rng, 1, 12));
    for (std::size_t e = 0; e < m; ++e) {
        NodeId u = static_cast<NodeId>(uniform(rng, 0, static_cast<long>(inst.nodes) - 1));
        NodeId v = static_cast<NodeId>(uniform(rng, 0, static_cast<long>(inst.nodes) - 1));
        if (u == v) continue;
        inst.arcs.push_back({u, v, uniform(rng, -6, 8), uniform(rng, 0, 3)});
    }
    return inst;
}

}
