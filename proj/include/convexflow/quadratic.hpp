#pragma once

#include "cost_model.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "rational.hpp"
#include "scaling_engine.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace convexflow {

// ---------------------------------------------------------------------------
// Minimum cost-to-time ratio cycle.

struct RatioArc {
    NodeId tail;
    NodeId head;
    Rational cost; // p
    Rational time; // tau >= 0
};

struct RatioCycleInstance {
    std::size_t nodes = 0;
    std::vector<RatioArc> arcs;
};

struct RatioCycleResult {
    Rational mu;                     // min(0, min over cycles of sum p / sum tau)
    std::vector<Rational> potentials; // p - mu tau - pi_head + pi_tail >= 0 on every arc
    std::vector<Rational> iterates;   // -mu after each Newton step, strictly increasing
};

struct CycleSearch {
    std::vector<Rational> dist;
    std::vector<std::size_t> cycle; // empty if there is no negative cycle
};

// Bellman-Ford from a virtual source joined to every node at cost 0, under
// arc costs p + lambda tau. Any cycle left in the predecessor graph after n+1
// rounds is negative.
inline CycleSearch negative_cycle(std::size_t n, std::span<const RatioArc> arcs, const Rational& lambda)
{
    std::vector<Rational> cost;
    cost.reserve(arcs.size());
    for (const auto& a : arcs) cost.push_back(a.cost + lambda * a.time);
    CycleSearch out{std::vector<Rational>(n, Rational(0)), {}};
    std::vector<std::optional<std::size_t>> pred(n);
    std::optional<NodeId> last;
    for (std::size_t round = 0; round <= n; ++round) {
        last.reset();
        for (std::size_t e = 0; e < arcs.size(); ++e) {
            Rational cand = out.dist[arcs[e].tail] + cost[e];
            if (cand < out.dist[arcs[e].head]) {
                out.dist[arcs[e].head] = std::move(cand);
                pred[arcs[e].head] = e;
                last = arcs[e].head;
            }
        }
        if (!last) return out;
    }
    NodeId x = *last;
    for (std::size_t i = 0; i < n; ++i) x = arcs[*pred[x]].tail;
    NodeId start = x;
    Rational sum = 0;
    do {
        std::size_t e = *pred[x];
        out.cycle.push_back(e);
        sum += cost[e];
        x = arcs[e].tail;
    } while (x != start);
    std::reverse(out.cycle.begin(), out.cycle.end());
    if (sum >= 0) throw InvariantViolation("negative_cycle: predecessor cycle is not negative");
    return out;
}

// Discrete Newton: lambda starts at 0 and jumps to minus the ratio of each
// negative cycle found, until none is left.
inline RatioCycleResult min_ratio_cycle(const RatioCycleInstance& inst)
{
    for (const auto& a : inst.arcs)
        if (a.time < 0) throw ContractViolation("min_ratio_cycle: negative time");
    Rational lambda = 0;
    RatioCycleResult out;
    for (;;) {
        auto search = negative_cycle(inst.nodes, inst.arcs, lambda);
        if (search.cycle.empty()) {
            out.mu = -lambda;
            out.potentials = std::move(search.dist);
            return out;
        }
        Rational p = 0, tau = 0;
        for (std::size_t e : search.cycle) {
            p += inst.arcs[e].cost;
            tau += inst.arcs[e].time;
        }
        if (tau == 0) throw ContractViolation("min_ratio_cycle: negative cycle with zero time");
        Rational next = -p / tau;
        if (next <= lambda) throw InvariantViolation("min_ratio_cycle: Newton step did not increase");
        lambda = std::move(next);
        out.iterates.push_back(lambda);
    }
}

// ---------------------------------------------------------------------------
// Trial: solve the tightness system on F for quadratic and linear arcs.

namespace detail {

// Solves A y = r in place by Gaussian elimination over the rationals.
inline std::vector<Rational> solve_linear_system(std::vector<std::vector<Rational>> A, std::vector<Rational> r)
{
    std::size_t k = r.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        while (piv < k && A[piv][col] == 0) ++piv;
        if (piv == k) throw InvariantViolation("trial: singular Laplacian");
        std::swap(A[piv], A[col]);
        std::swap(r[piv], r[col]);
        for (std::size_t row = col + 1; row < k; ++row) {
            if (A[row][col] == 0) continue;
            Rational factor = A[row][col] / A[col][col];
            for (std::size_t j = col; j < k; ++j) A[row][j] -= factor * A[col][j];
            r[row] -= factor * r[col];
        }
    }
    std::vector<Rational> y(k);
    for (std::size_t i = k; i-- > 0;) {
        Rational s = r[i];
        for (std::size_t j = i + 1; j < k; ++j) s -= A[i][j] * y[j];
        y[i] = s / A[i][i];
    }
    return y;
}

}

inline TrialResult trial_quadratic(const FlowNetwork& net, const RevealedArcSet& F, std::span<const Rational> b_hat)
{
    if (discrepancy(F, b_hat) != 0) throw ContractViolation("trial_quadratic: nonzero discrepancy");
    std::size_t n = net.node_count();
    TrialResult out{std::vector<Rational>(net.arc_count()), std::vector<std::optional<Rational>>(n)};

    // Linear trees: offsets o_v with o_head = o_tail + d along every linear F-arc.
    DisjointSets trees(n);
    std::vector<ArcId> linear, nonlinear;
    for (ArcId a : F.arcs()) {
        if (net.arc(a).cost.is_linear()) {
            linear.push_back(a);
            trees.unite(net.arc(a).tail, net.arc(a).head);
        } else nonlinear.push_back(a);
    }
    std::vector<std::vector<std::pair<ArcId, NodeId>>> adj(n);
    for (ArcId a : linear) {
        adj[net.arc(a).tail].push_back({a, net.arc(a).head});
        adj[net.arc(a).head].push_back({a, net.arc(a).tail});
    }
    std::vector<Rational> offset(n);
    std::vector<NodeId> root(n);
    std::vector<bool> seen(n, false);
    for (NodeId r = 0; r < n; ++r) {
        if (seen[r]) continue;
        seen[r] = true;
        root[r] = r;
        std::vector<NodeId> stack{r};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (auto [a, w] : adj[v]) {
                if (seen[w]) continue;
                seen[w] = true;
                root[w] = r;
                const Arc& arc = net.arc(a);
                offset[w] = arc.head == w ? Rational(offset[v] + arc.cost.d) : Rational(offset[v] - arc.cost.d);
                stack.push_back(w);
            }
        }
    }

    // Nonlinear arcs inside one tree have forced flow; shift the demands.
    std::vector<Rational> need(b_hat.begin(), b_hat.end());
    auto forced = [&](ArcId a, const Rational& pi_tail, const Rational& pi_head) -> Rational {
        const Arc& arc = net.arc(a);
        return (pi_head - pi_tail - arc.cost.d) / (2 * arc.cost.c);
    };
    std::vector<ArcId> across;
    for (ArcId a : nonlinear) {
        const Arc& arc = net.arc(a);
        if (root[arc.tail] == root[arc.head]) {
            out.flow[a] = forced(a, offset[arc.tail], offset[arc.head]);
            need[arc.head] -= out.flow[a];
            need[arc.tail] += out.flow[a];
        } else across.push_back(a);
    }

    // Contract trees; per F-component solve the weighted Laplacian for tree levels theta.
    std::map<std::size_t, std::vector<NodeId>> comp_roots;
    for (NodeId v = 0; v < n; ++v)
        if (root[v] == v) comp_roots[F.component(v)].push_back(v);
    std::vector<Rational> theta(n);
    std::vector<std::size_t> slot(n, 0);
    for (auto& [c, roots] : comp_roots) {
        if (roots.size() == 1) continue;
        for (std::size_t i = 0; i < roots.size(); ++i) slot[roots[i]] = i;
        std::size_t k = roots.size();
        std::vector<std::vector<Rational>> L(k, std::vector<Rational>(k));
        std::vector<Rational> rhs(k);
        for (NodeId v = 0; v < n; ++v)
            if (F.component(v) == c) rhs[slot[root[v]]] += need[v];
        for (ArcId a : across) {
            const Arc& arc = net.arc(a);
            if (F.component(arc.tail) != c) continue;
            std::size_t s = slot[root[arc.tail]], t = slot[root[arc.head]];
            Rational w = 1 / (2 * arc.cost.c);
            Rational kconst = offset[arc.head] - offset[arc.tail] - arc.cost.d;
            L[s][s] += w;
            L[t][t] += w;
            L[s][t] -= w;
            L[t][s] -= w;
            rhs[t] -= w * kconst;
            rhs[s] += w * kconst;
        }
        // The tree holding the component's lowest node is roots[0]; pin its level to 0.
        std::vector<std::vector<Rational>> A(k - 1, std::vector<Rational>(k - 1));
        std::vector<Rational> r(k - 1);
        for (std::size_t i = 1; i < k; ++i) {
            r[i - 1] = rhs[i];
            for (std::size_t j = 1; j < k; ++j) A[i - 1][j - 1] = L[i][j];
        }
        auto y = detail::solve_linear_system(std::move(A), std::move(r));
        for (std::size_t i = 1; i < k; ++i) theta[roots[i]] = y[i - 1];
    }

    std::vector<Rational> pi(n);
    for (NodeId v = 0; v < n; ++v) {
        pi[v] = theta[root[v]] + offset[v];
        out.potentials[v] = pi[v];
    }
    for (ArcId a : across) {
        const Arc& arc = net.arc(a);
        out.flow[a] = forced(a, pi[arc.tail], pi[arc.head]);
        need[arc.head] -= out.flow[a];
        need[arc.tail] += out.flow[a];
    }
    solve_tree_flow(net, linear, need, out.flow);
    return out;
}

// ---------------------------------------------------------------------------
// Error: err_F(f) as a minimum ratio cycle over E u reverse(F).

inline RatioCycleInstance error_instance(const FlowNetwork& net, std::span<const Rational> f, const RevealedArcSet& F)
{
    RatioCycleInstance inst{net.node_count(), {}};
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        if (!F.contains(a) && f[a] < 0) throw ContractViolation("error_quadratic: negative flow off F");
        Rational p = derivative(arc.cost, f[a]);
        Rational tau = 2 * arc.cost.c;
        inst.arcs.push_back({arc.tail, arc.head, p, tau});
        if (F.contains(a) || f[a] > 0) inst.arcs.push_back({arc.head, arc.tail, -p, tau});
    }
    return inst;
}

inline ErrorResult error_quadratic(const FlowNetwork& net, std::span<const Rational> f, const RevealedArcSet& F)
{
    auto inst = error_instance(net, f, F);
    std::vector<RatioArc> flat;
    for (const auto& a : inst.arcs)
        if (a.time == 0) flat.push_back(a);
    if (!negative_cycle(inst.nodes, flat, 0).cycle.empty()) return {std::nullopt, std::nullopt};
    auto res = min_ratio_cycle(inst);
    return {Rational(-res.mu), std::move(res.potentials)};
}

class QuadraticBackend : public BackendHooks {
public:
    explicit QuadraticBackend(const FlowNetwork& net) : net_(net)
    {
        if (net.mode() != OracleMode::Additive) throw ContractViolation("QuadraticBackend: additive network required");
    }

    TrialResult trial(const RevealedArcSet& F, std::span<const Rational> b_hat) const override
    {
        return trial_quadratic(net_, F, b_hat);
    }
    ErrorResult error(std::span<const Rational> f, const RevealedArcSet& F) const override
    {
        return error_quadratic(net_, f, F);
    }
    std::optional<std::vector<Rational>> witness(std::span<const Rational> f, const RevealedArcSet& F,
                                                 const Rational& delta) const override
    {
        auto inst = error_instance(net_, f, F);
        auto search = negative_cycle(inst.nodes, inst.arcs, delta);
        if (!search.cycle.empty()) return std::nullopt;
        return std::move(search.dist);
    }

private:
    const FlowNetwork& net_;
};

// ---------------------------------------------------------------------------
// End-to-end solve of a capacitated quadratic instance.

struct QuadraticSolution {
    SolveStatus status = SolveStatus::Optimal;
    std::vector<Rational> flow;       // original arc coordinates
    std::vector<Rational> potentials; // original nodes
    ReducedNetwork reduced;           // engine network (after reduction and hub)
    EngineResult engine;
};

inline QuadraticSolution solve_quadratic(const CapacitatedInstance& inst, EngineOptions opt = {})
{
    if (inst.mode != OracleMode::Additive) throw DomainError("quadratic instance must be additive");
    QuadraticSolution out{SolveStatus::Optimal, {}, {}, uncapacitate(inst), {}};
    out.reduced.network.validate();
    ensure_strongly_connected(out.reduced.network);
    QuadraticBackend backend(out.reduced.network);
    out.engine = run_enhanced(out.reduced.network, backend, opt);
    out.status = out.engine.status;
    if (out.status == SolveStatus::Optimal) {
        out.flow = out.reduced.original_flow(out.engine.flow);
        out.potentials.assign(out.engine.potentials.begin(),
                              out.engine.potentials.begin() + static_cast<std::ptrdiff_t>(out.reduced.original_nodes));
    }
    return out;
}

// Objective sum c f^2 + d f over original arcs.
inline Rational quadratic_objective(const CapacitatedInstance& inst, std::span<const Rational> f)
{
    Rational total = 0;
    for (std::size_t a = 0; a < inst.arcs.size(); ++a) total += inst.arcs[a].cost.c * f[a] * f[a] + inst.arcs[a].cost.d * f[a];
    return total;
}

}
