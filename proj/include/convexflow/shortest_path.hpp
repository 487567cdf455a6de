#pragma once

#include "cost_model.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "rational.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <span>
#include <vector>

namespace convexflow {

// Potentials pi (additive) with reduced cost c - pi_head + pi_tail >= 0.
struct AdditiveScale {
    static constexpr OracleMode mode = OracleMode::Additive;
    static Rational unit() { return 0; }
    static Rational combine(const Rational& a, const Rational& b) { return a + b; }
    static Rational reduce(const Rational& c, const Rational& p_tail, const Rational& p_head)
    {
        return c - p_head + p_tail;
    }
    static Rational raise(const Rational& p, const Rational& by) { return p + by; }
    static Rational slope(const CostDescriptor& d, const Rational& alpha) { return derivative(d, alpha); }
    static std::optional<Rational> reverse_cost(const CostDescriptor& d, const Rational& alpha)
    {
        return -derivative(d, alpha);
    }
};

// Potentials mu = e^pi (positive) with reduced factor gamma mu_tail / mu_head >= 1.
struct MultiplicativeScale {
    static constexpr OracleMode mode = OracleMode::Multiplicative;
    static Rational unit() { return 1; }
    static Rational combine(const Rational& a, const Rational& b) { return a * b; }
    static Rational reduce(const Rational& c, const Rational& p_tail, const Rational& p_head)
    {
        return c * p_tail / p_head;
    }
    static Rational raise(const Rational& p, const Rational& by) { return p * by; }
    static Rational slope(const CostDescriptor& d, const Rational& alpha) { return e_derivative(d, alpha); }
    static std::optional<Rational> reverse_cost(const CostDescriptor& d, const Rational& alpha)
    {
        Rational g = e_derivative(d, alpha);
        if (g == 0) return std::nullopt;
        return 1 / g;
    }
};

// Forward residual arcs use slope(f + delta); reverse arcs use reverse_cost(f - delta).
// A missing cost marks an arc that can never be used (factor e^{-inf}).
struct WeightedArc {
    NodeId tail;
    NodeId head;
    std::optional<Rational> cost;
};

struct ShortestPath {
    std::vector<std::size_t> arcs; // indices into the input arc list, source to target
    NodeId source;
    NodeId target;
    std::vector<Rational> potentials;
};

// Dijkstra on reduced costs with a binary heap. All sources start at distance
// unit(); the search stops at the first target popped. The heap breaks ties by
// node index, and a predecessor is replaced only on strict improvement. Every
// node is then raised by min(d_v, D), D the target distance, which keeps all
// reduced costs nonnegative and makes the path tight.
template <class Scale>
ShortestPath shortest_path(std::size_t n, std::span<const WeightedArc> arcs, const std::vector<bool>& sources,
                           const std::vector<bool>& targets, std::vector<Rational> potentials)
{
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t e = 0; e < arcs.size(); ++e) {
        if (!arcs[e].cost) continue;
        Rational r = Scale::reduce(*arcs[e].cost, potentials[arcs[e].tail], potentials[arcs[e].head]);
        if (r < Scale::unit()) throw ContractViolation("shortest_path: negative reduced cost on input arc");
        out[arcs[e].tail].push_back(e);
    }

    using Entry = std::pair<Rational, NodeId>;
    auto later = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);
    std::vector<std::optional<Rational>> dist(n);
    std::vector<std::optional<std::size_t>> via(n);
    std::vector<bool> done(n, false);
    for (NodeId v = 0; v < n; ++v)
        if (sources[v]) {
            dist[v] = Scale::unit();
            heap.push({Scale::unit(), v});
        }

    std::optional<NodeId> target;
    while (!heap.empty()) {
        auto [d, x] = heap.top();
        heap.pop();
        if (done[x] || d != *dist[x]) continue;
        done[x] = true;
        if (targets[x]) {
            target = x;
            break;
        }
        for (std::size_t e : out[x]) {
            NodeId y = arcs[e].head;
            if (done[y]) continue;
            Rational nd = Scale::combine(d, Scale::reduce(*arcs[e].cost, potentials[x], potentials[y]));
            if (!dist[y] || nd < *dist[y]) {
                dist[y] = nd;
                via[y] = e;
                heap.push({std::move(nd), y});
            }
        }
    }
    if (!target) throw InvariantViolation("shortest_path: no target reachable from the sources");

    const Rational D = *dist[*target];
    for (NodeId v = 0; v < n; ++v)
        potentials[v] = Scale::raise(potentials[v], dist[v] && *dist[v] < D ? *dist[v] : D);

    ShortestPath sp{{}, *target, *target, std::move(potentials)};
    NodeId x = *target;
    while (via[x]) {
        sp.arcs.push_back(*via[x]);
        x = arcs[*via[x]].tail;
    }
    sp.source = x;
    std::reverse(sp.arcs.begin(), sp.arcs.end());
    return sp;
}

inline ShortestPath shortest_path_additive(std::size_t n, std::span<const WeightedArc> arcs,
                                           const std::vector<bool>& sources, const std::vector<bool>& targets,
                                           std::vector<Rational> pi)
{
    return shortest_path<AdditiveScale>(n, arcs, sources, targets, std::move(pi));
}

inline ShortestPath shortest_path_multiplicative(std::size_t n, std::span<const WeightedArc> arcs,
                                                 const std::vector<bool>& sources, const std::vector<bool>& targets,
                                                 std::vector<Rational> mu)
{
    return shortest_path<MultiplicativeScale>(n, arcs, sources, targets, std::move(mu));
}

}
