#pragma once

#include "network.hpp"
#include "rational.hpp"

#include <optional>
#include <queue>
#include <span>
#include <vector>

namespace convexflow {

struct BoundedArc {
    NodeId tail;
    NodeId head;
    Rational lower = 0;
    std::optional<Rational> upper; // nullopt = infinity
};

// Edmonds-Karp over exact rationals. Capacities may be infinite.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t n) : adj_(n) {}

    std::size_t add_edge(NodeId u, NodeId v, std::optional<Rational> cap)
    {
        adj_[u].push_back(edges_.size());
        edges_.push_back({v, std::move(cap), 0});
        adj_[v].push_back(edges_.size());
        edges_.push_back({u, Rational(0), 0});
        return edges_.size() - 2;
    }

    const Rational& flow(std::size_t e) const { return edges_[e].flow; }

    Rational run(NodeId s, NodeId t)
    {
        Rational total = 0;
        for (;;) {
            std::vector<std::optional<std::size_t>> via(adj_.size());
            std::vector<bool> seen(adj_.size(), false);
            std::queue<NodeId> q;
            q.push(s);
            seen[s] = true;
            while (!q.empty() && !seen[t]) {
                NodeId x = q.front();
                q.pop();
                for (std::size_t e : adj_[x]) {
                    NodeId y = edges_[e].to;
                    if (seen[y] || !has_room(e)) continue;
                    seen[y] = true;
                    via[y] = e;
                    q.push(y);
                }
            }
            if (!seen[t]) return total;
            std::optional<Rational> push;
            for (NodeId x = t; x != s; x = edges_[*via[x] ^ 1].to) {
                auto room = residual(*via[x]);
                if (room && (!push || *room < *push)) push = room;
            }
            if (!push) throw InvariantViolation("max flow: infinite augmenting path");
            for (NodeId x = t; x != s; x = edges_[*via[x] ^ 1].to) {
                edges_[*via[x]].flow += *push;
                edges_[*via[x] ^ 1].flow -= *push;
            }
            total += *push;
        }
    }

private:
    struct Edge {
        NodeId to;
        std::optional<Rational> cap;
        Rational flow;
    };
    std::optional<Rational> residual(std::size_t e) const
    {
        if (!edges_[e].cap) return std::nullopt;
        return *edges_[e].cap - edges_[e].flow;
    }
    bool has_room(std::size_t e) const
    {
        auto r = residual(e);
        return !r || *r > 0;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<Edge> edges_;
};

// Finds x with lower <= x <= upper and inflow - outflow = demand at every node.
inline std::optional<std::vector<Rational>> feasible_flow(std::size_t n, std::span<const BoundedArc> arcs,
                                                          std::span<const Rational> demand)
{
    std::vector<Rational> need(demand.begin(), demand.end());
    for (const auto& a : arcs) {
        if (a.upper && *a.upper < a.lower) return std::nullopt;
        need[a.head] -= a.lower;
        need[a.tail] += a.lower;
    }
    NodeId s = n, t = n + 1;
    MaxFlow mf(n + 2);
    std::vector<std::size_t> ids;
    ids.reserve(arcs.size());
    for (const auto& a : arcs) {
        std::optional<Rational> cap;
        if (a.upper) cap = *a.upper - a.lower;
        ids.push_back(mf.add_edge(a.tail, a.head, cap));
    }
    Rational required = 0, supply = 0;
    for (NodeId v = 0; v < n; ++v) {
        if (need[v] < 0) {
            mf.add_edge(s, v, Rational(-need[v]));
            supply -= need[v];
        } else if (need[v] > 0) {
            mf.add_edge(v, t, need[v]);
            required += need[v];
        }
    }
    if (supply != required || mf.run(s, t) != required) return std::nullopt;
    std::vector<Rational> x;
    x.reserve(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i) x.push_back(arcs[i].lower + mf.flow(ids[i]));
    return x;
}

}
