#pragma once

#include "cost_model.hpp"
#include "errors.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace convexflow {

using NodeId = std::size_t;
using ArcId = std::size_t;

struct Arc {
    NodeId tail;
    NodeId head;
    CostDescriptor cost;
};

enum class ArcRole { Original, HubOut, HubIn };

// Uncapacitated network. Node demands b_i, flow conservation reads rho_f(i) = b_i
// where rho_f(i) is inflow minus outflow.
class FlowNetwork {
public:
    explicit FlowNetwork(OracleMode mode = OracleMode::Additive) : mode_(mode) {}

    NodeId add_node(Rational demand = 0)
    {
        demand_.push_back(std::move(demand));
        return demand_.size() - 1;
    }

    ArcId add_arc(NodeId tail, NodeId head, CostDescriptor cost, ArcRole role = ArcRole::Original)
    {
        if (tail >= node_count() || head >= node_count()) throw ContractViolation("add_arc: node out of range");
        if (tail == head) throw ContractViolation("add_arc: self-loop");
        if (!cost.supports(mode_))
            throw ContractViolation("add_arc: cost " + to_string(cost.kind) + " not available in this oracle mode");
        arcs_.push_back({tail, head, std::move(cost)});
        roles_.push_back(role);
        if (!arcs_.back().cost.is_linear()) ++nonlinear_;
        return arcs_.size() - 1;
    }

    OracleMode mode() const { return mode_; }
    std::size_t node_count() const { return demand_.size(); }
    std::size_t arc_count() const { return arcs_.size(); }
    std::size_t nonlinear_count() const { return nonlinear_; }

    const Arc& arc(ArcId a) const { return arcs_[a]; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    ArcRole role(ArcId a) const { return roles_[a]; }

    const Rational& demand(NodeId v) const { return demand_[v]; }
    const std::vector<Rational>& demands() const { return demand_; }
    void set_demand(NodeId v, Rational b) { demand_[v] = std::move(b); }

    // Node that absorbs component imbalances when building b-hat (market sink or hub).
    std::optional<NodeId> anchor() const { return anchor_; }
    void set_anchor(std::optional<NodeId> v) { anchor_ = v; }
    std::optional<NodeId> hub() const { return hub_; }
    void set_hub(NodeId v) { hub_ = v; }

    void validate() const
    {
        Rational total = 0;
        for (const auto& b : demand_) total += b;
        if (total != 0) throw DomainError("node demands sum to " + to_string(total) + ", expected 0");
    }

private:
    OracleMode mode_;
    std::vector<Rational> demand_;
    std::vector<Arc> arcs_;
    std::vector<ArcRole> roles_;
    std::size_t nonlinear_ = 0;
    std::optional<NodeId> anchor_;
    std::optional<NodeId> hub_;
};

// ---------------------------------------------------------------------------
// Capacitated instances and the reduction to lower 0 / upper infinity.

struct CapacitatedArc {
    NodeId tail;
    NodeId head;
    CostDescriptor cost;
    Rational lower = 0;
    std::optional<Rational> upper; // nullopt = infinity
};

struct CapacitatedInstance {
    OracleMode mode = OracleMode::Additive;
    std::vector<Rational> demand;
    std::vector<CapacitatedArc> arcs;
};

// How an original arc appears in the reduced network.
struct ArcProvenance {
    ArcId forward;                 // arc carrying f - lower (ik, or the arc itself)
    std::optional<ArcId> slack;    // arc jk when split
    std::optional<NodeId> split;   // node k when split
    Rational lower = 0;
};

struct ReducedNetwork {
    FlowNetwork network;
    std::size_t original_nodes = 0;
    std::vector<ArcProvenance> provenance;

    std::vector<Rational> original_flow(std::span<const Rational> f) const
    {
        std::vector<Rational> out;
        out.reserve(provenance.size());
        for (const auto& p : provenance) out.push_back(f[p.forward] + p.lower);
        return out;
    }
};

inline ReducedNetwork uncapacitate(const CapacitatedInstance& inst)
{
    ReducedNetwork red{FlowNetwork(inst.mode), inst.demand.size(), {}};
    FlowNetwork& net = red.network;
    for (const auto& b : inst.demand) net.add_node(b);
    std::vector<Rational> b = inst.demand;
    for (std::size_t a = 0; a < inst.arcs.size(); ++a) {
        const auto& arc = inst.arcs[a];
        if (arc.tail >= b.size() || arc.head >= b.size())
            throw DomainError("arc " + std::to_string(a) + ": endpoint out of range");
        if (arc.lower < 0) throw DomainError("arc " + std::to_string(a) + ": negative lower bound");
        if (arc.upper && arc.lower > *arc.upper) throw DomainError("arc " + std::to_string(a) + ": lower > upper");
        CostDescriptor cost = shifted(arc.cost, arc.lower);
        ArcProvenance prov{0, std::nullopt, std::nullopt, arc.lower};
        b[arc.tail] += arc.lower;
        if (!arc.upper) {
            b[arc.head] -= arc.lower;
            prov.forward = net.add_arc(arc.tail, arc.head, cost);
        } else {
            b[arc.head] -= *arc.upper;
            NodeId k = net.add_node(*arc.upper - arc.lower);
            prov.split = k;
            prov.forward = net.add_arc(arc.tail, k, cost);
            prov.slack = net.add_arc(arc.head, k, CostDescriptor::linear(0));
        }
        red.provenance.push_back(std::move(prov));
    }
    for (std::size_t v = 0; v < b.size(); ++v) net.set_demand(v, b[v]);
    return red;
}

// ---------------------------------------------------------------------------
// Balances and excess.

// rho_f(i): inflow minus outflow.
inline std::vector<Rational> node_balance(const FlowNetwork& net, std::span<const Rational> f)
{
    std::vector<Rational> rho(net.node_count());
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        rho[net.arc(a).head] += f[a];
        rho[net.arc(a).tail] -= f[a];
    }
    return rho;
}

// Ex_b(f) = sum_i max(rho_f(i) - b_i, 0).
inline Rational excess(const FlowNetwork& net, std::span<const Rational> f, std::span<const Rational> b)
{
    auto rho = node_balance(net, f);
    Rational ex = 0;
    for (std::size_t v = 0; v < rho.size(); ++v)
        if (rho[v] > b[v]) ex += rho[v] - b[v];
    return ex;
}

inline Rational excess(const FlowNetwork& net, std::span<const Rational> f)
{
    return excess(net, f, net.demands());
}

// ---------------------------------------------------------------------------
// Union-find and the revealed arc set.

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n = 0) : parent_(n), size_(n, 1)
    {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a), b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }
    bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

// Monotone set of revealed arcs. Keeps undirected components of F and of its
// linear part, so linear acyclicity is checked in near-constant time.
class RevealedArcSet {
public:
    RevealedArcSet() = default;
    explicit RevealedArcSet(const FlowNetwork& net)
        : member_(net.arc_count(), false), all_(net.node_count()), linear_(net.node_count())
    {
        ends_.reserve(net.arc_count());
        for (const auto& a : net.arcs()) ends_.push_back({a.tail, a.head, a.cost.is_linear()});
    }

    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }
    bool contains(ArcId a) const { return member_[a]; }
    const std::vector<ArcId>& arcs() const { return order_; }
    std::size_t node_count() const { return all_count(); }

    // True when adding a keeps F linear acyclic.
    bool can_insert(ArcId a) const
    {
        if (member_[a] || !ends_[a].linear) return true;
        return linear_.find_const(ends_[a].tail) != linear_.find_const(ends_[a].head);
    }

    void insert(ArcId a)
    {
        if (member_[a]) return;
        if (!can_insert(a)) throw ContractViolation("revealed set would contain a linear cycle");
        member_[a] = true;
        order_.push_back(a);
        all_.unite(ends_[a].tail, ends_[a].head);
        if (ends_[a].linear) linear_.unite(ends_[a].tail, ends_[a].head);
    }

    std::size_t component(NodeId v) const { return all_.find_const(v); }
    bool linearly_connected(NodeId u, NodeId v) const { return linear_.find_const(u) == linear_.find_const(v); }

    // Undirected path of linear F-arcs from u to v as (arc, forward) steps.
    std::vector<std::pair<ArcId, bool>> linear_path(NodeId from, NodeId to) const
    {
        std::size_t n = all_count();
        std::vector<std::vector<std::pair<ArcId, NodeId>>> adj(n);
        for (ArcId a : order_) {
            if (!ends_[a].linear) continue;
            adj[ends_[a].tail].push_back({a, ends_[a].head});
            adj[ends_[a].head].push_back({a, ends_[a].tail});
        }
        std::vector<std::optional<ArcId>> via(n);
        std::vector<bool> seen(n, false);
        std::vector<NodeId> stack{from};
        seen[from] = true;
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            for (auto [a, y] : adj[x])
                if (!seen[y]) {
                    seen[y] = true;
                    via[y] = a;
                    stack.push_back(y);
                }
        }
        if (!seen[to]) throw ContractViolation("linear_path: endpoints not linearly connected");
        std::vector<std::pair<ArcId, bool>> path;
        for (NodeId x = to; x != from;) {
            ArcId a = *via[x];
            bool forward = ends_[a].head == x;
            path.push_back({a, forward});
            x = forward ? ends_[a].tail : ends_[a].head;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

private:
    struct Ends {
        NodeId tail;
        NodeId head;
        bool linear;
    };
    // Union-find whose find does not compress, usable from const members.
    struct Forest {
        std::vector<std::size_t> parent;
        Forest() = default;
        explicit Forest(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
        std::size_t find_const(std::size_t x) const
        {
            while (parent[x] != x) x = parent[x];
            return x;
        }
        void unite(std::size_t a, std::size_t b)
        {
            a = find_const(a), b = find_const(b);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    };
    std::size_t all_count() const { return all_.parent.size(); }

    std::vector<bool> member_;
    std::vector<ArcId> order_;
    std::vector<Ends> ends_;
    Forest all_;
    Forest linear_;
};

// D_b(F): largest |sum of b| over undirected components of F.
inline Rational discrepancy(const RevealedArcSet& F, std::span<const Rational> b)
{
    std::vector<Rational> sum(b.size());
    for (NodeId v = 0; v < b.size(); ++v) sum[F.component(v)] += b[v];
    Rational worst = 0;
    for (const auto& s : sum) worst = max_of(worst, abs_value(s));
    return worst;
}

// ---------------------------------------------------------------------------
// Residual structure E_f^F(delta) = E u reverse(F) u {ji : f_ij >= delta}.
// With delta = 0 the last set is {ji : f_ij > 0}, i.e. E_f^F.

struct ResidualArc {
    NodeId tail;
    NodeId head;
    ArcId arc;
    bool forward;
};

inline bool reverse_residual(const RevealedArcSet& F, const Rational& flow, ArcId a, const Rational& delta)
{
    if (F.contains(a)) return true;
    return delta > 0 ? flow >= delta : flow > 0;
}

inline std::vector<ResidualArc> residual_arcs(const FlowNetwork& net, std::span<const Rational> f,
                                              const RevealedArcSet& F, const Rational& delta)
{
    std::vector<ResidualArc> out;
    out.reserve(2 * net.arc_count());
    for (ArcId a = 0; a < net.arc_count(); ++a) {
        const Arc& arc = net.arc(a);
        out.push_back({arc.tail, arc.head, a, true});
        if (reverse_residual(F, f[a], a, delta)) out.push_back({arc.head, arc.tail, a, false});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strong connectivity.

inline bool strongly_connected(const FlowNetwork& net)
{
    std::size_t n = net.node_count();
    if (n <= 1) return true;
    auto reach = [&](bool forward) {
        std::vector<std::vector<NodeId>> adj(n);
        for (const auto& a : net.arcs()) {
            if (forward) adj[a.tail].push_back(a.head);
            else adj[a.head].push_back(a.tail);
        }
        std::vector<bool> seen(n, false);
        std::vector<NodeId> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            for (NodeId y : adj[x])
                if (!seen[y]) {
                    seen[y] = true;
                    ++count;
                    stack.push_back(y);
                }
        }
        return count == n;
    };
    return reach(true) && reach(false);
}

// Big constant for the hub arcs: strictly larger than half the potential spread
// of some optimal dual of any feasible instance, so no optimum uses a hub arc.
inline Rational hub_cost(const FlowNetwork& net)
{
    Rational B = 0;
    for (const auto& b : net.demands()) B += abs_value(b);
    if (net.mode() == OracleMode::Additive) {
        Rational sum_d = 0;
        for (const auto& a : net.arcs()) sum_d += abs_value(a.cost.d);
        Rational M = 1;
        for (const auto& a : net.arcs()) {
            M += abs_value(a.cost.d);
            if (a.cost.kind == CostKind::Quadratic) M += 2 * a.cost.c * B + sum_d;
        }
        return M;
    }
    Rational base = 2;
    Rational smallest = 1;
    for (const auto& b : net.demands())
        if (b != 0) smallest = min_of(smallest, abs_value(b));
    base *= max_of(B, 1) / smallest;
    for (const auto& a : net.arcs()) {
        if (a.cost.kind == CostKind::NegLogConstant) base *= max_of(a.cost.u, 1 / a.cost.u);
        else if (a.cost.kind == CostKind::LogEntropic) base *= max_of(B, 1);
    }
    Rational K = 1;
    for (std::size_t i = 0; i <= net.node_count(); ++i) K *= base;
    return K;
}

// Adds a hub t0 with arcs v->t0 and t0->v of equal high cost when the network
// is not strongly connected. Returns true if a hub was added.
inline bool ensure_strongly_connected(FlowNetwork& net)
{
    if (strongly_connected(net)) return false;
    Rational M = hub_cost(net);
    CostDescriptor cost = net.mode() == OracleMode::Additive ? CostDescriptor::linear(M)
                                                             : CostDescriptor::neg_log_constant(1 / M);
    std::size_t n = net.node_count();
    NodeId hub = net.add_node(0);
    net.set_hub(hub);
    if (!net.anchor()) net.set_anchor(hub);
    for (NodeId v = 0; v < n; ++v) {
        net.add_arc(v, hub, cost, ArcRole::HubOut);
        net.add_arc(hub, v, cost, ArcRole::HubIn);
    }
    return true;
}

// ---------------------------------------------------------------------------
// Flow on a forest of arcs meeting per-node targets rho_x(v) = need(v).
// Writes x on the forest arcs; throws if some tree is unbalanced.

inline void solve_tree_flow(const FlowNetwork& net, std::span<const ArcId> tree, std::span<const Rational> need,
                            std::vector<Rational>& x)
{
    std::size_t n = net.node_count();
    std::vector<std::vector<std::pair<ArcId, NodeId>>> adj(n);
    for (ArcId a : tree) {
        adj[net.arc(a).tail].push_back({a, net.arc(a).head});
        adj[net.arc(a).head].push_back({a, net.arc(a).tail});
    }
    std::vector<bool> seen(n, false);
    std::vector<std::optional<ArcId>> up(n);
    std::vector<NodeId> parent(n);
    std::vector<Rational> sub(n);
    for (NodeId root = 0; root < n; ++root) {
        if (seen[root] || adj[root].empty()) continue;
        std::vector<NodeId> order, stack{root};
        seen[root] = true;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (auto [a, w] : adj[v]) {
                if (seen[w]) continue;
                seen[w] = true;
                up[w] = a;
                parent[w] = v;
                stack.push_back(w);
            }
        }
        std::size_t ends = 0;
        for (NodeId v : order) {
            sub[v] = need[v];
            ends += adj[v].size();
        }
        if (ends != 2 * (order.size() - 1)) throw ContractViolation("solve_tree_flow: arcs contain a cycle");
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId v = *it;
            if (v == root) break;
            ArcId a = *up[v];
            x[a] = net.arc(a).head == v ? sub[v] : Rational(-sub[v]);
            sub[parent[v]] += sub[v];
        }
        if (sub[root] != 0) throw ContractViolation("solve_tree_flow: tree demands do not balance");
    }
}

}

