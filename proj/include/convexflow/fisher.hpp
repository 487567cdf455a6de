#pragma once

#include "cost_model.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "rational.hpp"
#include "scaling_engine.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace convexflow {

struct LinearMarket {
    struct Utility {
        std::size_t buyer;
        std::size_t good;
        Rational u;
    };
    std::vector<Rational> budgets;
    std::size_t goods = 0;
    std::vector<Utility> utilities;
};

struct SpendingMarket {
    // Segments k = 0..: strictly decreasing utilities, positive caps.
    struct Pair {
        std::size_t buyer;
        std::size_t good;
        std::vector<Rational> utils;
        std::vector<Rational> caps;
    };
    std::vector<Rational> budgets;
    std::size_t goods = 0;
    std::vector<Pair> pairs;
};

// One way for a buyer to spend on a good: a buyer arc, plus a segment node and
// a good arc in the spending-constraint network.
struct Offer {
    std::size_t buyer;
    std::size_t good;
    Rational utility;
    std::optional<Rational> cap;
    ArcId buyer_arc;
    std::optional<ArcId> good_arc;
    std::optional<NodeId> segment;
    std::size_t pair;
    std::size_t level;
};

struct MarketNetwork {
    FlowNetwork network{OracleMode::Multiplicative};
    std::vector<NodeId> buyer_node;
    std::vector<NodeId> good_node;
    NodeId sink = 0;
    std::vector<ArcId> price_arc; // good -> sink, flow equals the price
    std::vector<Offer> offers;
    std::vector<Rational> budgets;
    bool spending = false;
};

namespace detail {

inline void check_incidence(std::size_t buyers, std::size_t goods, const std::vector<std::pair<std::size_t, std::size_t>>& pairs)
{
    std::vector<bool> b(buyers, false), g(goods, false);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto [i, j] : pairs) {
        if (i >= buyers || j >= goods) throw DomainError("market edge refers to an unknown buyer or good");
        if (!seen.insert({i, j}).second) throw DomainError("market lists a buyer-good pair twice");
        b[i] = g[j] = true;
    }
    for (std::size_t i = 0; i < buyers; ++i)
        if (!b[i]) throw DomainError("buyer " + std::to_string(i) + " has no utility edge");
    for (std::size_t j = 0; j < goods; ++j)
        if (!g[j]) throw DomainError("good " + std::to_string(j) + " has no utility edge");
}

inline void check_budgets(const std::vector<Rational>& budgets)
{
    if (budgets.empty()) throw DomainError("market has no buyers");
    for (const auto& m : budgets)
        if (m <= 0) throw DomainError("budgets must be positive");
}

}

// Shmyrev network: buyers, goods, sink t. Arc ij costs -f log U_ij, arc jt
// costs p (log p - 1). Money flows from buyers to t.
inline MarketNetwork build_shmyrev(const LinearMarket& mkt)
{
    detail::check_budgets(mkt.budgets);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& e : mkt.utilities) {
        if (e.u <= 0) throw DomainError("utilities must be positive");
        pairs.push_back({e.buyer, e.good});
    }
    detail::check_incidence(mkt.budgets.size(), mkt.goods, pairs);

    MarketNetwork out;
    out.budgets = mkt.budgets;
    FlowNetwork& net = out.network;
    Rational total = 0;
    for (const auto& m : mkt.budgets) {
        out.buyer_node.push_back(net.add_node(-m));
        total += m;
    }
    for (std::size_t j = 0; j < mkt.goods; ++j) out.good_node.push_back(net.add_node(0));
    out.sink = net.add_node(total);
    net.set_anchor(out.sink);
    for (std::size_t k = 0; k < mkt.utilities.size(); ++k) {
        const auto& e = mkt.utilities[k];
        ArcId a = net.add_arc(out.buyer_node[e.buyer], out.good_node[e.good], CostDescriptor::neg_log_constant(e.u));
        out.offers.push_back({e.buyer, e.good, e.u, std::nullopt, a, std::nullopt, std::nullopt, k, 0});
    }
    for (std::size_t j = 0; j < mkt.goods; ++j)
        out.price_arc.push_back(net.add_arc(out.good_node[j], out.sink, CostDescriptor::log_entropic()));
    return out;
}

// Spending-constraint network: one node per segment (ij,k) with demand L,
// fed by the buyer (utility arc) and by the good (zero-cost arc).
inline MarketNetwork build_spending(const SpendingMarket& mkt)
{
    detail::check_budgets(mkt.budgets);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Rational> reach(mkt.budgets.size());
    for (const auto& p : mkt.pairs) {
        if (p.utils.empty() || p.utils.size() != p.caps.size())
            throw DomainError("segment pair needs matching nonempty utils and caps");
        for (std::size_t k = 0; k < p.utils.size(); ++k) {
            if (p.utils[k] <= 0) throw DomainError("utilities must be positive");
            if (p.caps[k] <= 0) throw DomainError("segment caps must be positive");
            if (k > 0 && p.utils[k] >= p.utils[k - 1]) throw DomainError("segment utilities must strictly decrease");
        }
        pairs.push_back({p.buyer, p.good});
        if (p.buyer < reach.size())
            for (const auto& L : p.caps) reach[p.buyer] += L;
    }
    detail::check_incidence(mkt.budgets.size(), mkt.goods, pairs);
    for (std::size_t i = 0; i < reach.size(); ++i)
        if (reach[i] < mkt.budgets[i]) throw DomainError("buyer " + std::to_string(i) + " cannot spend its budget");

    MarketNetwork out;
    out.spending = true;
    out.budgets = mkt.budgets;
    FlowNetwork& net = out.network;
    Rational total = 0;
    for (const auto& m : mkt.budgets) {
        out.buyer_node.push_back(net.add_node(-m));
        total += m;
    }
    std::vector<NodeId> seg_node;
    for (const auto& p : mkt.pairs)
        for (const auto& L : p.caps) seg_node.push_back(net.add_node(L));
    std::vector<Rational> owed(mkt.goods);
    for (const auto& p : mkt.pairs)
        for (const auto& L : p.caps) owed[p.good] += L;
    for (std::size_t j = 0; j < mkt.goods; ++j) out.good_node.push_back(net.add_node(-owed[j]));
    out.sink = net.add_node(total);
    net.set_anchor(out.sink);
    std::size_t s = 0;
    for (std::size_t q = 0; q < mkt.pairs.size(); ++q) {
        const auto& p = mkt.pairs[q];
        for (std::size_t k = 0; k < p.utils.size(); ++k, ++s) {
            ArcId ba = net.add_arc(out.buyer_node[p.buyer], seg_node[s], CostDescriptor::neg_log_constant(p.utils[k]));
            ArcId ga = net.add_arc(out.good_node[p.good], seg_node[s], CostDescriptor::linear(0));
            out.offers.push_back({p.buyer, p.good, p.utils[k], p.caps[k], ba, ga, seg_node[s], q, k});
        }
    }
    for (std::size_t j = 0; j < mkt.goods; ++j)
        out.price_arc.push_back(net.add_arc(out.good_node[j], out.sink, CostDescriptor::log_entropic()));
    return out;
}

// ---------------------------------------------------------------------------
// Trial: F-tight money flow. Potentials are mu = e^pi with mu_t = 1 in the
// sink component; absent entries mean a price of zero.

inline TrialResult trial_fisher(const MarketNetwork& mn, const RevealedArcSet& F, std::span<const Rational> b_hat)
{
    const FlowNetwork& net = mn.network;
    if (discrepancy(F, b_hat) != 0) throw ContractViolation("trial_fisher: nonzero discrepancy");
    std::size_t n = net.node_count();
    NodeId t = mn.sink;
    TrialResult out{std::vector<Rational>(net.arc_count()), std::vector<std::optional<Rational>>(n)};

    // Forest of F-arcs not touching t.
    std::vector<ArcId> forest;
    std::vector<ArcId> into_t;
    for (ArcId a : F.arcs()) {
        const Arc& arc = net.arc(a);
        if (arc.head == t || arc.tail == t) {
            if (!(arc.head == t && arc.cost.is_restricted()))
                throw ContractViolation("trial_fisher: unexpected revealed arc at the sink");
            into_t.push_back(a);
        } else {
            if (!arc.cost.is_linear()) throw ContractViolation("trial_fisher: nonlinear arc away from the sink");
            forest.push_back(a);
        }
    }
    std::vector<std::vector<std::pair<ArcId, NodeId>>> adj(n);
    for (ArcId a : forest) {
        adj[net.arc(a).tail].push_back({a, net.arc(a).head});
        adj[net.arc(a).head].push_back({a, net.arc(a).tail});
    }
    // Relative potentials r with tightness gamma r_tail / r_head = 1; the lowest node of each tree gets 1.
    std::vector<Rational> r(n, Rational(1));
    std::vector<NodeId> tree(n);
    std::vector<std::vector<NodeId>> members;
    std::vector<bool> seen(n, false);
    for (NodeId root = 0; root < n; ++root) {
        if (seen[root] || root == t) continue;
        seen[root] = true;
        tree[root] = members.size();
        members.push_back({root});
        std::vector<NodeId> stack{root};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (auto [a, w] : adj[v]) {
                if (seen[w]) continue;
                seen[w] = true;
                tree[w] = tree[root];
                members.back().push_back(w);
                Rational g = e_derivative(net.arc(a).cost, 0);
                r[w] = net.arc(a).head == w ? Rational(g * r[v]) : Rational(r[v] / g);
                stack.push_back(w);
            }
        }
    }

    std::vector<Rational> need(b_hat.begin(), b_hat.end());
    std::vector<std::vector<ArcId>> priced(members.size());
    for (ArcId a : into_t) priced[tree[net.arc(a).tail]].push_back(a);
    out.potentials[t] = Rational(1);
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (priced[k].empty()) {
            for (NodeId v : members[k]) out.potentials[v] = r[v];
            continue;
        }
        Rational money = 0;
        for (NodeId v : members[k]) money -= b_hat[v];
        if (money < 0) throw ContractViolation("trial_fisher: negative price on a revealed price arc");
        if (money == 0) continue; // every price in this tree is zero
        Rational inv = 0;
        for (ArcId a : priced[k]) inv += 1 / r[net.arc(a).tail];
        Rational lambda = inv / money;
        for (NodeId v : members[k]) out.potentials[v] = lambda * r[v];
        for (ArcId a : priced[k]) {
            NodeId j = net.arc(a).tail;
            out.flow[a] = 1 / *out.potentials[j];
            need[j] += out.flow[a];
        }
    }
    solve_tree_flow(net, forest, need, out.flow);
    return out;
}

// ---------------------------------------------------------------------------
// Error: closure of price ratios beta over goods.

struct PriceRatios {
    std::vector<std::vector<Rational>> closure; // beta~[j][j']: P_j' >= beta~ P_j
    bool positive_cycle = false;
};

struct OfferState {
    bool buyer_residual; // reverse of the buyer arc is residual
    bool good_residual;  // good side tight (always for linear markets)
};

inline std::vector<OfferState> offer_states(const MarketNetwork& mn, std::span<const Rational> f, const RevealedArcSet& F)
{
    std::vector<OfferState> st;
    st.reserve(mn.offers.size());
    for (const auto& o : mn.offers) {
        bool br = F.contains(o.buyer_arc) || f[o.buyer_arc] > 0;
        bool gr = !o.good_arc || F.contains(*o.good_arc) || f[*o.good_arc] > 0;
        st.push_back({br, gr});
    }
    return st;
}

inline PriceRatios price_ratios(const MarketNetwork& mn, const std::vector<OfferState>& st)
{
    std::size_t g = mn.good_node.size();
    PriceRatios out;
    out.closure.assign(g, std::vector<Rational>(g, Rational(0)));
    for (std::size_t j = 0; j < g; ++j) out.closure[j][j] = 1;
    std::vector<std::vector<std::size_t>> by_buyer(mn.buyer_node.size());
    for (std::size_t k = 0; k < mn.offers.size(); ++k) by_buyer[mn.offers[k].buyer].push_back(k);
    for (const auto& list : by_buyer)
        for (std::size_t o : list) {
            if (!st[o].buyer_residual) continue;
            for (std::size_t o2 : list) {
                if (!st[o2].good_residual) continue;
                Rational ratio = mn.offers[o2].utility / mn.offers[o].utility;
                auto& cell = out.closure[mn.offers[o].good][mn.offers[o2].good];
                if (ratio > cell) cell = ratio;
            }
        }
    auto& B = out.closure;
    for (std::size_t k = 0; k < g; ++k)
        for (std::size_t i = 0; i < g; ++i) {
            if (B[i][k] == 0) continue;
            for (std::size_t j = 0; j < g; ++j) {
                Rational via = B[i][k] * B[k][j];
                if (via > B[i][j]) B[i][j] = std::move(via);
            }
        }
    for (std::size_t j = 0; j < g; ++j)
        if (B[j][j] > 1) out.positive_cycle = true;
    return out;
}

inline std::vector<Rational> market_prices(const MarketNetwork& mn, std::span<const Rational> f)
{
    std::vector<Rational> p;
    for (ArcId a : mn.price_arc) p.push_back(f[a]);
    return p;
}

// Potentials certifying (delta, F)-feasibility, or nullopt if none exist with
// finite positive values.
inline std::optional<std::vector<Rational>> fisher_witness(const MarketNetwork& mn, std::span<const Rational> f,
                                                           const RevealedArcSet& F, const Rational& delta)
{
    const FlowNetwork& net = mn.network;
    auto st = offer_states(mn, f, F);
    auto ratios = price_ratios(mn, st);
    if (ratios.positive_cycle) return std::nullopt;
    const auto& B = ratios.closure;
    auto p = market_prices(mn, f);
    std::size_t g = p.size();

    Rational eps;
    bool first = true;
    for (std::size_t j = 0; j < g; ++j) {
        Rational top = 0;
        for (std::size_t h = 0; h < g; ++h) top = max_of(top, B[h][j]);
        Rational cand = (p[j] + delta) / top;
        if (first || cand < eps) eps = cand;
        first = false;
    }
    if (g > 0 && eps <= 0) return std::nullopt;
    std::vector<Rational> q(g), P(g, Rational(0));
    for (std::size_t h = 0; h < g; ++h) q[h] = max_of(p[h] - delta, eps);
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t h = 0; h < g; ++h) P[j] = max_of(P[j], B[h][j] * q[h]);

    std::vector<Rational> mu(net.node_count(), Rational(1));
    for (std::size_t j = 0; j < g; ++j) mu[mn.good_node[j]] = 1 / P[j];
    std::vector<std::optional<Rational>> lo(mn.buyer_node.size()), hi(mn.buyer_node.size());
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        Rational v = o.utility / P[o.good];
        if (st[k].good_residual && (!lo[o.buyer] || v > *lo[o.buyer])) lo[o.buyer] = v;
        if (st[k].buyer_residual && (!hi[o.buyer] || v < *hi[o.buyer])) hi[o.buyer] = v;
    }
    std::vector<Rational> R(mn.buyer_node.size(), Rational(1));
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (lo[i]) R[i] = *lo[i];
        else if (hi[i]) R[i] = *hi[i];
        mu[mn.buyer_node[i]] = R[i];
    }
    for (const auto& o : mn.offers)
        if (o.segment) mu[*o.segment] = 1 / max_of(P[o.good], o.utility / R[o.buyer]);
    mu[mn.sink] = 1;
    if (auto h = net.hub()) {
        Rational top = 0;
        for (NodeId v = 0; v < net.node_count(); ++v)
            if (v != *h) top = max_of(top, mu[v]);
        for (ArcId a = 0; a < net.arc_count(); ++a)
            if (net.role(a) == ArcRole::HubIn) {
                mu[*h] = top * net.arc(a).cost.u; // gamma = 1/u
                break;
            }
    }
    return mu;
}

inline ErrorResult error_fisher(const MarketNetwork& mn, std::span<const Rational> f, const RevealedArcSet& F)
{
    const FlowNetwork& net = mn.network;
    for (ArcId a = 0; a < net.arc_count(); ++a)
        if (net.role(a) != ArcRole::Original && (F.contains(a) || f[a] != 0))
            throw ContractViolation("error_fisher: hub arc in use");
    auto p = market_prices(mn, f);
    for (const auto& v : p)
        if (v < 0) throw ContractViolation("error_fisher: negative price");
    auto ratios = price_ratios(mn, offer_states(mn, f, F));
    if (ratios.positive_cycle) return {std::nullopt, std::nullopt};
    Rational err = 0;
    for (std::size_t j = 0; j < p.size(); ++j)
        for (std::size_t k = 0; k < p.size(); ++k) {
            const Rational& b = ratios.closure[j][k];
            if (b == 0) continue;
            err = max_of(err, (p[j] * b - p[k]) / (b + 1));
        }
    return {err, fisher_witness(mn, f, F, err)};
}

class FisherBackend : public BackendHooks {
public:
    explicit FisherBackend(const MarketNetwork& mn) : mn_(mn) {}

    TrialResult trial(const RevealedArcSet& F, std::span<const Rational> b_hat) const override
    {
        return trial_fisher(mn_, F, b_hat);
    }
    ErrorResult error(std::span<const Rational> f, const RevealedArcSet& F) const override
    {
        return error_fisher(mn_, f, F);
    }
    std::optional<std::vector<Rational>> witness(std::span<const Rational> f, const RevealedArcSet& F,
                                                 const Rational& delta) const override
    {
        return fisher_witness(mn_, f, F, delta);
    }

private:
    const MarketNetwork& mn_;
};

// ---------------------------------------------------------------------------
// Equilibrium extraction and checks.

struct Equilibrium {
    std::vector<Rational> prices;
    std::vector<Rational> spending;      // per offer
    std::vector<Rational> bang_per_buck; // per buyer
};

// First violated equilibrium condition, if any. Uses prices and spending only.
inline std::optional<std::string> equilibrium_violation(const MarketNetwork& mn, const Equilibrium& eq)
{
    std::size_t buyers = mn.buyer_node.size(), goods = mn.good_node.size();
    std::vector<Rational> spent(buyers), sold(goods);
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        const Rational& x = eq.spending[k];
        if (x < 0) return "negative spending on offer " + std::to_string(k);
        if (o.cap && x > *o.cap) return "spending above cap on offer " + std::to_string(k);
        spent[o.buyer] += x;
        sold[o.good] += x;
    }
    for (std::size_t i = 0; i < buyers; ++i)
        if (spent[i] != mn.budgets[i]) return "buyer " + std::to_string(i) + " does not spend its budget";
    for (std::size_t j = 0; j < goods; ++j) {
        if (eq.prices[j] < 0) return "negative price for good " + std::to_string(j);
        if (sold[j] != eq.prices[j]) return "good " + std::to_string(j) + " does not clear";
    }
    // Every used offer is at least as good as every unsaturated one.
    for (std::size_t i = 0; i < buyers; ++i) {
        std::optional<Rational> worst_used, best_open;
        bool open_free = false;
        for (std::size_t k = 0; k < mn.offers.size(); ++k) {
            const auto& o = mn.offers[k];
            if (o.buyer != i) continue;
            const Rational& p = eq.prices[o.good];
            const Rational& x = eq.spending[k];
            if (x > 0) {
                if (p == 0) return "positive spending at price zero";
                Rational v = o.utility / p;
                if (!worst_used || v < *worst_used) worst_used = v;
            }
            if (!o.cap || x < *o.cap) {
                if (p == 0) open_free = true;
                else {
                    Rational v = o.utility / p;
                    if (!best_open || v > *best_open) best_open = v;
                }
            }
        }
        if (open_free || (worst_used && best_open && *worst_used < *best_open))
            return "buyer " + std::to_string(i) + " does not buy a best bundle";
    }
    return std::nullopt;
}

// R_i: the best bang-per-buck among offers with room left, else the worst used one.
inline std::vector<Rational> bang_per_buck(const MarketNetwork& mn, const std::vector<Rational>& prices,
                                           const std::vector<Rational>& spending)
{
    std::vector<std::optional<Rational>> open(mn.buyer_node.size()), used(mn.buyer_node.size());
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        if (prices[o.good] == 0) continue;
        Rational v = o.utility / prices[o.good];
        if ((!o.cap || spending[k] < *o.cap) && (!open[o.buyer] || v > *open[o.buyer])) open[o.buyer] = v;
        if (spending[k] > 0 && (!used[o.buyer] || v < *used[o.buyer])) used[o.buyer] = v;
    }
    std::vector<Rational> R;
    for (std::size_t i = 0; i < open.size(); ++i) R.push_back(open[i] ? *open[i] : used[i].value_or(Rational(0)));
    return R;
}

// Prices and spending from the flow; bang-per-buck from the potentials when
// given (mu_buyer / mu_sink), else from the prices.
inline Equilibrium extract_equilibrium(const MarketNetwork& mn, std::span<const Rational> f,
                                       std::span<const Rational> mu = {})
{
    Equilibrium eq;
    eq.prices = market_prices(mn, f);
    for (const auto& o : mn.offers) eq.spending.push_back(f[o.buyer_arc]);
    if (auto bad = equilibrium_violation(mn, eq)) throw InvariantViolation("extract_equilibrium: " + *bad);
    if (mu.empty()) {
        eq.bang_per_buck = bang_per_buck(mn, eq.prices, eq.spending);
        return eq;
    }
    for (NodeId b : mn.buyer_node) eq.bang_per_buck.push_back(mu[b] / mu[mn.sink]);
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        Rational v = o.utility / eq.prices[o.good];
        const Rational& R = eq.bang_per_buck[o.buyer];
        bool ok = (eq.spending[k] == 0 || v >= R) && ((o.cap && eq.spending[k] == *o.cap) || v <= R);
        if (!ok) throw InvariantViolation("extract_equilibrium: potentials disagree with offer " + std::to_string(k));
    }
    return eq;
}

// For each buyer-good pair, used segments form a prefix of saturated ones.
inline std::optional<std::string> segment_prefix_violation(const MarketNetwork& mn, const Equilibrium& eq)
{
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        if (o.level == 0 || eq.spending[k] == 0) continue;
        const auto& prev = mn.offers[k - 1];
        if (prev.pair != o.pair || prev.level + 1 != o.level) throw ContractViolation("offers out of segment order");
        if (!prev.cap || eq.spending[k - 1] != *prev.cap)
            return "segment " + std::to_string(o.level) + " of pair " + std::to_string(o.pair) + " used before the previous one is full";
    }
    return std::nullopt;
}

struct MarketSolution {
    SolveStatus status = SolveStatus::Optimal;
    Equilibrium equilibrium;
    MarketNetwork market; // engine network (with hub)
    EngineResult engine;
};

inline MarketSolution solve_market(MarketNetwork mn, EngineOptions opt = {})
{
    MarketSolution out{SolveStatus::Optimal, {}, std::move(mn), {}};
    out.market.network.validate();
    ensure_strongly_connected(out.market.network);
    FisherBackend backend(out.market);
    out.engine = run_enhanced(out.market.network, backend, opt);
    out.status = out.engine.status;
    if (out.status != SolveStatus::Optimal) throw InvariantViolation("solve_market: market network reported " + to_string(out.status));
    // Report potentials with the sink pinned to 1.
    Rational scale = out.engine.potentials[out.market.sink];
    for (auto& mu : out.engine.potentials) mu /= scale;
    out.equilibrium = extract_equilibrium(out.market, out.engine.flow, out.engine.potentials);
    return out;
}

inline MarketSolution solve_linear_market(const LinearMarket& mkt, EngineOptions opt = {})
{
    return solve_market(build_shmyrev(mkt), opt);
}

inline MarketSolution solve_spending_market(const SpendingMarket& mkt, EngineOptions opt = {})
{
    return solve_market(build_spending(mkt), opt);
}

}
