#pragma once

#include "errors.hpp"
#include "fisher.hpp"
#include "network.hpp"
#include "quadratic.hpp"
#include "rational.hpp"
#include "reference_oracle.hpp"
#include "scaling_engine.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace convexflow::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Instances.

struct QuadraticDoc {
    CapacitatedInstance instance;
    std::vector<Json> node_ids;
};

struct LinearMarketDoc {
    LinearMarket market;
    std::vector<Json> buyer_ids;
    std::vector<Json> good_ids;
};

struct SpendingMarketDoc {
    SpendingMarket market;
    std::vector<Json> buyer_ids;
    std::vector<Json> good_ids;
};

using InstanceDoc = std::variant<QuadraticDoc, LinearMarketDoc, SpendingMarketDoc>;

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
    return *it;
}

inline const Json& array_field(const Json& obj, const std::string& key, const std::string& path)
{
    const Json& v = field(obj, key, path);
    if (!v.is_array()) throw ParseError(path + "." + key, "expected an array");
    return v;
}

inline Rational rational(const Json& v, const std::string& path)
{
    if (v.is_number_integer()) return Rational(mpz_class(v.dump(), 10));
    if (!v.is_string()) throw ParseError(path, "expected a rational string \"num/den\"");
    try {
        return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, e.what());
    }
}

inline std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Node ids are JSON strings or integers; maps each to its position.
class IdTable {
public:
    std::size_t add(const Json& id, const std::string& path)
    {
        if (!id.is_string() && !id.is_number_integer()) throw ParseError(path, "id must be a string or an integer");
        auto key = id.dump();
        if (!index_.emplace(key, ids_.size()).second) throw ParseError(path, "duplicate id " + key);
        ids_.push_back(id);
        return ids_.size() - 1;
    }
    std::size_t find(const Json& id, const std::string& path) const
    {
        auto it = index_.find(id.dump());
        if (it == index_.end()) throw ParseError(path, "unknown id " + id.dump());
        return it->second;
    }
    const std::vector<Json>& ids() const { return ids_; }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<Json> ids_;
};

inline Json rational_json(const Rational& r) { return to_string(r); }

}

inline InstanceDoc parse_instance_json(const Json& doc)
{
    using namespace detail;
    const std::string kind = [&] {
        const Json& k = field(doc, "kind", "$");
        if (!k.is_string()) throw ParseError("$.kind", "expected a string");
        return k.get<std::string>();
    }();

    if (kind == "quadratic_flow") {
        QuadraticDoc out;
        IdTable nodes;
        const Json& ns = array_field(doc, "nodes", "$");
        for (std::size_t i = 0; i < ns.size(); ++i) {
            auto p = at("$.nodes", i);
            nodes.add(field(ns[i], "id", p), p + ".id");
            out.instance.demand.push_back(rational(field(ns[i], "demand", p), p + ".demand"));
        }
        const Json& as = array_field(doc, "arcs", "$");
        for (std::size_t i = 0; i < as.size(); ++i) {
            auto p = at("$.arcs", i);
            CapacitatedArc arc;
            arc.tail = nodes.find(field(as[i], "tail", p), p + ".tail");
            arc.head = nodes.find(field(as[i], "head", p), p + ".head");
            if (arc.tail == arc.head) throw ParseError(p, "self-loop");
            Rational c = rational(field(as[i], "c", p), p + ".c");
            Rational d = rational(field(as[i], "d", p), p + ".d");
            if (c < 0) throw DomainError(p + ".c: quadratic coefficient must be nonnegative");
            arc.cost = CostDescriptor::quadratic(c, d);
            if (as[i].contains("lower")) arc.lower = rational(as[i]["lower"], p + ".lower");
            if (arc.lower < 0) throw DomainError(p + ".lower: negative lower bound");
            if (as[i].contains("upper") && !as[i]["upper"].is_null()) arc.upper = rational(as[i]["upper"], p + ".upper");
            if (arc.upper && *arc.upper < arc.lower) throw DomainError(p + ": lower exceeds upper");
            out.instance.arcs.push_back(std::move(arc));
        }
        Rational total = 0;
        for (const auto& b : out.instance.demand) total += b;
        if (total != 0) throw DomainError("$.nodes: demands sum to " + to_string(total) + ", expected 0");
        out.node_ids = nodes.ids();
        return out;
    }

    if (kind != "fisher_linear" && kind != "fisher_spending") throw ParseError("$.kind", "unknown kind '" + kind + "'");
    IdTable buyers, goods;
    std::vector<Rational> budgets;
    const Json& bs = array_field(doc, "buyers", "$");
    for (std::size_t i = 0; i < bs.size(); ++i) {
        auto p = at("$.buyers", i);
        buyers.add(field(bs[i], "id", p), p + ".id");
        Rational m = rational(field(bs[i], "budget", p), p + ".budget");
        if (m <= 0) throw DomainError(p + ".budget: budgets must be positive");
        budgets.push_back(std::move(m));
    }
    const Json& gs = array_field(doc, "goods", "$");
    for (std::size_t j = 0; j < gs.size(); ++j) goods.add(gs[j], at("$.goods", j));

    if (kind == "fisher_linear") {
        LinearMarketDoc out;
        out.market.budgets = budgets;
        out.market.goods = gs.size();
        const Json& us = array_field(doc, "utilities", "$");
        for (std::size_t k = 0; k < us.size(); ++k) {
            auto p = at("$.utilities", k);
            std::size_t i = buyers.find(field(us[k], "buyer", p), p + ".buyer");
            std::size_t j = goods.find(field(us[k], "good", p), p + ".good");
            Rational u = rational(field(us[k], "u", p), p + ".u");
            if (u <= 0) throw DomainError(p + ".u: utilities must be positive");
            out.market.utilities.push_back({i, j, std::move(u)});
        }
        out.buyer_ids = buyers.ids();
        out.good_ids = goods.ids();
        build_shmyrev(out.market); // validates incidence
        return out;
    }

    SpendingMarketDoc out;
    out.market.budgets = budgets;
    out.market.goods = gs.size();
    const Json& ss = array_field(doc, "segments", "$");
    for (std::size_t k = 0; k < ss.size(); ++k) {
        auto p = at("$.segments", k);
        SpendingMarket::Pair pair;
        pair.buyer = buyers.find(field(ss[k], "buyer", p), p + ".buyer");
        pair.good = goods.find(field(ss[k], "good", p), p + ".good");
        const Json& ut = array_field(ss[k], "utils", p);
        const Json& cp = array_field(ss[k], "caps", p);
        for (std::size_t q = 0; q < ut.size(); ++q) pair.utils.push_back(rational(ut[q], at(p + ".utils", q)));
        for (std::size_t q = 0; q < cp.size(); ++q) {
            pair.caps.push_back(rational(cp[q], at(p + ".caps", q)));
            if (pair.caps.back() <= 0) throw DomainError(at(p + ".caps", q) + ": caps must be positive");
        }
        out.market.pairs.push_back(std::move(pair));
    }
    out.buyer_ids = buyers.ids();
    out.good_ids = goods.ids();
    build_spending(out.market);
    return out;
}

inline InstanceDoc parse_instance(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_instance_json(doc);
}

inline Json serialize_instance(const InstanceDoc& doc)
{
    using detail::rational_json;
    Json out;
    if (auto* q = std::get_if<QuadraticDoc>(&doc)) {
        out["kind"] = "quadratic_flow";
        out["nodes"] = Json::array();
        for (std::size_t v = 0; v < q->node_ids.size(); ++v)
            out["nodes"].push_back({{"id", q->node_ids[v]}, {"demand", rational_json(q->instance.demand[v])}});
        out["arcs"] = Json::array();
        for (const auto& a : q->instance.arcs)
            out["arcs"].push_back({{"tail", q->node_ids[a.tail]},
                                   {"head", q->node_ids[a.head]},
                                   {"c", rational_json(a.cost.c)},
                                   {"d", rational_json(a.cost.d)},
                                   {"lower", rational_json(a.lower)},
                                   {"upper", a.upper ? rational_json(*a.upper) : Json(nullptr)}});
        return out;
    }
    auto buyers_goods = [&](const std::vector<Rational>& budgets, const std::vector<Json>& bids, const std::vector<Json>& gids) {
        out["buyers"] = Json::array();
        for (std::size_t i = 0; i < budgets.size(); ++i)
            out["buyers"].push_back({{"id", bids[i]}, {"budget", rational_json(budgets[i])}});
        out["goods"] = Json(gids);
    };
    if (auto* l = std::get_if<LinearMarketDoc>(&doc)) {
        out["kind"] = "fisher_linear";
        buyers_goods(l->market.budgets, l->buyer_ids, l->good_ids);
        out["utilities"] = Json::array();
        for (const auto& u : l->market.utilities)
            out["utilities"].push_back({{"buyer", l->buyer_ids[u.buyer]}, {"good", l->good_ids[u.good]}, {"u", rational_json(u.u)}});
        return out;
    }
    const auto& s = std::get<SpendingMarketDoc>(doc);
    out["kind"] = "fisher_spending";
    buyers_goods(s.market.budgets, s.buyer_ids, s.good_ids);
    out["segments"] = Json::array();
    for (const auto& p : s.market.pairs) {
        Json utils = Json::array(), caps = Json::array();
        for (const auto& u : p.utils) utils.push_back(rational_json(u));
        for (const auto& c : p.caps) caps.push_back(rational_json(c));
        out["segments"].push_back({{"buyer", s.buyer_ids[p.buyer]}, {"good", s.good_ids[p.good]}, {"utils", utils}, {"caps", caps}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trace export: one JSON object per line.

inline Json event_json(const Event& e)
{
    Json payload = Json::object();
    if (!e.path.empty()) {
        payload["path"] = Json::array();
        for (const auto& s : e.path) payload["path"].push_back({{"arc", s.arc}, {"forward", s.forward}});
    }
    if (e.arc) payload["arc"] = *e.arc;
    if (e.value) payload["value"] = to_string(*e.value);
    if (!e.note.empty()) payload["note"] = e.note;
    return {{"type", to_string(e.type)}, {"phase", e.phase}, {"delta", to_string(e.delta)}, {"payload", payload}};
}

inline void write_trace(std::ostream& os, const std::vector<Event>& events)
{
    for (const auto& e : events) os << event_json(e).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Solutions.

enum class Mode { Enhanced, Basic };

struct SolveRequest {
    Mode mode = Mode::Enhanced;
    std::size_t phase_budget = 0;
    bool verify = false;
};

struct SolveOutcome {
    Json solution;
    int exit_code = 0;
    std::vector<Event> events;
};

inline int status_exit_code(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::Unbounded: return 3;
    }
    return 1;
}

namespace detail {

inline Json flow_json(std::span<const Rational> f)
{
    Json out = Json::array();
    for (std::size_t a = 0; a < f.size(); ++a) out.push_back({{"arc", a}, {"value", to_string(f[a])}});
    return out;
}

// Basic mode on an engine network: delta0 from the backend's initial error.
inline BasicRun basic_on(const FlowNetwork& net, const BackendHooks& hooks, std::size_t budget)
{
    std::vector<Rational> zero(net.arc_count(), Rational(0));
    RevealedArcSet none(net);
    auto e = hooks.error(zero, none);
    if (!e.err) throw DomainError("basic mode needs a finite initial error (instance is unbounded)");
    Rational d0 = max_of(*e.err, excess(net, zero) / Rational(2 * net.node_count() + net.nonlinear_count()));
    if (d0 == 0) d0 = 1;
    return run_basic(net, d0, budget);
}

}

inline SolveOutcome solve_quadratic_doc(const QuadraticDoc& doc, const SolveRequest& req)
{
    SolveOutcome out;
    Json& s = out.solution;
    if (req.mode == Mode::Basic) {
        auto red = uncapacitate(doc.instance);
        red.network.validate();
        ensure_strongly_connected(red.network);
        QuadraticBackend backend(red.network);
        auto run = detail::basic_on(red.network, backend, req.phase_budget);
        s["status"] = "approximate";
        s["flow"] = detail::flow_json(red.original_flow(run.flow));
        s["potentials"] = Json::array();
        for (std::size_t v = 0; v < doc.node_ids.size(); ++v)
            s["potentials"].push_back({{"node", doc.node_ids[v]}, {"value", to_string(run.potentials[v])}});
        s["phases"] = req.phase_budget;
        s["delta"] = to_string(run.delta);
        s["revealed_arcs"] = Json::array();
        out.exit_code = 0;
        return out;
    }
    auto sol = solve_quadratic(doc.instance);
    out.events = sol.engine.events;
    s["status"] = to_string(sol.status);
    s["flow"] = sol.status == SolveStatus::Optimal ? detail::flow_json(sol.flow) : Json::array();
    s["potentials"] = Json::array();
    if (sol.status == SolveStatus::Optimal)
        for (std::size_t v = 0; v < doc.node_ids.size(); ++v)
            s["potentials"].push_back({{"node", doc.node_ids[v]}, {"value", to_string(sol.potentials[v])}});
    s["phases"] = sol.engine.phases;
    s["revealed_arcs"] = sol.engine.revealed;
    if (sol.status == SolveStatus::Optimal) s["objective"] = to_string(quadratic_objective(doc.instance, sol.flow));
    if (req.verify && sol.status == SolveStatus::Optimal) {
        auto k = reference::kkt_check(sol.reduced.network, sol.engine.flow, sol.engine.potentials);
        if (!k.optimal) throw InvariantViolation("kkt check failed: " + k.reason);
    }
    out.exit_code = status_exit_code(sol.status);
    return out;
}

inline Json market_solution_json(const MarketNetwork& mn, const Equilibrium& eq, const std::vector<Json>& buyer_ids,
                                 const std::vector<Json>& good_ids)
{
    Json s;
    s["prices"] = Json::array();
    for (std::size_t j = 0; j < eq.prices.size(); ++j)
        s["prices"].push_back({{"good", good_ids[j]}, {"price", to_string(eq.prices[j])}});
    s["spending"] = Json::array();
    for (std::size_t k = 0; k < mn.offers.size(); ++k) {
        const auto& o = mn.offers[k];
        Json row = {{"buyer", buyer_ids[o.buyer]}, {"good", good_ids[o.good]}};
        if (mn.spending) row["segment"] = o.level;
        row["amount"] = to_string(eq.spending[k]);
        s["spending"].push_back(std::move(row));
    }
    s["bang_per_buck"] = Json::array();
    for (std::size_t i = 0; i < eq.bang_per_buck.size(); ++i)
        s["bang_per_buck"].push_back({{"buyer", buyer_ids[i]}, {"value", to_string(eq.bang_per_buck[i])}});
    return s;
}

inline SolveOutcome solve_market_doc(MarketNetwork mn, const std::vector<Json>& buyer_ids, const std::vector<Json>& good_ids,
                                     const SolveRequest& req)
{
    SolveOutcome out;
    Json& s = out.solution;
    if (req.mode == Mode::Basic) {
        ensure_strongly_connected(mn.network);
        FisherBackend backend(mn);
        auto run = detail::basic_on(mn.network, backend, req.phase_budget);
        s["status"] = "approximate";
        const FlowNetwork& net = mn.network;
        Json flow = Json::array();
        for (ArcId a = 0; a < net.arc_count(); ++a)
            if (net.role(a) == ArcRole::Original) flow.push_back({{"arc", a}, {"value", to_string(run.flow[a])}});
        s["flow"] = flow;
        s["potentials"] = Json::array();
        for (NodeId v = 0; v < net.node_count(); ++v)
            if (!net.hub() || v != *net.hub()) s["potentials"].push_back({{"node", v}, {"mu", to_string(run.potentials[v])}});
        s["phases"] = req.phase_budget;
        s["delta"] = to_string(run.delta);
        s["revealed_arcs"] = Json::array();
        return out;
    }
    auto sol = solve_market(std::move(mn));
    out.events = sol.engine.events;
    const FlowNetwork& net = sol.market.network;
    s["status"] = to_string(sol.status);
    Json flow = Json::array();
    for (ArcId a = 0; a < net.arc_count(); ++a)
        if (net.role(a) == ArcRole::Original) flow.push_back({{"arc", a}, {"value", to_string(sol.engine.flow[a])}});
    s["flow"] = flow;
    s["potentials"] = Json::array();
    for (NodeId v = 0; v < net.node_count(); ++v)
        if (!net.hub() || v != *net.hub()) s["potentials"].push_back({{"node", v}, {"mu", to_string(sol.engine.potentials[v])}});
    Json m = market_solution_json(sol.market, sol.equilibrium, buyer_ids, good_ids);
    for (auto& [k, v] : m.items()) s[k] = v;
    s["phases"] = sol.engine.phases;
    s["revealed_arcs"] = sol.engine.revealed;
    if (req.verify) {
        auto k = reference::kkt_check(net, sol.engine.flow, sol.engine.potentials);
        if (!k.optimal) throw InvariantViolation("kkt check failed: " + k.reason);
    }
    out.exit_code = status_exit_code(sol.status);
    return out;
}

inline SolveOutcome solve_doc(const InstanceDoc& doc, const SolveRequest& req)
{
    if (auto* q = std::get_if<QuadraticDoc>(&doc)) return solve_quadratic_doc(*q, req);
    if (auto* l = std::get_if<LinearMarketDoc>(&doc))
        return solve_market_doc(build_shmyrev(l->market), l->buyer_ids, l->good_ids, req);
    const auto& s = std::get<SpendingMarketDoc>(doc);
    return solve_market_doc(build_spending(s.market), s.buyer_ids, s.good_ids, req);
}

// ---------------------------------------------------------------------------
// Verification of a solution file against an instance, independent of the solver.

struct Verdict {
    bool ok = true;
    std::string message;
};

inline Verdict verify_quadratic(const QuadraticDoc& doc, const Json& sol)
{
    using namespace detail;
    const auto& inst = doc.instance;
    if (field(sol, "status", "$").get<std::string>() != "optimal") return {false, "solution status is not optimal"};
    std::vector<std::optional<Rational>> f(inst.arcs.size());
    const Json& fl = array_field(sol, "flow", "$");
    for (std::size_t k = 0; k < fl.size(); ++k) {
        auto p = at("$.flow", k);
        auto a = field(fl[k], "arc", p).get<std::size_t>();
        if (a >= f.size()) throw ParseError(p + ".arc", "arc index out of range");
        f[a] = rational(field(fl[k], "value", p), p + ".value");
    }
    IdTable nodes;
    for (std::size_t v = 0; v < doc.node_ids.size(); ++v) nodes.add(doc.node_ids[v], "$");
    std::vector<std::optional<Rational>> pi(doc.node_ids.size());
    const Json& ps = array_field(sol, "potentials", "$");
    for (std::size_t k = 0; k < ps.size(); ++k) {
        auto p = at("$.potentials", k);
        pi[nodes.find(field(ps[k], "node", p), p + ".node")] = rational(field(ps[k], "value", p), p + ".value");
    }
    for (std::size_t a = 0; a < f.size(); ++a)
        if (!f[a]) return {false, "flow missing for arc " + std::to_string(a)};
    for (std::size_t v = 0; v < pi.size(); ++v)
        if (!pi[v]) return {false, "potential missing for node " + doc.node_ids[v].dump()};

    std::vector<Rational> rho(inst.demand.size());
    for (std::size_t a = 0; a < inst.arcs.size(); ++a) {
        const auto& arc = inst.arcs[a];
        const Rational& x = *f[a];
        if (x < arc.lower || (arc.upper && x > *arc.upper)) return {false, "bounds violated on arc " + std::to_string(a)};
        rho[arc.head] += x;
        rho[arc.tail] -= x;
    }
    for (std::size_t v = 0; v < rho.size(); ++v)
        if (rho[v] != inst.demand[v]) return {false, "conservation violated at node " + doc.node_ids[v].dump()};
    for (std::size_t a = 0; a < inst.arcs.size(); ++a) {
        const auto& arc = inst.arcs[a];
        const Rational& x = *f[a];
        Rational r = derivative(arc.cost, x) - *pi[arc.head] + *pi[arc.tail];
        bool can_rise = !arc.upper || x < *arc.upper;
        bool can_fall = x > arc.lower;
        if (can_rise && r < 0) return {false, "optimality violated on arc " + std::to_string(a) + " (reduced cost " + to_string(r) + ")"};
        if (can_fall && r > 0) return {false, "optimality violated on arc " + std::to_string(a) + " (reduced cost " + to_string(r) + ")"};
    }
    return {};
}

inline Verdict verify_market(const MarketNetwork& mn, const std::vector<Json>& buyer_ids, const std::vector<Json>& good_ids,
                             const Json& sol)
{
    using namespace detail;
    if (field(sol, "status", "$").get<std::string>() != "optimal") return {false, "solution status is not optimal"};
    IdTable buyers, goods;
    for (const auto& b : buyer_ids) buyers.add(b, "$");
    for (const auto& g : good_ids) goods.add(g, "$");
    Equilibrium eq;
    std::vector<std::optional<Rational>> prices(good_ids.size());
    const Json& ps = array_field(sol, "prices", "$");
    for (std::size_t k = 0; k < ps.size(); ++k) {
        auto p = at("$.prices", k);
        prices[goods.find(field(ps[k], "good", p), p + ".good")] = rational(field(ps[k], "price", p), p + ".price");
    }
    for (std::size_t j = 0; j < prices.size(); ++j) {
        if (!prices[j]) return {false, "price missing for good " + good_ids[j].dump()};
        eq.prices.push_back(*prices[j]);
    }
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> offer_of;
    for (std::size_t k = 0; k < mn.offers.size(); ++k)
        offer_of[{mn.offers[k].buyer, mn.offers[k].good, mn.offers[k].level}] = k;
    eq.spending.assign(mn.offers.size(), Rational(0));
    const Json& sp = array_field(sol, "spending", "$");
    for (std::size_t k = 0; k < sp.size(); ++k) {
        auto p = at("$.spending", k);
        std::size_t i = buyers.find(field(sp[k], "buyer", p), p + ".buyer");
        std::size_t j = goods.find(field(sp[k], "good", p), p + ".good");
        std::size_t level = sp[k].contains("segment") ? sp[k]["segment"].get<std::size_t>() : 0;
        auto it = offer_of.find({i, j, level});
        if (it == offer_of.end()) return {false, "spending on a pair without utility at " + p};
        eq.spending[it->second] = rational(field(sp[k], "amount", p), p + ".amount");
    }
    if (auto bad = equilibrium_violation(mn, eq)) return {false, *bad};
    if (auto bad = segment_prefix_violation(mn, eq)) return {false, *bad};
    return {};
}

inline Verdict verify_doc(const InstanceDoc& doc, const Json& sol)
{
    try {
        if (auto* q = std::get_if<QuadraticDoc>(&doc)) return verify_quadratic(*q, sol);
        if (auto* l = std::get_if<LinearMarketDoc>(&doc))
            return verify_market(build_shmyrev(l->market), l->buyer_ids, l->good_ids, sol);
        const auto& s = std::get<SpendingMarketDoc>(doc);
        return verify_market(build_spending(s.market), s.buyer_ids, s.good_ids, sol);
    } catch (const nlohmann::json::exception& e) {
        return {false, std::string("malformed solution: ") + e.what()};
    }
}

// ---------------------------------------------------------------------------
// Commands. Exit codes: 0 optimal, 2 infeasible, 3 unbounded, 1 error, 4 verification failure.

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

struct SolveFlags {
    std::string input;
    std::string output;
    Mode mode = Mode::Enhanced;
    std::size_t phase_budget = 0;
    std::string trace;
    bool verify = false;
};

inline int solve_command(const SolveFlags& flags, std::ostream& err = std::cerr)
{
    try {
        auto doc = parse_instance(read_file(flags.input));
        auto outcome = solve_doc(doc, {flags.mode, flags.phase_budget, flags.verify});
        write_text(flags.output, outcome.solution.dump(2) + "\n");
        if (!flags.trace.empty()) {
            std::ostringstream ss;
            write_trace(ss, outcome.events);
            write_text(flags.trace, ss.str());
        }
        return outcome.exit_code;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
    } catch (const DomainError& e) {
        err << "invalid instance: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 1;
}

inline int verify_command(const std::string& instance_path, const std::string& solution_path, std::ostream& err = std::cerr)
{
    InstanceDoc doc;
    Json sol;
    try {
        doc = parse_instance(read_file(instance_path));
        sol = Json::parse(read_file(solution_path));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    Verdict v;
    try {
        v = verify_doc(doc, sol);
    } catch (const std::exception& e) {
        v = {false, e.what()};
    }
    if (v.ok) return 0;
    err << "verification failed: " << v.message << '\n';
    return 4;
}

}
