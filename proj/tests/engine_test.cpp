#include "support.hpp"

#include <convexflow/quadratic.hpp>
#include <convexflow/reference_oracle.hpp>
#include <convexflow/scaling_engine.hpp>

#include <gtest/gtest.h>

using namespace convexflow;

namespace {

// Backend with scripted answers, for driving single engine steps.
class ScriptedBackend : public BackendHooks {
public:
    TrialResult trial_answer;
    ErrorResult error_answer;

    TrialResult trial(const RevealedArcSet&, std::span<const Rational>) const override { return trial_answer; }
    ErrorResult error(std::span<const Rational>, const RevealedArcSet&) const override { return error_answer; }
    std::optional<std::vector<Rational>> witness(std::span<const Rational>, const RevealedArcSet&,
                                                 const Rational&) const override
    {
        return error_answer.witness;
    }
};

FlowNetwork arc_pair(Rational b, CostDescriptor c0, std::optional<CostDescriptor> c1 = std::nullopt)
{
    FlowNetwork net;
    net.add_node(-b);
    net.add_node(b);
    net.add_arc(0, 1, std::move(c0));
    if (c1) net.add_arc(0, 1, std::move(*c1));
    return net;
}


}

TEST(Adjust, RaisesFlowWhenPotentialGapExceedsSlope)
{
    auto net = arc_pair(0, CostDescriptor::quadratic(1, 0));
    RevealedArcSet none(net);
    std::vector<Rational> pi{0, 11};
    EXPECT_EQ(adjust<AdditiveScale>(net, {4}, pi, 1, none), std::vector<Rational>{5});
}

TEST(Adjust, TightArcUnchanged)
{
    auto net = arc_pair(0, CostDescriptor::quadratic(1, 0));
    RevealedArcSet none(net);
    std::vector<Rational> pi{0, 8};
    EXPECT_EQ(adjust<AdditiveScale>(net, {4}, pi, 1, none), std::vector<Rational>{4});
}

TEST(Adjust, LowersFlowWhenSlopeExceedsGap)
{
    auto net = arc_pair(0, CostDescriptor::quadratic(1, 0));
    RevealedArcSet none(net);
    std::vector<Rational> pi{0, 5};
    EXPECT_EQ(adjust<AdditiveScale>(net, {4}, pi, 1, none), std::vector<Rational>{3});
    // C'(3/2) = 3 < 5 pushes a small flow up instead.
    EXPECT_EQ(adjust<AdditiveScale>(net, {Rational(1, 2)}, pi, 1, none), std::vector<Rational>{Rational(3, 2)});
    // Below delta and outside F the reverse arc is absent.
    std::vector<Rational> flat{0, 0};
    EXPECT_EQ(adjust<AdditiveScale>(net, {Rational(1, 2)}, flat, 1, none), std::vector<Rational>{Rational(1, 2)});
}

TEST(Adjust, LinearArcWithinSlopeUnchanged)
{
    auto net = arc_pair(0, CostDescriptor::linear(5));
    RevealedArcSet none(net);
    // Inputs are (4, {})-feasible with flow on a multiple of 4, as in the engine.
    for (int gap : {-3, 0, 4, 5}) {
        std::vector<Rational> pi{0, gap};
        EXPECT_EQ(adjust<AdditiveScale>(net, {0}, pi, 2, none), std::vector<Rational>{0});
    }
    for (int f : {4, 8}) {
        std::vector<Rational> pi{0, 5};
        EXPECT_EQ(adjust<AdditiveScale>(net, {f}, pi, 2, none), std::vector<Rational>{f});
    }
}

TEST(PhaseMain, SingleForcedAugmentation)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.set_state({0}, {0, 0}, 4);
    EXPECT_EQ(engine.run_phase_main(), 1u);
    EXPECT_EQ(engine.flow(), std::vector<Rational>{4});
    EXPECT_EQ(engine.current_excess(), 0);
}

TEST(PhaseMain, NothingToDoAtZeroExcess)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.set_state({4}, {0, 8}, 1);
    EXPECT_EQ(engine.run_phase_main(), 0u);
    EXPECT_EQ(engine.flow(), std::vector<Rational>{4});
}

TEST(PhaseMain, ParallelArcsShareTheFlow)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.set_state({0, 0}, {0, 0}, 2);
    EXPECT_EQ(engine.run_phase_main(), 2u);
    EXPECT_EQ(engine.flow(), (std::vector<Rational>{2, 2}));
    const auto& ev = engine.events();
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].path, (std::vector<PathStep>{{0, true}}));
    EXPECT_EQ(ev[1].path, (std::vector<PathStep>{{1, true}}));
    EXPECT_EQ(engine.report().total_violations(), 0u);
}

TEST(Extend, ThresholdIsStrict)
{
    auto net = arc_pair(0, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    ScalingEngine<AdditiveScale> engine(net, hooks);
    // (2n + m + 1) delta = 6 with n = 2, m = 1, delta = 1.
    engine.set_state({6}, {0, 0}, 1);
    EXPECT_FALSE(engine.extend());
    EXPECT_TRUE(engine.revealed().empty());
    engine.set_state({7}, {0, 0}, 1);
    EXPECT_TRUE(engine.extend());
    EXPECT_TRUE(engine.revealed().contains(0));
}

TEST(Extend, ReroutesAroundLinearCycle)
{
    FlowNetwork net;
    net.add_node(0);
    net.add_node(0);
    net.add_arc(0, 1, CostDescriptor::linear(1));
    net.add_arc(1, 0, CostDescriptor::linear(1));
    ScriptedBackend hooks;
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.reveal(0);
    engine.set_state({10, 100}, {0, 0}, 1);
    EXPECT_FALSE(engine.extend());
    EXPECT_EQ(engine.flow(), (std::vector<Rational>{-90, 0}));
    EXPECT_EQ(engine.revealed().arcs(), std::vector<ArcId>{0});
    ASSERT_EQ(engine.events().size(), 1u);
    EXPECT_EQ(engine.events()[0].type, EventType::Reroute);
    EXPECT_EQ(engine.events()[0].value, std::optional<Rational>(100));
}

TEST(TrialAndError, TerminatesOnExactZeroError)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    hooks.trial_answer = {{4}, {Rational(0), Rational(8)}};
    hooks.error_answer = {Rational(0), std::vector<Rational>{0, 8}};
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.reveal(0);
    engine.set_state({4}, {0, 8}, 1);
    auto out = engine.trial_and_error();
    ASSERT_TRUE(std::holds_alternative<Terminate>(out));
    EXPECT_EQ(std::get<Terminate>(out).flow, std::vector<Rational>{4});
}

TEST(TrialAndError, KeepsStateWhenErrorIsLarge)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    hooks.trial_answer = {{4}, {Rational(0), Rational(8)}};
    hooks.error_answer = {Rational(4), std::vector<Rational>{0, 0}};
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.reveal(0);
    engine.set_state({4}, {0, 0}, 4);
    EXPECT_TRUE(std::holds_alternative<KeepAndHalve>(engine.trial_and_error()));
    hooks.error_answer = {std::nullopt, std::nullopt};
    EXPECT_TRUE(std::holds_alternative<KeepAndHalve>(engine.trial_and_error()));
}

TEST(TrialAndError, NewStateTakesTheError)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    hooks.trial_answer = {{4}, {Rational(0), Rational(8)}};
    hooks.error_answer = {Rational(1), std::vector<Rational>{0, 7}};
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.reveal(0);
    engine.set_state({4}, {0, 0}, 8);
    auto out = engine.trial_and_error();
    ASSERT_TRUE(std::holds_alternative<NewState>(out));
    EXPECT_EQ(std::get<NewState>(out).delta, 1);
    EXPECT_EQ(std::get<NewState>(out).potentials, (std::vector<Rational>{0, 7}));
}

TEST(TrialAndError, RejectsTrialOffRevealedSet)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(1, 0));
    ScriptedBackend hooks;
    hooks.trial_answer = {{4, 0}, {Rational(0), Rational(8)}};
    hooks.error_answer = {Rational(0), std::vector<Rational>{0, 8}};
    ScalingEngine<AdditiveScale> engine(net, hooks);
    engine.reveal(1);
    engine.set_state({0, 0}, {0, 0}, 1);
    EXPECT_THROW(engine.trial_and_error(), InvariantViolation);
}

TEST(Enhanced, SingleArc)
{
    auto sol = solve_quadratic(cftest::plain(arc_pair(4, CostDescriptor::quadratic(1, 0))));
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_EQ(sol.flow, std::vector<Rational>{4});
    EXPECT_EQ(sol.potentials[1] - sol.potentials[0], 8);
    EXPECT_EQ(sol.engine.report.total_violations(), 0u);
}

TEST(Enhanced, ParallelArcsSplitByCurvature)
{
    auto sol = solve_quadratic(cftest::plain(arc_pair(6, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(2, 0))));
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_EQ(sol.flow, (std::vector<Rational>{4, 2}));
}

TEST(Enhanced, SymmetricParallelArcs)
{
    auto sol = solve_quadratic(cftest::plain(arc_pair(4, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(1, 0))));
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_EQ(sol.flow, (std::vector<Rational>{2, 2}));
}

TEST(Enhanced, ZeroInstanceTerminatesAtOnce)
{
    FlowNetwork net;
    net.add_node(0);
    net.add_node(0);
    net.add_arc(0, 1, CostDescriptor::quadratic(1, 1));
    net.add_arc(1, 0, CostDescriptor::quadratic(1, 1));
    QuadraticBackend backend(net);
    auto res = run_enhanced(net, backend);
    EXPECT_EQ(res.status, SolveStatus::Optimal);
    EXPECT_EQ(res.phases, 0u);
    EXPECT_EQ(res.flow, (std::vector<Rational>{0, 0}));
}

TEST(Enhanced, NegativeLinearCycleIsUnbounded)
{
    FlowNetwork net;
    net.add_node(0);
    net.add_node(0);
    net.add_arc(0, 1, CostDescriptor::linear(2));
    net.add_arc(1, 0, CostDescriptor::linear(-6));
    QuadraticBackend backend(net);
    auto res = run_enhanced(net, backend);
    EXPECT_EQ(res.status, SolveStatus::Unbounded);
}

TEST(Enhanced, UnreachableDemandIsInfeasible)
{
    FlowNetwork net;
    net.add_node(-1);
    net.add_node(1);
    net.add_arc(1, 0, CostDescriptor::quadratic(1, 0));
    auto sol = solve_quadratic(cftest::plain(net));
    EXPECT_EQ(sol.status, SolveStatus::Infeasible);
}

TEST(Enhanced, RequiresStrongConnectivity)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    QuadraticBackend backend(net);
    EXPECT_THROW(run_enhanced(net, backend), ContractViolation);
}

TEST(FOptimal, FeasibleVectorUnchanged)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    std::vector<Rational> f{4}, pi{0, 8};
    EXPECT_EQ(f_optimal_to_optimal<AdditiveScale>(net, f, pi), f);
}

TEST(FOptimal, ReroutesOverTightLinearArc)
{
    FlowNetwork net;
    net.add_node(1);
    net.add_node(-1);
    net.add_arc(0, 1, CostDescriptor::linear(2));
    net.add_arc(1, 0, CostDescriptor::linear(-2));
    std::vector<Rational> f{-1, 0}, pi{0, 2};
    EXPECT_EQ(f_optimal_to_optimal<AdditiveScale>(net, f, pi), (std::vector<Rational>{0, 1}));
}

TEST(FOptimal, NonlinearValuesKept)
{
    auto net = arc_pair(6, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(2, 0));
    std::vector<Rational> f{4, 2}, pi{0, 8};
    EXPECT_EQ(f_optimal_to_optimal<AdditiveScale>(net, f, pi), f);
    std::vector<Rational> bad{7, -1};
    EXPECT_THROW(f_optimal_to_optimal<AdditiveScale>(net, bad, pi), InvariantViolation);
}

TEST(Basic, ZeroBudgetIsZeroFlow)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ensure_strongly_connected(net);
    auto run = run_basic(net, 4, 0);
    for (const auto& x : run.flow) EXPECT_EQ(x, 0);
}

TEST(Basic, OnePhaseRoutesTheDemand)
{
    auto net = arc_pair(4, CostDescriptor::quadratic(1, 0));
    ensure_strongly_connected(net);
    auto run = run_basic(net, 4, 1);
    EXPECT_EQ(run.main_end.at(0)[0], 4);
    EXPECT_EQ(run.flow[0], 4);
    EXPECT_EQ(run.report.total_violations(), 0u);
}

TEST(Basic, ConvergesAtTheScaleRate)
{
    auto net = arc_pair(6, CostDescriptor::quadratic(1, 0), CostDescriptor::quadratic(2, 0));
    ensure_strongly_connected(net);
    std::size_t n = net.node_count(), m = net.arc_count();
    Rational d0 = 2;
    auto run = run_basic(net, d0, 10);
    Rational scale = d0 * (2 * n + m + 1);
    for (std::size_t k = 1; k <= 10; ++k) {
        const auto& f = run.main_end[k - 1];
        EXPECT_LE(abs_value(f[0] - 4), scale) << k;
        EXPECT_LE(abs_value(f[1] - 2), scale) << k;
        scale /= 2;
    }
    EXPECT_EQ(run.report.total_violations(), 0u);
}

TEST(ModeEquivalence, LinearTwinsAugmentAlike)
{
    cftest::Rng rng(77);
    for (int it = 0; it < 60; ++it) {
        auto twins = cftest::random_linear_twins(rng);
        cftest::LinearOnlyBackend<AdditiveScale> add_hooks(twins.additive);
        cftest::LinearOnlyBackend<MultiplicativeScale> mul_hooks(twins.multiplicative);
        auto a = run_enhanced(twins.additive, add_hooks);
        auto b = run_enhanced(twins.multiplicative, mul_hooks);
        ASSERT_EQ(a.status, b.status);
        EXPECT_EQ(a.flow, b.flow);
        EXPECT_EQ(a.revealed, b.revealed);
        ASSERT_EQ(a.events.size(), b.events.size()) << "instance " << it;
        for (std::size_t e = 0; e < a.events.size(); ++e) {
            EXPECT_EQ(a.events[e].type, b.events[e].type);
            EXPECT_EQ(a.events[e].phase, b.events[e].phase);
            EXPECT_EQ(a.events[e].delta, b.events[e].delta);
            EXPECT_EQ(a.events[e].path, b.events[e].path);
            EXPECT_EQ(a.events[e].arc, b.events[e].arc);
        }
        for (NodeId v = 0; v < twins.additive.node_count() && a.status == SolveStatus::Optimal; ++v) {
            // mu = 2^pi up to a common factor.
            Rational ratio = b.potentials[v] / b.potentials[0];
            Rational diff = a.potentials[v] - a.potentials[0];
            EXPECT_EQ(ratio, cftest::pow2(diff.get_num().get_si()));
        }
    }
}

TEST(Invariants, RandomQuadraticRunsAreClean)
{
    cftest::Rng rng(3);
    for (int it = 0; it < 40; ++it) {
        auto net = cftest::random_quadratic(rng);
        auto sol = solve_quadratic(cftest::plain(net), {true, std::nullopt});
        const auto& r = sol.engine.report;
        EXPECT_EQ(r.total_violations(), 0u) << (r.messages.empty() ? "" : r.messages.front());
        std::size_t phases = 0;
        for (const auto& e : sol.engine.events)
            if (e.type == EventType::PhaseStart) ++phases;
        EXPECT_EQ(phases, sol.engine.phases);
        const auto& en = sol.reduced.network;
        EXPECT_LE(phases, phase_bound(en.node_count(), en.arc_count(), en.nonlinear_count()));
        if (sol.status == SolveStatus::Optimal) {
            EXPECT_TRUE(reference::kkt_check(en, sol.engine.flow, sol.engine.potentials).optimal);
        }
    }
}
