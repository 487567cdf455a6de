#include "support.hpp"

#include <convexflow/fisher.hpp>
#include <convexflow/quadratic.hpp>
#include <convexflow/reference_oracle.hpp>

#include <gtest/gtest.h>

using namespace convexflow;

namespace {

FlowNetwork single_arc(const Rational& c, const Rational& d)
{
    FlowNetwork net(OracleMode::Additive);
    net.add_node(-4);
    net.add_node(4);
    net.add_arc(0, 1, CostDescriptor::quadratic(c, d));
    return net;
}

}

TEST(BruteForce, SingleArcCarriesDemand)
{
    auto net = single_arc(1, 0);
    QuadraticBackend backend(net);
    auto r = reference::brute_force_support(net, backend);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.flow, std::vector<Rational>{4});
}

TEST(BruteForce, ParallelArcsSplitByCurvature)
{
    FlowNetwork net(OracleMode::Additive);
    net.add_node(-6);
    net.add_node(6);
    net.add_arc(0, 1, CostDescriptor::quadratic(1, 0));
    net.add_arc(0, 1, CostDescriptor::quadratic(2, 0));
    QuadraticBackend backend(net);
    auto r = reference::brute_force_support(net, backend);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.flow, (std::vector<Rational>{4, 2}));
}

TEST(BruteForce, DiagonalMarketPricesAreBudgets)
{
    auto mn = build_shmyrev({{2, 3}, 2, {{0, 0, 1}, {1, 1, 1}}});
    FisherBackend backend(mn);
    auto r = reference::brute_force_support(mn.network, backend);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(market_prices(mn, r.flow), (std::vector<Rational>{2, 3}));
}

TEST(BruteForce, NegativeLinearCycleIsUnbounded)
{
    FlowNetwork net(OracleMode::Additive);
    net.add_node(0);
    net.add_node(0);
    net.add_arc(0, 1, CostDescriptor::linear(-2));
    net.add_arc(1, 0, CostDescriptor::linear(1));
    QuadraticBackend backend(net);
    EXPECT_EQ(reference::brute_force_support(net, backend).status, SolveStatus::Unbounded);
}

TEST(KktCheck, TightPotentialsAreOptimal)
{
    auto net = single_arc(1, 0);
    std::vector<Rational> f{4}, pi{0, 8};
    EXPECT_TRUE(reference::kkt_check(net, f, pi).optimal);
}

TEST(KktCheck, ReportsViolatedArc)
{
    auto net = single_arc(1, 0);
    std::vector<Rational> f{4}, pi{0, 9};
    auto k = reference::kkt_check(net, f, pi);
    EXPECT_FALSE(k.optimal);
    ASSERT_TRUE(k.arc.has_value());
    EXPECT_EQ(*k.arc, 0u);
    EXPECT_TRUE(k.forward);
    EXPECT_EQ(k.slack, -1);
}

TEST(KktCheck, EmptyNetwork)
{
    FlowNetwork net(OracleMode::Additive);
    EXPECT_TRUE(reference::kkt_check(net, {}, {}).optimal);
}

TEST(KktCheck, OptimalityPotentialsAgreeWithCheck)
{
    auto net = single_arc(1, 0);
    std::vector<Rational> good{4};
    auto pi = reference::optimality_potentials(net, good);
    ASSERT_TRUE(pi.has_value());
    EXPECT_TRUE(reference::kkt_check(net, good, *pi).optimal);
}

TEST(BoxFlow, ExistsOnlyWithinBounds)
{
    std::vector<reference::BoxArc> arcs{{0, 1, Rational(0), Rational(3)}, {0, 1, Rational(1), std::nullopt}};
    std::vector<Rational> b{-5, 5};
    EXPECT_TRUE(reference::box_flow_exists(2, arcs, b));
    arcs[1].upper = Rational(1);
    EXPECT_FALSE(reference::box_flow_exists(2, arcs, b));
    b = {-1, 1};
    arcs[1].lower = Rational(2);
    arcs[1].upper = std::nullopt;
    EXPECT_FALSE(reference::box_flow_exists(2, arcs, b));
}
