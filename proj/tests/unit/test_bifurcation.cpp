#include "confmatch/bifurcation.hpp"
#include "confmatch/leading_order.hpp"

#include <doctest.h>

#include <cmath>

using namespace confmatch;

namespace {

Branch synthetic(const std::vector<double>& h, double (*q)(double))
{
    Branch b;
    b.l = 1.0;
    for (double x : h) {
        BranchPoint p;
        p.h0 = x;
        p.q = q(x);
        b.points.push_back(p);
    }
    return b;
}

double parabola(double h) { return 2.0 - 3.0 * (h - 0.43) * (h - 0.43); }
double rising(double h) { return std::sqrt(h); }

const Branch& direct64()
{
    static const Branch b = [] {
        std::vector<double> g;
        for (int k = 1; k <= 19; ++k) g.push_back(0.05 * k);
        g.push_back(0.99);
        return stability_label(continue_branch(1.0, g, 64));
    }();
    return b;
}

std::vector<double> dense_grid()
{
    std::vector<double> g;
    for (int k = 1; k < 1000; ++k) g.push_back(k / 1000.0);
    return g;
}

}  // namespace

TEST_SUITE("bifurcation")
{
    TEST_CASE("fold of an exact parabola")
    {
        const auto f = find_fold(synthetic({0.1, 0.3, 0.5, 0.7}, parabola));
        REQUIRE(f.has_value());
        CHECK(f->h0_star == doctest::Approx(0.43).epsilon(1e-12));
        CHECK(f->q_star == doctest::Approx(2.0).epsilon(1e-12));
    }

    TEST_CASE("no fold on monotone or short branches")
    {
        CHECK_FALSE(find_fold(synthetic({0.1, 0.2, 0.3, 0.4}, rising)).has_value());
        CHECK_FALSE(find_fold(synthetic({0.1, 0.5}, parabola)).has_value());
        CHECK_FALSE(find_fold(Branch{}).has_value());
    }

    TEST_CASE("failed points are ignored by the fold")
    {
        Branch b = synthetic({0.1, 0.3, 0.5, 0.7}, parabola);
        BranchPoint bad;
        bad.h0 = 0.8;
        bad.q = 50.0;
        bad.converged = false;
        b.points.push_back(bad);
        const auto f = find_fold(b);
        REQUIRE(f.has_value());
        CHECK(f->h0_star == doctest::Approx(0.43).epsilon(1e-12));
    }

    TEST_CASE("stability labels on synthetic branches")
    {
        const Branch b = stability_label(synthetic({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, parabola));
        for (const BranchPoint& p : b.points) {
            if (p.h0 < 0.35) CHECK(p.stable == Stability::stable);
            if (p.h0 > 0.45) CHECK(p.stable == Stability::unstable);
        }
        CHECK(b.points[3].stable == Stability::unknown);
        for (const BranchPoint& p : stability_label(synthetic({0.1, 0.2, 0.3}, rising)).points)
            CHECK(p.stable == Stability::stable);
    }

    TEST_CASE("single point continuation")
    {
        const Branch b = continue_branch(1.0, {0.3}, 64);
        REQUIRE(b.points.size() == 1);
        CHECK(b.points[0].converged);
        CHECK(b.points[0].method == Method::direct);
        CHECK_FALSE(b.fold.has_value());
    }

    TEST_CASE("continuation argument checks")
    {
        CHECK_THROWS_AS(continue_branch(1.0, {0.3, 0.2}, 64), ValidationError);
        CHECK_THROWS_AS(continue_branch(1.0, {0.3, 1.0}, 64), ValidationError);
        CHECK_THROWS_AS(continue_branch(1.0, {0.0, 0.3}, 64), ValidationError);
        CHECK_THROWS_AS(continue_branch(1.0, {0.995}, 64), ConvergenceError);
    }

    TEST_CASE("direct branch rises, folds and breaks down")
    {
        const Branch& b = direct64();
        REQUIRE(b.points.size() == 20);
        REQUIRE(b.fold.has_value());
        double qmax = 0.0;
        for (const BranchPoint& p : b.points) {
            CHECK(p.q >= 0.0);
            if (p.converged) qmax = std::max(qmax, p.q);
        }
        CHECK(b.fold->q_star >= qmax);
        CHECK(b.fold->q_star - qmax <= 1e-2);
        CHECK(b.points.front().q < qmax);
        CHECK_FALSE(b.points.back().converged);
        int failed = 0;
        for (const BranchPoint& p : b.points) failed += !p.converged;
        CHECK(failed >= 1);
        for (std::size_t k = 1; k < b.points.size(); ++k) CHECK(b.points[k].h0 > b.points[k - 1].h0);
    }

    TEST_CASE("direct branch stability")
    {
        const Branch& b = direct64();
        REQUIRE(b.fold.has_value());
        for (const BranchPoint& p : b.points) {
            if (!p.converged) {
                CHECK(p.stable == Stability::unknown);
                continue;
            }
            if (p.h0 < b.fold->h0_star - 0.05) CHECK(p.stable == Stability::stable);
            if (p.h0 > b.fold->h0_star + 0.05) CHECK(p.stable == Stability::unstable);
        }
        CHECK(b.points[6].stable == Stability::stable);
    }

    TEST_CASE("direct fold near the leading fold")
    {
        const auto lead = find_fold(leading_branch(1.0, dense_grid()));
        REQUIRE(lead.has_value());
        REQUIRE(direct64().fold.has_value());
        INFO("direct ", direct64().fold->q_star, " leading ", lead->q_star);
        CHECK(std::abs(direct64().fold->q_star - lead->q_star) / lead->q_star <= 0.10);
    }

    TEST_CASE("matched branch from one solve pair")
    {
        MatchContext ctx;
        const Branch b = matched_branch(MatchedMode::fixed_hout0, 1.0, {0.17, 0.1, 0.03}, ctx);
        REQUIRE(b.points.size() == 3);
        const double Q = ctx.inner_for(1.0).Q;
        for (const BranchPoint& p : b.points) {
            CHECK(p.method == Method::matched);
            CHECK(p.converged);
            CHECK(std::abs(p.q / std::sqrt(p.eps) - Q) <= 1e-10);
            const MatchedSolution ms = make_matched(ctx.outer_for(1.0), ctx.inner_for(1.0), p.eps);
            CHECK(p.h0 == ms.h0);
        }
        for (std::size_t k = 1; k < b.points.size(); ++k) CHECK(b.points[k].h0 > b.points[k - 1].h0);
    }

    TEST_CASE("matched branch approaches zero charge at the plate height")
    {
        MatchContext ctx;
        const Branch b = matched_branch(MatchedMode::fixed_l, 1.0, {1e-2, 1e-4, 1e-6}, ctx);
        REQUIRE(b.points.size() == 3);
        for (const BranchPoint& p : b.points) CHECK(std::abs(p.h0 + p.eps - 1.0) <= 1e-6);
        CHECK(b.points.back().q < b.points.front().q);
        CHECK(b.points.back().q < 5e-3);
        CHECK(1.0 - b.points.back().h0 < 1e-5);
    }

    TEST_CASE("matched branch skips points that cannot be matched")
    {
        MatchContext ctx;
        const Branch b = matched_branch(MatchedMode::fixed_hout0, 1.0, {1e30, 0.1}, ctx);
        REQUIRE(b.points.size() == 1);
        CHECK(b.points[0].eps == 0.1);
        CHECK_THROWS_AS(matched_branch(MatchedMode::fixed_hout0, 1.0, {0.1, 0.0}, ctx), ValidationError);
    }
}
