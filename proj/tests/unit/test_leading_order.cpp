#include "confmatch/bifurcation.hpp"
#include "confmatch/leading_order.hpp"
#include "confmatch/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace confmatch;

namespace {

const double pi = std::numbers::pi;
const double sqrt2 = std::numbers::sqrt2;

// x(h) = int_h^{h0} ds / |h'(s)| with |h'| from the first integral 1/sqrt(1+h'^2) = 1 - h^2/2,
// Simpson in u = log s
double x_by_quadrature(double h0, double h)
{
    auto integrand = [](double u) {
        const double s = std::exp(u);
        const double c = 1.0 - s * s / 2.0;
        return s / std::sqrt(1.0 / (c * c) - 1.0);
    };
    const int n = 40000;
    const double a = std::log(h), b = std::log(h0), d = (b - a) / n;
    double acc = integrand(a) + integrand(b);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * integrand(a + k * d);
    return acc * d / 3.0;
}

double golden_max(double (*f)(double), double a, double b)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    while (b - a > 1e-12) {
        if (f(c) > f(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return 0.5 * (a + b);
}

double q_l1(double h) { return std::sqrt(2 * pi * h * std::sqrt(4 - h * h) * (1 - h)); }

}  // namespace

TEST_SUITE("leading_order")
{
    TEST_CASE("eta at the endpoints and at unit height")
    {
        CHECK(std::abs(eta_from_height(0.0) - 1.0) <= 1e-14);
        CHECK(std::abs(eta_from_height(sqrt2) - 0.5) <= 1e-14);
        CHECK(std::abs(eta_from_height(1.0) - 0.6) <= 1e-14);
        CHECK_THROWS_AS(eta_from_height(-0.1), ValidationError);
        CHECK_THROWS_AS(eta_from_height(1.5), ValidationError);
    }

    TEST_CASE("eta strictly decreasing with range (1/2, 1)")
    {
        double prev = 1.0;
        for (int k = 1; k < 400; ++k) {
            const double e = eta_from_height(sqrt2 * k / 400.0);
            CHECK(e < prev);
            CHECK(e > 0.5);
            prev = e;
        }
    }

    TEST_CASE("tip force values and its eta form")
    {
        CHECK(tip_force(0.0) == 0.0);
        CHECK(tip_force(1.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
        CHECK(tip_force(sqrt2) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(tip_force_from_eta(0.6) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
        for (int k = 1; k < 100; ++k) {
            const double h = sqrt2 * k / 100.0;
            CHECK(std::abs(tip_force(h) - tip_force_from_eta(eta_from_height(h))) <= 1e-12);
        }
        const OuterProfileParams p = outer_profile_params(1.0);
        CHECK(p.eta == eta_from_height(1.0));
        CHECK(p.lambda == tip_force(1.0));
    }

    TEST_CASE("leading charge law")
    {
        CHECK(leading_q(1.0, 1.0) == 0.0);
        CHECK(leading_q(1.0, 0.0) == 0.0);
        CHECK(leading_q(1.0, 0.99) == doctest::Approx(std::sqrt(2 * pi * 0.99 * std::sqrt(3.0199) * 0.01)));
        CHECK(leading_q(1.0, 0.99) == doctest::Approx(0.3288).epsilon(1e-3));
        CHECK_THROWS_AS(leading_q(1.0, 1.2), ValidationError);
    }

    TEST_CASE("implicit profile: tip, relation residual and quadrature oracle")
    {
        for (double h0 : {0.2, 0.65, 1.0, 1.3}) {
            CHECK(outer_height_implicit(h0, 0.0) == h0);
            for (double x : {0.05, 0.5, 1.0, 2.5, 5.0, 10.0}) {
                const double h = outer_height_implicit(h0, x);
                REQUIRE(h > 0.0);
                CHECK(h < h0);
                CHECK(std::abs(implicit_lhs(h, h0) - x) <= 1e-10);
                CHECK(std::abs(x_by_quadrature(h0, h) - x) <= 1e-8);
            }
        }
    }

    TEST_CASE("first integral along the implicit profile")
    {
        const double dx = 1e-5;
        for (double h0 : {0.3, 0.65, 1.0, 1.3}) {
            for (int k = 0; k <= 49; ++k) {
                const double x = 0.1 + k * 0.1;
                const double hp = (outer_height_implicit(h0, x + dx) - outer_height_implicit(h0, x - dx)) / (2 * dx);
                const double h = outer_height_implicit(h0, x);
                CHECK(std::abs(1.0 / std::sqrt(1.0 + hp * hp) + h * h / 2.0 - 1.0) <= 1e-6);
            }
        }
    }

    TEST_CASE("exponential decay with a positive limiting constant")
    {
        for (double h0 : {0.15, 0.65, 1.0, 1.29}) {
            double prev = 0.0;
            for (double x : {6.0, 7.0, 8.0, 9.0, 10.0}) {
                const double c = outer_height_implicit(h0, x) * std::exp(x);
                CHECK(c > 0.0);
                CHECK(c < 10.0 * h0);
                if (prev > 0.0) CHECK(std::abs(c - prev) < 1e-3 * prev);
                prev = c;
            }
        }
    }

    TEST_CASE("leading branch")
    {
        const Branch b = leading_branch(1.0, {0.25, 0.5, 0.75});
        REQUIRE(b.points.size() == 3);
        for (const BranchPoint& p : b.points) {
            CHECK(p.q > 0.0);
            CHECK(p.method == Method::leading);
        }
        CHECK(leading_branch(1.0, {1.0 - 1e-12}).points[0].q < 1e-5);
        CHECK_THROWS_AS(leading_branch(1.0, {1.0}), ValidationError);
    }

    TEST_CASE("leading fold matches the analytic maximizer")
    {
        std::vector<double> grid;
        for (int k = 1; k < 1000; ++k) grid.push_back(k / 1000.0);
        const Branch b = leading_branch(1.0, grid);
        const auto fold = find_fold(b);
        REQUIRE(fold.has_value());
        const double hs = golden_max(q_l1, 0.0, 1.0);
        CHECK(std::abs(fold->h0_star - hs) <= 1e-3);
        CHECK(std::abs(fold->q_star - q_l1(hs)) <= 1e-6);
    }

    TEST_CASE("leading branch below its fold is stable")
    {
        std::vector<double> grid;
        for (int k = 1; k < 40; ++k) grid.push_back(k / 40.0);
        const Branch b = stability_label(leading_branch(1.0, grid));
        const double hs = golden_max(q_l1, 0.0, 1.0);
        for (const BranchPoint& p : b.points) {
            if (p.h0 < hs - 0.03) CHECK(p.stable == Stability::stable);
            if (p.h0 > hs + 0.03) CHECK(p.stable == Stability::unstable);
        }
    }
}
