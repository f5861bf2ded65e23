#include "confmatch/leading_order.hpp"
#include "confmatch/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace confmatch {

std::string to_string(Method m)
{
    switch (m) {
        case Method::direct: return "direct";
        case Method::matched: return "matched";
        case Method::leading: return "leading";
    }
    return "unknown";
}

std::string to_string(Stability s)
{
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::unknown: return "unknown";
    }
    return "unknown";
}

namespace {
const double kSqrt2 = std::numbers::sqrt2;

void check_height(double h)
{
    if (!(h >= 0.0) || h > kSqrt2 * (1 + 1e-15)) throw ValidationError("h_out0 must lie in [0, sqrt(2)]");
}
}  // namespace

double eta_from_height(double h)
{
    check_height(h);
    double a = std::atan2(2.0 - h * h, h * std::sqrt(std::max(0.0, 4.0 - h * h)));
    a = std::clamp(a, 0.0, std::numbers::pi / 2);
    return 1.0 / (2.0 - 2.0 / std::numbers::pi * a);
}

double tip_force(double h)
{
    check_height(h);
    return h * std::sqrt(4.0 - h * h);
}

double tip_force_from_eta(double eta) { return 2.0 * std::sin(std::numbers::pi * (1.0 - eta) / (2.0 * eta)); }

OuterProfileParams outer_profile_params(double h_out0)
{
    return {h_out0, eta_from_height(h_out0), tip_force(h_out0)};
}

double implicit_lhs(double h, double h0)
{
    const double s = std::sqrt(4.0 - h * h);
    const double s0 = std::sqrt(4.0 - h0 * h0);
    return std::log((2.0 + s) / (2.0 + s0)) - std::log(h / h0) + s0 - s;
}

double outer_height_implicit(double h0, double x)
{
    if (!(h0 > 0.0) || h0 >= kSqrt2) throw ValidationError("h_out0 must lie in (0, sqrt(2))");
    if (!(x >= 0.0)) throw ValidationError("x must be nonnegative");
    if (x == 0.0) return h0;
    // bisection in log h; the left side is monotone in h
    double lo = std::log(1e-300), hi = std::log(h0);
    if (implicit_lhs(1e-300, h0) < x) return 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (implicit_lhs(std::exp(mid), h0) > x)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double leading_q(double l, double h0)
{
    if (!(h0 >= 0.0) || h0 > l) throw ValidationError("need 0 <= h0 <= l");
    if (h0 > kSqrt2) throw ValidationError("h0 must not exceed sqrt(2)");
    return std::sqrt(2.0 * std::numbers::pi * h0 * std::sqrt(4.0 - h0 * h0) * (l - h0));
}

Branch leading_branch(double l, const std::vector<double>& grid)
{
    Branch b;
    b.l = l;
    for (double h0 : grid) {
        if (!(h0 > 0.0) || h0 >= l) throw ValidationError("grid values must lie in (0, l)");
        BranchPoint p;
        p.h0 = h0;
        p.q = leading_q(l, h0);
        p.method = Method::leading;
        b.points.push_back(p);
    }
    return b;
}

}  // namespace confmatch
