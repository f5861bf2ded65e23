#include "confmatch/matcher.hpp"
#include "confmatch/leading_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace confmatch {

std::string to_string(NodeSet s)
{
    switch (s) {
        case NodeSet::single: return "single";
        case NodeSet::inner: return "inner";
        case NodeSet::outer: return "outer";
    }
    return "unknown";
}

double MatchedSolution::q() const { return std::sqrt(match.epsilon) * inner.Q; }

MatchParams match_params(const OuterSolution& outer, const InnerSolution& inner, double eps)
{
    if (std::abs(outer.eta - inner.eta) > 1e-12) throw ValidationError("inner and outer eta differ");
    if (!outer.converged || !inner.converged) throw ValidationError("inner and outer solutions must be converged");
    if (!(eps > 0.0)) throw ValidationError("epsilon must be positive");
    const double D = matching_constant(outer);
    if (!(D > 0.0)) throw DomainError("alpha - 2 sum j beta_j is not positive");
    MatchParams mp;
    mp.epsilon = eps;
    mp.c = -inner.C_asy;
    mp.K = inner.A * std::pow(outer.t, 1.0 - outer.eta) / D;
    const double k = mp.K * std::pow(eps, outer.eta);
    mp.a = (k - 1.0) / (k + 1.0);
    if (!(std::abs(mp.a) < 1.0)) throw DomainError("epsilon too large to match");
    return mp;
}

MatchedSolution make_matched(const OuterSolution& outer, const InnerSolution& inner, double eps)
{
    MatchedSolution ms;
    ms.outer = outer;
    ms.inner = inner;
    ms.match = match_params(outer, inner, eps);
    ms.l = outer.h_out0 + eps * (1.0 + inner.T + ms.match.c);
    ms.h0 = outer.h_out0 + eps * (inner.T + ms.match.c);
    return ms;
}

Jet overlap_jet(const MatchedSolution& ms, cplx w)
{
    const double p = 1.0 / ms.inner.eta;
    const double eps = ms.match.epsilon;
    const double A = ms.inner.A;
    const cplx u = 1.0 + w;
    const cplx v = (1.0 - w) / u;
    const cplx v1 = -2.0 / (u * u);
    const cplx v2 = 4.0 / (u * u * u);
    if (v == cplx(0.0)) return {cplx(ms.outer.h_out0), 0.0, 0.0};
    const cplx Av = A * v;
    const cplx P = std::pow(Av, p);
    const cplx P1 = p * std::pow(Av, p - 1.0) * A * v1;
    const cplx P2 = p * (p - 1.0) * std::pow(Av, p - 2.0) * A * A * v1 * v1 + p * std::pow(Av, p - 1.0) * A * v2;
    return {ms.outer.h_out0 + eps * P, eps * P1, eps * P2};
}

Jet composite_jet(const MatchedSolution& ms, cplx w)
{
    if (w == cplx(-1.0)) throw DomainError("omega = -1 is the pole");
    const double eps = ms.match.epsilon;
    const double a = ms.match.a;
    const Jet gi = inner_eval(ms.inner, w);
    const cplx den = 1.0 - a * w;
    const cplx W = (w - a) / den;
    const cplx W1 = (1.0 - a * a) / (den * den);
    const cplx W2 = 2.0 * a * (1.0 - a * a) / (den * den * den);
    const Jet go = outer_eval(ms.outer, W);
    const Jet gc = overlap_jet(ms, w);
    Jet out;
    out.v = ms.outer.h_out0 + eps * (gi.v + ms.match.c) + go.v - gc.v;
    out.d1 = eps * gi.d1 + go.d1 * W1 - gc.d1;
    out.d2 = eps * gi.d2 + go.d2 * W1 * W1 + go.d1 * W2 - gc.d2;
    return out;
}

cplx composite_eval(const MatchedSolution& ms, cplx w) { return composite_jet(ms, w).v; }

OverlapGap overlap_gap(const MatchedSolution& ms, double r, const std::vector<cplx>& taus)
{
    if (!(ms.match.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    const double eps = ms.match.epsilon;
    const double a = ms.match.a;
    OverlapGap g;
    for (const cplx& tau : taus) {
        if (!(tau.real() > 0.0)) throw ValidationError("tau must have positive real part");
        const cplx w = -1.0 + std::pow(eps, r) * tau;
        if (!(std::abs(w) < 1.0)) throw ValidationError("intermediate point outside the disk");
        const cplx fin = ms.outer.h_out0 + eps * (inner_eval(ms.inner, w).v + ms.match.c);
        const cplx fout = outer_eval(ms.outer, (w - a) / (1.0 - a * w)).v;
        const cplx fc = overlap_jet(ms, w).v;
        g.gap_in = std::max(g.gap_in, std::abs(fin - fc));
        g.gap_out = std::max(g.gap_out, std::abs(fout - fc));
    }
    return g;
}

std::vector<TaggedSample> matched_profile(const MatchedSolution& ms, int n_inner, int n_outer)
{
    std::vector<TaggedSample> out;
    const double a = ms.match.a;
    for (int k = 0; k < n_inner; ++k) {
        const double th = std::numbers::pi * k / n_inner;
        const cplx F = composite_eval(ms, std::polar(1.0, th));
        out.push_back({th, -F.imag(), F.real(), NodeSet::inner});
    }
    for (int k = 0; k < n_outer; ++k) {
        const cplx W = std::polar(1.0, std::numbers::pi * k / n_outer);
        const cplx w = (W + a) / (1.0 + a * W);
        const cplx F = composite_eval(ms, w);
        out.push_back({std::arg(w), -F.imag(), F.real(), NodeSet::outer});
    }
    return out;
}

std::vector<double> composite_residual(const MatchedSolution& ms, int n_inner, int n_outer)
{
    const double q = ms.q();
    const double a = ms.match.a;
    std::vector<double> r;
    auto at = [&](cplx w) {
        const Jet j = to_theta(composite_jet(ms, w), w);
        const double s = std::abs(j.d1);
        r.push_back(q * q / (4.0 * std::numbers::pi * std::numbers::pi * s * s) - j.v.real() +
                    std::imag(j.d2 * std::conj(j.d1)) / (s * s * s));
    };
    for (int k = 1; k < n_inner; ++k) at(std::polar(1.0, std::numbers::pi * k / n_inner));
    for (int k = 1; k < n_outer; ++k) {
        const cplx W = std::polar(1.0, std::numbers::pi * k / n_outer);
        at((W + a) / (1.0 + a * W));
    }
    return r;
}

TailDip tail_dip(const MatchedSolution& ms, double x_lo, double x_hi)
{
    TailDip d{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
    const double a = ms.match.a;
    const int n = 4096;
    for (int k = 1; k < n; ++k) {
        const cplx W = std::polar(1.0, std::numbers::pi * k / n);
        const cplx F = composite_eval(ms, (W + a) / (1.0 + a * W));
        const double x = -F.imag();
        if (x >= x_lo && x <= x_hi && F.real() < d.min_h) {
            d.min_h = F.real();
            d.x_at = x;
        }
    }
    return d;
}

namespace {

template <class Map>
const typename Map::mapped_type* nearest(const Map& m, double key)
{
    if (m.empty()) return nullptr;
    auto it = m.lower_bound(key);
    if (it == m.end()) return &std::prev(it)->second;
    if (it == m.begin()) return &it->second;
    auto prev = std::prev(it);
    return (key - prev->first < it->first - key) ? &prev->second : &it->second;
}

}  // namespace

const InnerSolution& MatchContext::inner_for(double h)
{
    auto it = inner_.find(h);
    if (it != inner_.end()) return it->second;
    const InnerSolution* init = nearest(inner_, h);
    InnerSolution s = solve_inner(eta_from_height(h), T, M_in, init);
    if (!s.converged && init) s = solve_inner(eta_from_height(h), T, M_in);
    if (!s.converged) throw ConvergenceError("inner solve did not converge at h_out0 = " + std::to_string(h));
    return inner_.emplace(h, std::move(s)).first->second;
}

const OuterSolution& MatchContext::outer_for(double h)
{
    auto it = outer_.find(h);
    if (it != outer_.end()) return it->second;
    const OuterSolution* init = nearest(outer_, h);
    OuterSolution s = solve_outer(h, M_out, t, init);
    if (!s.converged) throw ConvergenceError("outer solve did not converge at h_out0 = " + std::to_string(h));
    return outer_.emplace(h, std::move(s)).first->second;
}

Inversion invert_parameters(double l, double h0, MatchContext& ctx)
{
    if (!(h0 > 0.0) || !(h0 < l)) throw ValidationError("need 0 < h0 < l");
    const double eps = l - h0;
    auto implied = [&](double h) {
        const InnerSolution& in = ctx.inner_for(h);
        return h + eps * (1.0 + in.T - in.C_asy) - l;
    };
    const double hmax = std::numbers::sqrt2 - 1e-3;
    double x0 = std::min(h0, hmax), x1 = std::min(l, hmax);
    if (x1 == x0) x0 = x1 - 0.1 * eps;
    Inversion inv;
    inv.epsilon = eps;
    auto window = [&](const std::string& why) {
        return ValidationError("(l, h0) = (" + std::to_string(l) + ", " + std::to_string(h0) +
                               ") is outside the matching window: " + why +
                               "; need h_out0 = l - eps (1 + T - C_asy) in (0, 1.414) with a solvable inner problem");
    };
    double f0, f1;
    try {
        f0 = implied(x0);
        f1 = implied(x1);
        for (inv.iterations = 0; inv.iterations < 40 && std::isfinite(f1) && std::abs(f1) > 1e-12; ++inv.iterations) {
            if (f1 == f0) break;
            double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x2 = std::clamp(x2, 1e-3, hmax);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = implied(x1);
        }
    } catch (const ConvergenceError& e) {
        throw window(e.what());
    }
    if (!(std::abs(f1) <= 1e-9)) throw window("no root, implied l misses by " + std::to_string(f1));
    inv.h_out0 = x1;
    return inv;
}

}  // namespace confmatch
