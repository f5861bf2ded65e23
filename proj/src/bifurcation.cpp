#include "confmatch/bifurcation.hpp"
#include "confmatch/threads.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace confmatch {

namespace {

// Reaches h0 from a converged solution, inserting midpoints when the direct warm start fails.
DirectSolution reach(double l, double h0, int M, const DirectSolution& from, int depth, const NlsqOptions& o)
{
    DirectSolution s = solve_direct(l, h0, M, &from, o);
    if (s.converged || depth <= 0) return s;
    const double mid = 0.5 * (from.params.h0 + h0);
    const DirectSolution m = reach(l, mid, M, from, depth - 1, o);
    if (!m.converged) return s;
    DirectSolution s2 = reach(l, h0, M, m, depth - 1, o);
    return s2.converged ? s2 : s;
}

}  // namespace

Branch continue_branch(double l, const std::vector<double>& grid, int M, const ContinuationOptions& opts,
                       std::vector<DirectSolution>* solutions)
{
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0) || !(grid[k] < l)) throw ValidationError("grid values must lie in (0, l)");
        if (k && !(grid[k] > grid[k - 1])) throw ValidationError("grid must be increasing");
    }
    Branch b;
    b.l = l;
    std::optional<DirectSolution> last;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        DirectSolution s = last ? reach(l, grid[k], M, *last, opts.max_bisections, opts.nlsq)
                                : solve_direct(l, grid[k], M, nullptr, opts.nlsq);
        if (k == 0 && !s.converged)
            throw ConvergenceError("first continuation point failed at h0 = " + std::to_string(grid[k]) +
                                   ", residual " + std::to_string(s.residual_inf_norm));
        BranchPoint p;
        p.h0 = grid[k];
        p.q = std::abs(s.params.q);
        p.method = Method::direct;
        p.residual_inf_norm = s.residual_inf_norm;
        p.converged = s.converged;
        if (!s.converged) p.note = to_string(s.status);
        b.points.push_back(p);
        if (s.converged) last = s;
        if (solutions) solutions->push_back(std::move(s));
    }
    b.fold = find_fold(b);
    return b;
}

Branch matched_branch(MatchedMode mode, double value, const std::vector<double>& eps_grid, MatchContext& ctx)
{
    for (double e : eps_grid)
        if (!(e > 0.0)) throw ValidationError("eps grid must be positive");
    Branch b;
    b.l = mode == MatchedMode::fixed_l ? value : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> houts(eps_grid.size(), value);
    std::vector<std::string> notes(eps_grid.size());
    if (mode == MatchedMode::fixed_l) {
        for (std::size_t k = 0; k < eps_grid.size(); ++k) {
            try {
                houts[k] = invert_parameters(value, value - eps_grid[k], ctx).h_out0;
            } catch (const std::exception& e) {
                houts[k] = std::numeric_limits<double>::quiet_NaN();
                notes[k] = e.what();
            }
        }
    }
    // solves first (cached, sequential), then independent point assembly
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (std::isnan(houts[k])) continue;
        try {
            ctx.inner_for(houts[k]);
            ctx.outer_for(houts[k]);
        } catch (const std::exception& e) {
            notes[k] = e.what();
            houts[k] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    std::vector<BranchPoint> pts(eps_grid.size());
    std::vector<char> keep(eps_grid.size(), 0);
    const int nt = thread_cap();
#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        BranchPoint& p = pts[k];
        p.method = Method::matched;
        p.eps = eps_grid[k];
        if (std::isnan(houts[k])) continue;
        try {
            const MatchedSolution ms = make_matched(ctx.outer_for(houts[k]), ctx.inner_for(houts[k]), eps_grid[k]);
            p.h0 = ms.h0;
            p.q = ms.q();
            p.residual_inf_norm = std::max(ms.inner.residual_inf_norm, ms.outer.residual_inf_norm);
            p.converged = true;
            keep[k] = 1;
        } catch (const std::exception& e) {
            notes[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (keep[k]) b.points.push_back(pts[k]);
    std::sort(b.points.begin(), b.points.end(), [](const auto& x, const auto& y) { return x.h0 < y.h0; });
    b.fold = find_fold(b);
    return b;
}

std::optional<Fold> find_fold(const Branch& b)
{
    std::vector<const BranchPoint*> pts;
    for (const auto& p : b.points)
        if (p.converged) pts.push_back(&p);
    if (pts.size() < 3) return std::nullopt;
    std::size_t k = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i]->q > pts[k]->q) k = i;
    if (k == 0 || k + 1 == pts.size()) return std::nullopt;
    const double x0 = pts[k - 1]->h0, x1 = pts[k]->h0, x2 = pts[k + 1]->h0;
    const double y0 = pts[k - 1]->q, y1 = pts[k]->q, y2 = pts[k + 1]->q;
    // Newton divided differences
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double c2 = (d12 - d01) / (x2 - x0);
    if (!(c2 < 0.0)) return Fold{y1, x1};
    const double c1 = d01 - c2 * (x0 + x1);
    const double xs = -c1 / (2.0 * c2);
    const double ys = y0 + d01 * (xs - x0) + c2 * (xs - x0) * (xs - x1);
    return Fold{ys, xs};
}

Branch stability_label(const Branch& in)
{
    Branch b = in;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        b.points[i].stable = Stability::unknown;
        if (b.points[i].converged) idx.push_back(i);
    }
    if (idx.size() < 2) return b;
    std::size_t kmax = 0;
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (b.points[idx[i]].q > b.points[idx[kmax]].q) kmax = i;
    const bool interior = kmax > 0 && kmax + 1 < idx.size();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (interior && i == kmax) continue;
        const auto& lo = b.points[idx[i == 0 ? 0 : i - 1]];
        const auto& hi = b.points[idx[i + 1 == idx.size() ? i : i + 1]];
        const double dq = hi.q - lo.q;
        if (dq > 0.0)
            b.points[idx[i]].stable = Stability::stable;
        else if (dq < 0.0)
            b.points[idx[i]].stable = Stability::unstable;
    }
    return b;
}

}  // namespace confmatch
