#include "confmatch/direct_solver.hpp"
#include "confmatch/leading_order.hpp"
#include "fft_ld.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace confmatch {

using detail::cld;
using detail::ld;

namespace {

constexpr double kDegenerate = 1e-14;

template <class R, class C>
R residual_at(const C& f, const C& ft, const C& ftt, R q)
{
    const R a = std::abs(ft);
    const R pi = std::numbers::pi_v<R>;
    return q * q / (4 * pi * pi * a * a) - f.real() + std::imag(ftt * std::conj(ft)) / (a * a * a);
}

}  // namespace

NlsqOptions default_direct_options()
{
    NlsqOptions o;
    o.max_iterations = 100;
    o.fd_step = 1e-9;
    return o;
}

std::vector<double> residual_full(const BoundaryTrace& tr, double q)
{
    std::vector<double> r(tr.size());
    for (std::size_t m = 0; m < tr.size(); ++m) {
        if (std::abs(tr.f_theta[m]) < kDegenerate) throw DomainError("degenerate parameterization");
        r[m] = residual_at(tr.f[m], tr.f_theta[m], tr.f_thetatheta[m], q);
    }
    return r;
}

namespace {

// residual at base + dx, base held in extended precision
Eigen::VectorXd system_residual_ld(double l, double h0, int M, const std::vector<ld>& base, const Eigen::VectorXd& dx)
{
    std::vector<ld> h(M + 1);
    h[0] = h0;
    for (int m = 1; m < M; ++m) h[m] = base[m] + dx[m];
    h[M] = 0.0L;
    const std::vector<ld> b = detail::heights_to_betas_ld(h);
    const ld alpha = static_cast<ld>(l) - b[0];
    std::vector<cld> f, ft, ftt;
    detail::pole_series_trace(alpha, b, M, f, ft, ftt);
    Eigen::VectorXd r(M);
    const ld q = base[0] + dx[0];
    for (int m = 0; m < M; ++m) {
        if (std::abs(ft[m]) < kDegenerate) {
            r.setConstant(std::numeric_limits<double>::quiet_NaN());
            return r;
        }
        r[m] = static_cast<double>(residual_at(f[m], ft[m], ftt[m], q));
    }
    return r;
}

}  // namespace

Eigen::VectorXd direct_system_residual(double l, double h0, int M, const Eigen::VectorXd& x)
{
    return system_residual_ld(l, h0, M, std::vector<ld>(M, 0.0L), x);
}

DirectSolution solve_direct(double l, double h0, int M, const DirectSolution* init, const NlsqOptions& opts)
{
    if (!(l > 0.0)) throw ValidationError("l must be positive");
    if (!(h0 > 0.0) || h0 >= l) throw ValidationError("need 0 < h0 < l");
    if (M < 4 || !is_power_of_two(M)) throw ValidationError("M must be a power of two >= 4");

    std::vector<ld> base(M);
    if (init && init->coeffs.M == M && init->params.h0 > 0.0) {
        const ld s = static_cast<ld>(h0) / init->params.h0;
        const bool ext = static_cast<int>(init->unknowns_ext.size()) == M;
        base[0] = ext ? init->unknowns_ext[0] : init->params.q;
        for (int m = 1; m < M; ++m) base[m] = (ext ? init->unknowns_ext[m] : init->heights[m]) * s;
    } else {
        base[0] = h0 <= std::numbers::sqrt2 ? leading_q(l, h0) : 1.0;
        for (int m = 1; m < M; ++m) {
            const ld c = std::cos(std::numbers::pi_v<ld> * m / (2 * M));
            base[m] = h0 * c * c;
        }
    }

    // LM on a double offset from an extended-precision base, re-centred after each pass
    NlsqResult nr;
    int iterations = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 4; ++pass) {
        auto fn = [&](const Eigen::VectorXd& dx) { return system_residual_ld(l, h0, M, base, dx); };
        NlsqOptions o = opts;
        o.max_iterations = std::max(1, opts.max_iterations - iterations);
        nr = minimize(fn, Eigen::VectorXd::Zero(M), o);
        iterations += nr.iterations;
        for (int m = 0; m < M; ++m) base[m] += nr.x[m];
        if (nr.converged || iterations >= opts.max_iterations || !(nr.residual_inf_norm < 0.5 * best)) break;
        best = nr.residual_inf_norm;
    }

    DirectSolution sol;
    sol.params = {l, h0, static_cast<double>(base[0])};
    sol.unknowns_ext = base;
    sol.heights.assign(M + 1, 0.0);
    sol.heights[0] = h0;
    for (int m = 1; m < M; ++m) sol.heights[m] = static_cast<double>(base[m]);
    sol.coeffs.M = M;
    sol.coeffs.betas = heights_to_betas(sol.heights);
    sol.coeffs.alpha = l - sol.coeffs.betas[0];
    sol.residual.assign(nr.residual.data(), nr.residual.data() + nr.residual.size());
    sol.residual_inf_norm = nr.residual_inf_norm;
    sol.converged = nr.converged;
    sol.iterations = iterations;
    sol.status = nr.status;
    return sol;
}

std::pair<cplx, double> potential_at_preimage(const DirectSolution& sol, cplx w)
{
    const double r = std::abs(w);
    if (r == 0.0) throw DomainError("w = 0 is the charge location");
    if (r > 1.0 + 1e-14) throw ValidationError("|w| must not exceed 1");
    const cplx z = cplx(0.0, 1.0) * eval_map(sol.coeffs, w);
    return {z, sol.params.q / (2.0 * std::numbers::pi) * std::log(r)};
}

std::vector<ProfileSample> profile(const DirectSolution& sol, int n)
{
    std::vector<ProfileSample> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double th = std::numbers::pi * k / n;
        const cplx f = eval_map(sol.coeffs, std::polar(1.0, th));
        out.push_back({th, -f.imag(), f.real()});
    }
    return out;
}

}  // namespace confmatch
