#include "confmatch/outer_solver.hpp"
#include "confmatch/leading_order.hpp"
#include "fft_ld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace confmatch {

using detail::cld;
using detail::ld;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGaugeX = 1.0;

bool on_cut(cplx z, double t) { return z.imag() == 0.0 && z.real() <= 0.0 && z.real() >= -t; }

// zeta trace on psi_m with derivatives
void zeta_trace(double alpha, const double* b, int n, double s, int M, std::vector<cplx>& z, std::vector<cplx>& zt,
                std::vector<cplx>& ztt)
{
    std::vector<ld> bl(b, b + n);
    std::vector<cld> f, ft, ftt;
    detail::pole_series_trace(alpha, bl, M, f, ft, ftt);
    z.resize(M);
    zt.resize(M);
    ztt.resize(M);
    for (int m = 0; m < M; ++m) {
        z[m] = cplx(f[m]) - s;
        zt[m] = cplx(ft[m]);
        ztt[m] = cplx(ftt[m]);
    }
}

cplx newton_corner_inverse(double eta, double t, double h0, cplx g, cplx z)
{
    for (int it = 0; it < 100; ++it) {
        const Jet c = corner_map_jet(eta, t, h0, z);
        const cplx dz = (c.v - g) / c.d1;
        z -= dz;
        if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

}  // namespace

double outer_shift(double h_out0, double t)
{
    const double eta = eta_from_height(h_out0);
    return h_out0 + t * (eta - 1.0) / eta;
}

Jet corner_map_jet(double eta, double t, double h0, cplx z)
{
    if (on_cut(z, t) && z != cplx(0.0)) throw DomainError("corner map argument on the branch cut");
    const double p = 1.0 / eta;
    if (z == cplx(0.0)) return {cplx(h0), cplx(p == 1.0 ? 1.0 : 0.0), cplx(0.0)};
    const cplx lz = std::log(z);
    const cplx lzt = std::log(z + t);
    const cplx v = std::exp(p * lz + (1.0 - p) * lzt);
    const cplx d1 = std::exp((p - 1.0) * lz - p * lzt) * (z + p * t);
    const cplx d2 = d1 * ((p - 1.0) / z - p / (z + t) + 1.0 / (z + p * t));
    return {v + h0, d1, d2};
}

cplx corner_map(double eta, double t, double h0, cplx z) { return corner_map_jet(eta, t, h0, z).v; }

NlsqOptions default_outer_options()
{
    NlsqOptions o;
    o.max_iterations = 200;
    return o;
}

Eigen::VectorXd outer_system_residual(double h0, double t, int M, const Eigen::VectorXd& x)
{
    const double eta = eta_from_height(h0);
    const double s = h0 + t * (eta - 1.0) / eta;
    std::vector<cplx> z, zt, ztt;
    zeta_trace(x[0], x.data() + 1, M + 1, s, M, z, zt, ztt);
    Eigen::VectorXd r(M + 2);
    for (int m = 1; m < M; ++m) {
        if (!(z[m].imag() < 0.0)) {
            r.setConstant(kNaN);
            return r;
        }
        const Jet c = corner_map_jet(eta, t, h0, z[m]);
        const cplx g1 = c.d1 * zt[m];
        const cplx g2 = c.d2 * zt[m] * zt[m] + c.d1 * ztt[m];
        const double a = std::abs(g1);
        if (a < 1e-14) {
            r.setConstant(kNaN);
            return r;
        }
        r[m - 1] = -c.v.real() + std::imag(g2 * std::conj(g1)) / (a * a * a);
    }
    double alt = 0.0, sum = 0.0;
    for (int j = 0; j <= M; ++j) {
        alt += (j % 2 ? -1.0 : 1.0) * x[1 + j];
        sum += x[1 + j];
    }
    r[M - 1] = alt;
    r[M] = sum - s;
    // gauge: the midpoint psi = pi/2 lands at the capillary length x = 1
    const std::vector<double> b(x.data() + 1, x.data() + M + 2);
    const cplx zi = cplx(0.0, -x[0]) + eval_series_jet(b, cplx(0.0, 1.0)).v - s;
    if (!(zi.imag() < 0.0)) {
        r.setConstant(kNaN);
        return r;
    }
    r[M + 1] = -corner_map(eta, t, h0, zi).imag() - kGaugeX;
    return r;
}

Eigen::VectorXd outer_initial_guess(double h0, double t, int M, double alpha0)
{
    const double eta = eta_from_height(h0);
    const double p = 1.0 / eta;
    const double s = outer_shift(h0, t);

    // preimage of the implicit profile under the corner map, followed from the tip outward
    std::vector<double> X;
    for (int k = 0; k < 400; ++k) X.push_back(1e-8 * std::pow(1e8, k / 399.0));
    for (int k = 1; k < 2000; ++k) X.push_back(1.0 + 199.0 * k / 1999.0);
    std::vector<double> ys, xs;
    cplx z;
    for (std::size_t k = 0; k < X.size(); ++k) {
        const double x = X[k];
        const cplx g(x < 60.0 ? outer_height_implicit(h0, x) : 0.0, -x);
        if (k == 0) z = std::exp(std::log((g - h0) / std::pow(t, 1.0 - p)) / p);
        z = newton_corner_inverse(eta, t, h0, g, z);
        ys.push_back(-z.imag());
        xs.push_back(z.real());
    }

    if (alpha0 <= 0.0) {
        const auto it = std::lower_bound(X.begin(), X.end(), kGaugeX);
        alpha0 = ys[it - X.begin()];
    }
    std::vector<double> rho(M + 1, 0.0);
    rho[0] = s;
    for (int m = 1; m < M; ++m) {
        const double y = alpha0 * std::tan(std::numbers::pi * m / (2.0 * M));
        double v;
        if (y <= ys.front())
            v = xs.front();
        else if (y >= ys.back())
            v = xs.back();
        else {
            const auto it = std::upper_bound(ys.begin(), ys.end(), y);
            const std::size_t i = it - ys.begin();
            const double w = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
            v = xs[i - 1] + w * (xs[i] - xs[i - 1]);
        }
        rho[m] = v + s;
    }
    const std::vector<double> b = heights_to_betas(rho);
    Eigen::VectorXd x(M + 2);
    x[0] = alpha0;
    for (int j = 0; j <= M; ++j) x[1 + j] = b[j];
    return x;
}

namespace {

OuterSolution pack(double h0, double t, int M, const NlsqResult& nr)
{
    OuterSolution sol;
    sol.h_out0 = h0;
    sol.eta = eta_from_height(h0);
    sol.t = t;
    sol.M_out = M;
    sol.alpha = nr.x[0];
    sol.betas.assign(nr.x.data() + 1, nr.x.data() + M + 2);
    sol.residual_inf_norm = nr.residual_inf_norm;
    sol.converged = nr.converged;
    sol.iterations = nr.iterations;
    sol.status = nr.status;
    return sol;
}

Eigen::VectorXd to_unknowns(const OuterSolution& s)
{
    Eigen::VectorXd x(s.M_out + 2);
    x[0] = s.alpha;
    for (int j = 0; j <= s.M_out; ++j) x[1 + j] = s.betas[j];
    return x;
}

NlsqResult run(double h0, double t, int M, const Eigen::VectorXd& x0, const NlsqOptions& opts)
{
    auto fn = [&](const Eigen::VectorXd& x) { return outer_system_residual(h0, t, M, x); };
    return minimize(fn, x0, opts);
}

}  // namespace

OuterSolution solve_outer(double h0, int M, double t, const OuterSolution* init, const NlsqOptions& opts)
{
    if (!(h0 > 0.0) || h0 >= std::numbers::sqrt2) throw ValidationError("h_out0 must lie in (0, sqrt(2))");
    if (M < 4 || !is_power_of_two(M)) throw ValidationError("M_out must be a power of two >= 4");
    if (!(t > 0.0)) throw ValidationError("t must be positive");

    if (init && init->M_out == M) {
        Eigen::VectorXd x0 = to_unknowns(*init);
        // keep the corner at w = 1
        x0[1] += outer_shift(h0, t) - outer_shift(init->h_out0, init->t);
        try {
            OuterSolution sol = pack(h0, t, M, run(h0, t, M, x0, opts));
            if (sol.converged) return sol;
        } catch (const DomainError&) {
        }
    }

    // walk t from 1 to the target
    std::vector<double> ts{1.0};
    const int steps = static_cast<int>(std::ceil(std::abs(t - 1.0) / 0.1 - 1e-12));
    for (int k = 1; k <= steps; ++k) ts.push_back(k == steps ? t : 1.0 + (t - 1.0) * k / steps);

    Eigen::VectorXd x = outer_initial_guess(h0, 1.0, M);
    NlsqResult nr;
    double tp = 1.0;
    for (double tk : ts) {
        x[1] += outer_shift(h0, tk) - outer_shift(h0, tp);
        tp = tk;
        try {
            nr = run(h0, tk, M, x, opts);
        } catch (const DomainError& e) {
            OuterSolution sol;
            sol.h_out0 = h0;
            sol.eta = eta_from_height(h0);
            sol.t = t;
            sol.M_out = M;
            sol.alpha = x[0];
            sol.betas.assign(x.data() + 1, x.data() + M + 2);
            sol.residual_inf_norm = std::numeric_limits<double>::infinity();
            sol.note = std::string("domain error at t = ") + std::to_string(tk) + ": " + e.what();
            return sol;
        }
        x = nr.x;
        if (!nr.converged) {
            OuterSolution sol = pack(h0, t, M, nr);
            sol.note = "no convergence at t = " + std::to_string(tk);
            return sol;
        }
    }
    return pack(h0, t, M, nr);
}

BoundaryTrace outer_trace(const OuterSolution& sol)
{
    const int M = sol.M_out;
    const double s = outer_shift(sol.h_out0, sol.t);
    std::vector<cplx> z, zt, ztt;
    zeta_trace(sol.alpha, sol.betas.data(), M + 1, s, M, z, zt, ztt);
    BoundaryTrace tr;
    tr.nodes = collocation_nodes(M);
    tr.f.resize(M);
    tr.f_theta.resize(M);
    tr.f_thetatheta.resize(M);
    tr.f[0] = cplx(sol.h_out0);
    for (int m = 1; m < M; ++m) {
        const Jet c = corner_map_jet(sol.eta, sol.t, sol.h_out0, z[m]);
        tr.f[m] = c.v;
        tr.f_theta[m] = c.d1 * zt[m];
        tr.f_thetatheta[m] = c.d2 * zt[m] * zt[m] + c.d1 * ztt[m];
    }
    return tr;
}

std::vector<double> outer_residual(const BoundaryTrace& tr)
{
    std::vector<double> r;
    for (std::size_t m = 1; m < tr.size(); ++m) {
        const double a = std::abs(tr.f_theta[m]);
        if (a < 1e-14) throw DomainError("degenerate parameterization");
        r.push_back(-tr.f[m].real() + std::imag(tr.f_thetatheta[m] * std::conj(tr.f_theta[m])) / (a * a * a));
    }
    return r;
}

Jet outer_eval(const OuterSolution& sol, cplx w)
{
    DiskMapCoeffs c{sol.alpha, sol.betas, sol.M_out};
    Jet zj = eval_map_jet(c, w);
    zj.v -= outer_shift(sol.h_out0, sol.t);
    if (w == cplx(1.0)) zj.v = 0.0;
    const Jet cj = corner_map_jet(sol.eta, sol.t, sol.h_out0, zj.v);
    return {cj.v, cj.d1 * zj.d1, cj.d2 * zj.d1 * zj.d1 + cj.d1 * zj.d2};
}

double matching_constant(const OuterSolution& sol)
{
    double s = 0.0;
    for (std::size_t j = 0; j < sol.betas.size(); ++j) s += static_cast<double>(j) * sol.betas[j];
    return sol.alpha - 2.0 * s;
}

std::vector<ProfileSample> outer_profile(const OuterSolution& sol, int n)
{
    std::vector<ProfileSample> out;
    for (int k = 0; k < n; ++k) {
        const double th = std::numbers::pi * k / n;
        const cplx g = outer_eval(sol, std::polar(1.0, th)).v;
        out.push_back({th, -g.imag(), g.real()});
    }
    return out;
}

}  // namespace confmatch
