#include "confmatch/inner_solver.hpp"
#include "confmatch/leading_order.hpp"
#include "confmatch/threads.hpp"
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

// Xi and its theta-derivatives on theta_m = m pi/M
void xi_trace_ld(ld eta, ld A, const ld* C, int M, std::vector<cld>& X, std::vector<cld>& Xt, std::vector<cld>& Xtt)
{
    std::vector<ld> c(C, C + M);
    detail::pole_series_trace(A, c, M, X, Xt, Xtt);
    const ld s = 1.0L / eta - 1.0L;
    const ld CM = C[M];
    const cld I(0.0L, 1.0L);
    for (int m = 0; m < M; ++m) {
        const ld th = std::numbers::pi_v<ld> * m / M;
        const ld ch = std::cos(th / 2), tn = std::tan(th / 2);
        // ((1+w)/2)^s = cos(th/2)^s e^{i s th/2}
        const cld P = std::pow(ch, s) * std::polar(1.0L, s * th / 2);
        const cld k = (s / 2) * (I - tn);
        const cld P1 = k * P;
        const cld P2 = k * P1 - (s / 4) / (ch * ch) * P;
        X[m] += CM * P;
        Xt[m] += CM * P1;
        Xtt[m] += CM * P2;
    }
}

template <class R, class C>
R inner_res(const C& gt, const C& gtt, R Q)
{
    const R a = std::abs(gt);
    const R pi = std::numbers::pi_v<R>;
    return Q * Q / (4 * pi * pi * a * a) + std::imag(gtt * std::conj(gt)) / (a * a * a);
}

}  // namespace

double asymptotic_offset(double eta, double A, double C_M)
{
    const double p = 1.0 / eta;
    return p * C_M * std::pow(A, p - 1.0);
}

InnerTrace xi_trace(double eta, double A, const std::vector<double>& C, int M)
{
    if (static_cast<int>(C.size()) != M + 1) throw ValidationError("C must have length M+1");
    std::vector<ld> Cl(C.begin(), C.end());
    std::vector<cld> X, Xt, Xtt;
    xi_trace_ld(eta, A, Cl.data(), M, X, Xt, Xtt);
    const ld p = 1.0L / eta;
    InnerTrace out;
    out.gamma.nodes = collocation_nodes(M);
    for (int m = 0; m < M; ++m) {
        if (m > 0 && !(X[m].imag() < 0.0L)) throw DomainError("Xi trace leaves the lower half-plane");
        const cld G = std::pow(X[m], p);
        const cld G1 = p * std::pow(X[m], p - 1);
        const cld G2 = p * (p - 1) * std::pow(X[m], p - 2);
        out.xi.push_back(cplx(X[m]));
        out.gamma.f.push_back(cplx(G));
        out.gamma.f_theta.push_back(cplx(G1 * Xt[m]));
        out.gamma.f_thetatheta.push_back(cplx(G2 * Xt[m] * Xt[m] + G1 * Xtt[m]));
    }
    return out;
}

std::vector<double> inner_residual(const BoundaryTrace& tr, double Q)
{
    std::vector<double> r(tr.size());
    for (std::size_t m = 0; m < tr.size(); ++m) {
        if (std::abs(tr.f_theta[m]) < 1e-14) throw DomainError("degenerate parameterization");
        r[m] = inner_res(tr.f_theta[m], tr.f_thetatheta[m], Q);
    }
    return r;
}

NlsqOptions default_inner_options()
{
    NlsqOptions o;
    o.max_iterations = 300;
    o.fd_step = 1e-9;
    return o;
}

Eigen::VectorXd inner_system_residual(double eta, double T, int M, const Eigen::VectorXd& y)
{
    const ld p = 1.0L / eta;
    const ld Q = std::exp(static_cast<ld>(y[0]));
    const ld A = y[1];
    std::vector<ld> C(y.data() + 2, y.data() + M + 3);
    std::vector<cld> X, Xt, Xtt;
    xi_trace_ld(eta, A, C.data(), M, X, Xt, Xtt);
    Eigen::VectorXd r(M + 3);
    for (int m = 0; m < M; ++m) {
        if ((m > 0 && !(X[m].imag() < 0.0L)) || (m == 0 && !(X[0].real() > 0.0L))) {
            r.setConstant(kNaN);
            return r;
        }
        const cld G1 = p * std::pow(X[m], p - 1);
        const cld G2 = p * (p - 1) * std::pow(X[m], p - 2);
        const cld gt = G1 * Xt[m];
        const cld gtt = G2 * Xt[m] * Xt[m] + G1 * Xtt[m];
        if (std::abs(gt) < 1e-14L) {
            r.setConstant(kNaN);
            return r;
        }
        r[m] = static_cast<double>(inner_res(gt, gtt, Q));
    }
    ld alt = 0, sum = 0;
    for (int n = 0; n < M; ++n) {
        alt += (n % 2 ? -C[n] : C[n]);
        sum += C[n];
    }
    const ld etal = eta;
    r[M] = static_cast<double>(alt);
    r[M + 1] = static_cast<double>(A + C[0] + C[M] / std::pow(2.0L, p - 1) - std::pow(1.0L + T, etal));
    r[M + 2] = static_cast<double>(sum + C[M] - std::pow(static_cast<ld>(T), etal));
    return r;
}

Eigen::VectorXd inner_initial_guess(double eta, double T, int M)
{
    const double p = 1.0 / eta;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(M + 3);
    const double CM = std::pow(T, eta);
    y[0] = 0.5 * std::log(2.0 * std::numbers::pi * tip_force_from_eta(eta));
    y[1] = std::pow(1.0 + T, eta) - CM * std::pow(2.0, 1.0 - p);
    y[M + 2] = CM;
    return y;
}

namespace {

InnerSolution pack(double eta, double T, int M, const NlsqResult& nr)
{
    InnerSolution sol;
    sol.eta = eta;
    sol.T = T;
    sol.M_in = M;
    sol.Q = std::exp(nr.x[0]);
    sol.A = nr.x[1];
    sol.C.assign(nr.x.data() + 2, nr.x.data() + M + 3);
    sol.C_asy = asymptotic_offset(eta, sol.A, sol.C[M]);
    sol.residual_inf_norm = nr.residual_inf_norm;
    sol.converged = nr.converged;
    sol.iterations = nr.iterations;
    sol.status = nr.status;
    return sol;
}

Eigen::VectorXd padded(const InnerSolution& s, int M)
{
    Eigen::VectorXd y = Eigen::VectorXd::Zero(M + 3);
    y[0] = std::log(s.Q);
    y[1] = s.A;
    for (int j = 0; j < std::min(s.M_in, M); ++j) y[2 + j] = s.C[j];
    y[M + 2] = s.C[s.M_in];
    return y;
}

}  // namespace

InnerSolution solve_inner(double eta, double T, int M, const InnerSolution* init, const NlsqOptions& opts)
{
    if (!(eta > 0.5) || !(eta < 1.0)) throw ValidationError("eta must lie in (1/2, 1)");
    if (!(T > 0.0)) throw ValidationError("T must be positive");
    if (M < 4 || !is_power_of_two(M)) throw ValidationError("M_in must be a power of two >= 4");

    Eigen::VectorXd y0;
    if (init && !init->C.empty())
        y0 = padded(*init, M);
    else if (M > 32) {
        const InnerSolution lower = solve_inner(eta, T, M / 2, nullptr, opts);
        y0 = padded(lower, M);
    } else
        y0 = inner_initial_guess(eta, T, M);

    auto fn = [&](const Eigen::VectorXd& y) { return inner_system_residual(eta, T, M, y); };
    return pack(eta, T, M, minimize(fn, y0, opts));
}

Jet inner_eval(const InnerSolution& sol, cplx w)
{
    if (w == cplx(-1.0)) throw DomainError("w = -1 is the pole");
    const int M = sol.M_in;
    const double p = 1.0 / sol.eta;
    const double s = p - 1.0;
    std::vector<double> c(sol.C.begin(), sol.C.begin() + M);
    Jet x = eval_series_jet(c, w);
    const cplx u = 1.0 + w;
    x.v += sol.A * (1.0 - w) / u;
    x.d1 += -2.0 * sol.A / (u * u);
    x.d2 += 4.0 * sol.A / (u * u * u);
    const cplx b = u / 2.0;
    const double CM = sol.C[M];
    x.v += CM * std::pow(b, s);
    x.d1 += CM * (s / 2.0) * std::pow(b, s - 1.0);
    x.d2 += CM * (s * (s - 1.0) / 4.0) * std::pow(b, s - 2.0);
    const cplx G = std::pow(x.v, p);
    const cplx G1 = p * std::pow(x.v, p - 1.0);
    const cplx G2 = p * (p - 1.0) * std::pow(x.v, p - 2.0);
    return {G, G1 * x.d1, G2 * x.d1 * x.d1 + G1 * x.d2};
}

std::vector<ProfileSample> inner_profile(const InnerSolution& sol, int n)
{
    std::vector<ProfileSample> out;
    for (int k = 0; k < n; ++k) {
        const double th = std::numbers::pi * k / n;
        const cplx g = inner_eval(sol, std::polar(1.0, th)).v;
        out.push_back({th, -g.imag(), g.real()});
    }
    return out;
}

CasyScan casy_scan(double eta, const std::vector<double>& grid, int M)
{
    CasyScan scan;
    scan.points.resize(grid.size());
    const int nt = thread_cap();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(dynamic)
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CasyPoint& pt = scan.points[k];
        pt.T = grid[k];
        try {
            NlsqOptions o = default_inner_options();
            o.threads = 1;
            const InnerSolution s = solve_inner(eta, grid[k], M, nullptr, o);
            pt.C_asy = s.C_asy;
            pt.converged = s.converged;
            pt.residual_inf_norm = s.residual_inf_norm;
        } catch (const DomainError&) {
            pt.C_asy = kNaN;
            pt.residual_inf_norm = kNaN;
        }
    }

    std::vector<std::size_t> win;
    for (std::size_t k = 0; k < scan.points.size(); ++k)
        if (scan.points[k].converged) win.push_back(k);
    scan.slope = kNaN;
    scan.intercept = kNaN;
    auto fit = [&] {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(win.size());
        for (auto k : win) {
            const double x = scan.points[k].T, y = scan.points[k].C_asy;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        scan.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        scan.intercept = (sy - scan.slope * sx) / n;
    };
    while (win.size() >= 2) {
        fit();
        if (win.size() < 3) break;
        std::size_t worst = 0;
        double wd = 0.0;
        for (std::size_t i = 0; i < win.size(); ++i) {
            const auto& pt = scan.points[win[i]];
            const double d = std::abs(pt.C_asy - (scan.slope * pt.T + scan.intercept)) / std::abs(pt.C_asy);
            if (d > wd) {
                wd = d;
                worst = i;
            }
        }
        if (wd <= 0.01) break;
        win.erase(win.begin() + static_cast<long>(worst));
    }
    for (auto k : win) scan.points[k].in_window = true;
    return scan;
}

}  // namespace confmatch
