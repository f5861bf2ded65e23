#include "confmatch/nlsq.hpp"
#include "confmatch/spectral.hpp"
#include "confmatch/threads.hpp"

#include <algorithm>
#include <cmath>

namespace confmatch {

std::string to_string(NlsqStatus s)
{
    switch (s) {
        case NlsqStatus::converged: return "converged";
        case NlsqStatus::max_iterations: return "max_iterations";
        case NlsqStatus::stalled: return "stalled";
    }
    return "unknown";
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd jacobian_column(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                                int k, double fd_step)
{
    const double h = fd_step * std::max(1.0, std::abs(x[k]));
    Eigen::VectorXd xp = x;
    xp[k] += h;
    Eigen::VectorXd col = (fn(xp) - r) / h;
    if (all_finite(col)) return col;
    xp[k] = x[k] - h;
    col = (r - fn(xp)) / h;
    if (all_finite(col)) return col;
    return Eigen::VectorXd::Zero(r.size());
}

}  // namespace

Eigen::MatrixXd fd_jacobian_serial(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                                   double fd_step)
{
    Eigen::MatrixXd J(r.size(), x.size());
    for (int k = 0; k < x.size(); ++k) J.col(k) = jacobian_column(fn, x, r, k, fd_step);
    return J;
}

Eigen::MatrixXd fd_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                            double fd_step, int threads)
{
    if (threads <= 1) return fd_jacobian_serial(fn, x, r, fd_step);
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd J(r.size(), n);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int k = 0; k < n; ++k) J.col(k) = jacobian_column(fn, x, r, k, fd_step);
    return J;
}

NlsqResult minimize(const ResidualFn& fn, const Eigen::VectorXd& x0, const NlsqOptions& opts)
{
    if (opts.residual_tolerance <= 0 || opts.step_tolerance <= 0 || opts.fd_step <= 0)
        throw ValidationError("tolerances must be positive");
    const int threads = opts.threads > 0 ? opts.threads : thread_cap();

    NlsqResult res;
    res.x = x0;
    res.residual = fn(x0);
    if (!all_finite(res.residual)) throw DomainError("residual not finite at initial point");
    double ss = res.residual.squaredNorm();
    double lambda = opts.lambda0;
    bool gauss_newton = false;
    const int n = static_cast<int>(x0.size());
    const int m = static_cast<int>(res.residual.size());

    auto done = [&](NlsqStatus st) {
        res.residual_inf_norm = res.residual.lpNorm<Eigen::Infinity>();
        res.converged = res.residual_inf_norm <= opts.residual_tolerance;
        res.status = res.converged ? NlsqStatus::converged : st;
        return res;
    };

    while (true) {
        if (res.residual.lpNorm<Eigen::Infinity>() <= opts.residual_tolerance) return done(NlsqStatus::converged);
        if (res.iterations >= opts.max_iterations) return done(NlsqStatus::max_iterations);
        ++res.iterations;

        const Eigen::MatrixXd J = fd_jacobian(fn, res.x, res.residual, opts.fd_step, threads);
        Eigen::MatrixXd A(m + n, n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n);
        A.topRows(m) = J;
        rhs.head(m) = -res.residual;

        bool accepted = false;
        double step_norm = 0.0;
        // a Gauss-Newton trial precedes the damped ones after a step the linear model predicted exactly
        for (int tries = gauss_newton ? -1 : 0; tries < 40; ++tries) {
            const double lam = tries < 0 ? 0.0 : lambda;
            Eigen::VectorXd dx;
            if (tries < 0)
                dx = J.colPivHouseholderQr().solve(rhs.head(m));
            else {
                A.bottomRows(n) = std::sqrt(lam) * Eigen::MatrixXd::Identity(n, n);
                dx = A.colPivHouseholderQr().solve(rhs);
            }
            const Eigen::VectorXd xn = res.x + dx;
            const Eigen::VectorXd rn = fn(xn);
            if (all_finite(dx) && all_finite(rn) && rn.squaredNorm() < ss) {
                const double predicted = ss - (res.residual + J * dx).squaredNorm();
                const double rho = predicted > 0 ? (ss - rn.squaredNorm()) / predicted : 0.0;
                gauss_newton = std::abs(rho - 1.0) < 1e-3;
                res.x = xn;
                res.residual = rn;
                ss = rn.squaredNorm();
                if (tries >= 0) lambda = std::max(lambda / 10, 1e-12);
                step_norm = dx.norm();
                accepted = true;
                break;
            }
            if (tries >= 0) lambda *= 10;
        }
        if (!accepted) gauss_newton = false;
        if (!accepted) return done(NlsqStatus::stalled);
        if (step_norm <= opts.step_tolerance * (res.x.norm() + opts.step_tolerance)) {
            if (res.residual.lpNorm<Eigen::Infinity>() <= opts.residual_tolerance) return done(NlsqStatus::converged);
            return done(NlsqStatus::stalled);
        }
    }
}

}  // namespace confmatch
