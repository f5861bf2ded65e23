#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace confmatch {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NlsqOptions {
    int max_iterations = 100;
    double residual_tolerance = 1e-9;  // infinity norm
    double step_tolerance = 1e-14;
    double fd_step = 1e-7;
    double lambda0 = 1e-3;
    int threads = 0;  // Jacobian columns; 0 = thread_cap()
};

enum class NlsqStatus { converged, max_iterations, stalled };

struct NlsqResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residual;
    double residual_inf_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    NlsqStatus status = NlsqStatus::stalled;
};

std::string to_string(NlsqStatus s);

// Levenberg-Marquardt with forward-difference Jacobian. After a step whose gain ratio is within
// 1e-3 of one, the next iteration tries the undamped step first.
// Throws DomainError if the residual is not finite at x0.
NlsqResult minimize(const ResidualFn& fn, const Eigen::VectorXd& x0, const NlsqOptions& opts = {});

// Column k: (fn(x + h_k e_k) - r) / h_k with h_k = fd_step max(1, |x_k|).
// A non-finite forward column falls back to a backward difference, then to zero.
Eigen::MatrixXd fd_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                            double fd_step, int threads);
Eigen::MatrixXd fd_jacobian_serial(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                                   double fd_step);

}  // namespace confmatch
