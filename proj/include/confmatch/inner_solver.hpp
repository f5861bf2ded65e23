#pragma once

#include "confmatch/direct_solver.hpp"
#include "confmatch/nlsq.hpp"
#include "confmatch/spectral.hpp"

#include <string>
#include <vector>

namespace confmatch {

// Gamma = Xi^{1/eta},
// Xi(w) = A (1-w)/(1+w) + sum_{j<M} C_j w^j + C_M ((1+w)/2)^{1/eta-1}
struct InnerSolution {
    double eta = 0.6;
    double T = 0.5;
    int M_in = 0;
    double A = 0.0;
    std::vector<double> C;  // C_0..C_M
    double Q = 0.0;
    double C_asy = 0.0;
    double residual_inf_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    NlsqStatus status = NlsqStatus::stalled;
    std::string note;
};

struct InnerTrace {
    BoundaryTrace gamma;
    std::vector<cplx> xi;
};

InnerTrace xi_trace(double eta, double A, const std::vector<double>& C, int M);

// Q^2/(4 pi^2 |g_t|^2) + Im[g_tt conj g_t]/|g_t|^3
std::vector<double> inner_residual(const BoundaryTrace& tr, double Q);

NlsqOptions default_inner_options();

// Unknowns (log Q, A, C_0..C_M). Orders above 32 are reached by zero-padding lower-order solves.
InnerSolution solve_inner(double eta, double T, int M_in, const InnerSolution* init = nullptr,
                          const NlsqOptions& opts = default_inner_options());

Eigen::VectorXd inner_system_residual(double eta, double T, int M, const Eigen::VectorXd& y);
Eigen::VectorXd inner_initial_guess(double eta, double T, int M);

double asymptotic_offset(double eta, double A, double C_M);

// Gamma and its w-derivatives.
Jet inner_eval(const InnerSolution& sol, cplx w);

std::vector<ProfileSample> inner_profile(const InnerSolution& sol, int n_samples);

struct CasyPoint {
    double T = 0.0;
    double C_asy = 0.0;
    bool converged = false;
    double residual_inf_norm = 0.0;
    bool in_window = false;  // within 1% of the linear fit through the other window points
};

struct CasyScan {
    std::vector<CasyPoint> points;
    double slope = 0.0;      // fit over window points, NaN with fewer than two
    double intercept = 0.0;
};

CasyScan casy_scan(double eta, const std::vector<double>& T_grid, int M_in);

}  // namespace confmatch
