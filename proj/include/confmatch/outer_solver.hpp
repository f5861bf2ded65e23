#pragma once

#include "confmatch/direct_solver.hpp"
#include "confmatch/nlsq.hpp"
#include "confmatch/spectral.hpp"

#include <string>
#include <vector>

namespace confmatch {

// G(w) = C_eta(alpha (1-w)/(1+w) + B(w) - s), s = h_out0 + t (eta-1)/eta
struct OuterSolution {
    double h_out0 = 0.0;
    double eta = 1.0;
    double t = 1.0;
    int M_out = 0;
    double alpha = 0.0;
    std::vector<double> betas;
    double residual_inf_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    NlsqStatus status = NlsqStatus::stalled;
    std::string note;
};

double outer_shift(double h_out0, double t);

// C(zeta) = zeta^{1/eta} (zeta+t)^{1-1/eta} + h_out0, principal branches, with two zeta-derivatives.
Jet corner_map_jet(double eta, double t, double h_out0, cplx zeta);
cplx corner_map(double eta, double t, double h_out0, cplx zeta);

// Trace on psi_m = m pi/M_out. Node 0 is the corner: value only, derivatives set to zero.
BoundaryTrace outer_trace(const OuterSolution& sol);

// -Re g + Im[g_pp conj g_p]/|g_p|^3 on nodes 1..M-1; the corner node is skipped.
std::vector<double> outer_residual(const BoundaryTrace& tr);

NlsqOptions default_outer_options();

// Fresh solves start at t = 1 and walk t to the target.
OuterSolution solve_outer(double h_out0, int M_out, double t = 1.0, const OuterSolution* init = nullptr,
                          const NlsqOptions& opts = default_outer_options());

// Unknowns (alpha, beta_0..beta_M). Rows: residual on nodes 1..M-1, alternating sum,
// corner at w = 1, and the gauge row x(pi/2) = 1. NaN when the inner argument touches the cut.
Eigen::VectorXd outer_system_residual(double h_out0, double t, int M, const Eigen::VectorXd& x);

// Coefficients from inverting the corner map along the implicit profile.
// alpha0 <= 0 picks the pole strength that puts psi = pi/2 at x = 1.
Eigen::VectorXd outer_initial_guess(double h_out0, double t, int M, double alpha0 = 0.0);

// G and its w-derivatives at |w| <= 1.
Jet outer_eval(const OuterSolution& sol, cplx w);

// alpha - 2 sum_j j beta_j
double matching_constant(const OuterSolution& sol);

std::vector<ProfileSample> outer_profile(const OuterSolution& sol, int n_samples);

}  // namespace confmatch
