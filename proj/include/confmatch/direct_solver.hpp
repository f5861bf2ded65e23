#pragma once

#include "confmatch/nlsq.hpp"
#include "confmatch/spectral.hpp"

#include <string>
#include <utility>
#include <vector>

namespace confmatch {

struct ProblemParams {
    double l = 1.0;
    double h0 = 0.0;
    double q = 0.0;
};

struct DirectSolution {
    ProblemParams params;
    DiskMapCoeffs coeffs;
    std::vector<double> heights;   // h_0..h_M
    std::vector<double> residual;  // at theta_m, m = 0..M-1
    std::vector<long double> unknowns_ext;  // (q, h_1..h_{M-1}) as solved
    double residual_inf_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    NlsqStatus status = NlsqStatus::stalled;
};

struct ProfileSample {
    double theta = 0.0;
    double x = 0.0;
    double h = 0.0;
};

NlsqOptions default_direct_options();

// q^2/(4 pi^2 |f_t|^2) - Re f + Im[f_tt conj f_t]/|f_t|^3
std::vector<double> residual_full(const BoundaryTrace& tr, double q);

// Unknowns (q, h_1..h_{M-1}). An init at a different h0 is rescaled by the height ratio.
DirectSolution solve_direct(double l, double h0, int M, const DirectSolution* init = nullptr,
                            const NlsqOptions& opts = default_direct_options());

// Residual of the collocation system for a given unknown vector; NaN on a degenerate trace.
Eigen::VectorXd direct_system_residual(double l, double h0, int M, const Eigen::VectorXd& x);

// z = i F(w), phi = (q / 2 pi) log|w|
std::pair<cplx, double> potential_at_preimage(const DirectSolution& sol, cplx w);

// Samples at theta_k = k pi / n_samples.
std::vector<ProfileSample> profile(const DirectSolution& sol, int n_samples);

}  // namespace confmatch
