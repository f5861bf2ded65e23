#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace confmatch {

using cplx = std::complex<double>;

// Non-finite or degenerate evaluation (pole, vanishing derivative, branch cut).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A solve that must succeed did not converge.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input parameters.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// F(w) = alpha (1-w)/(1+w) + sum_j betas[j] w^j, j = 0..M
struct DiskMapCoeffs {
    double alpha = 0.0;
    std::vector<double> betas;
    int M = 0;

    void validate() const;
};

// Boundary values on theta_m = m pi / M, m = 0..M-1, with theta-derivatives.
struct BoundaryTrace {
    std::vector<double> nodes;
    std::vector<cplx> f, f_theta, f_thetatheta;

    std::size_t size() const { return nodes.size(); }
};

// value, d/dw, d2/dw2
struct Jet {
    cplx v, d1, d2;
};

bool is_power_of_two(int n);
std::vector<double> collocation_nodes(int M);

BoundaryTrace coeffs_to_trace(const DiskMapCoeffs& c);

// Term-by-term summation at arbitrary angles; slow, used as a reference.
BoundaryTrace trace_direct(const DiskMapCoeffs& c, const std::vector<double>& thetas);

// Solves sum_j beta_j cos(j theta_m) = h_m, m = 0..M, via a type-I cosine transform.
// Interface heights carry h_M = 0; the transform itself accepts any h.
std::vector<double> heights_to_betas(const std::vector<double>& h);
std::vector<double> betas_to_heights(const std::vector<double>& betas);

// max_{n=1..N/2} |a_{-n}| for samples on N uniform nodes over [0, 2pi).
double analyticity_defect(const std::vector<cplx>& samples);

// (1 + e^{i theta}) f(theta) at N uniform nodes on the full circle; the pole cancels.
std::vector<cplx> pole_free_samples(const DiskMapCoeffs& c, int N);

cplx eval_map(const DiskMapCoeffs& c, cplx w);
Jet eval_map_jet(const DiskMapCoeffs& c, cplx w);
Jet eval_series_jet(const std::vector<double>& b, cplx w);

// w-jet to theta-jet on |w| = 1: f_theta = i w F', f_thetatheta = -w F' - w^2 F''
Jet to_theta(const Jet& j, cplx w);

}  // namespace confmatch
