#pragma once

#include <complex>
#include <vector>

namespace confmatch::detail {

using ld = long double;
using cld = std::complex<long double>;

// out[m] = sum_j c[j] exp(i j m pi / M), m = 0..M-1, for c of length <= 2M.
void half_circle_series(const ld* c, int n, int M, cld* out);

// FFTW REDFT00: y_k = x_0 + (-1)^k x_{n-1} + 2 sum_{j=1}^{n-2} x_j cos(pi j k/(n-1))
std::vector<ld> dct1(const std::vector<ld>& x);

// Unnormalized forward DFT of length N.
std::vector<cld> dft_forward(const std::vector<cld>& x);

std::vector<ld> heights_to_betas_ld(const std::vector<ld>& h);

// f, f_theta, f_thetatheta on theta_m = m pi/M of -i alpha tan(theta/2) + sum_j b_j e^{ij theta}
void pole_series_trace(ld alpha, const std::vector<ld>& b, int M,
                       std::vector<cld>& f, std::vector<cld>& ft, std::vector<cld>& ftt);

}  // namespace confmatch::detail
