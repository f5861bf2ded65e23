#include "confmatch/spectral.hpp"
#include "fft_ld.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace confmatch {
namespace detail {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct C2CPlan {
    int n;
    int sign;
    fftwl_complex* in;
    fftwl_complex* out;
    fftwl_plan plan;

    C2CPlan(int n_, int sign_) : n(n_), sign(sign_)
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        in = fftwl_alloc_complex(n);
        out = fftwl_alloc_complex(n);
        plan = fftwl_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE);
    }
    ~C2CPlan()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftwl_destroy_plan(plan);
        fftwl_free(in);
        fftwl_free(out);
    }
};

struct R2RPlan {
    int n;
    long double* in;
    long double* out;
    fftwl_plan plan;

    explicit R2RPlan(int n_) : n(n_)
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        in = fftwl_alloc_real(n);
        out = fftwl_alloc_real(n);
        plan = fftwl_plan_r2r_1d(n, in, out, FFTW_REDFT00, FFTW_ESTIMATE);
    }
    ~R2RPlan()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftwl_destroy_plan(plan);
        fftwl_free(in);
        fftwl_free(out);
    }
};

C2CPlan& c2c(int n, int sign)
{
    thread_local std::map<std::pair<int, int>, std::unique_ptr<C2CPlan>> cache;
    auto& p = cache[{n, sign}];
    if (!p) p = std::make_unique<C2CPlan>(n, sign);
    return *p;
}

R2RPlan& r2r(int n)
{
    thread_local std::map<int, std::unique_ptr<R2RPlan>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<R2RPlan>(n);
    return *p;
}

}  // namespace

void half_circle_series(const ld* c, int n, int M, cld* out)
{
    const int N = 2 * M;
    auto& p = c2c(N, FFTW_BACKWARD);
    for (int k = 0; k < N; ++k) {
        p.in[k][0] = k < n ? c[k] : 0.0L;
        p.in[k][1] = 0.0L;
    }
    fftwl_execute(p.plan);
    for (int m = 0; m < M; ++m) out[m] = cld(p.out[m][0], p.out[m][1]);
}

std::vector<ld> dct1(const std::vector<ld>& x)
{
    const int n = static_cast<int>(x.size());
    auto& p = r2r(n);
    std::copy(x.begin(), x.end(), p.in);
    fftwl_execute(p.plan);
    return std::vector<ld>(p.out, p.out + n);
}

std::vector<cld> dft_forward(const std::vector<cld>& x)
{
    const int n = static_cast<int>(x.size());
    auto& p = c2c(n, FFTW_FORWARD);
    for (int k = 0; k < n; ++k) {
        p.in[k][0] = x[k].real();
        p.in[k][1] = x[k].imag();
    }
    fftwl_execute(p.plan);
    std::vector<cld> y(n);
    for (int k = 0; k < n; ++k) y[k] = cld(p.out[k][0], p.out[k][1]);
    return y;
}

std::vector<ld> heights_to_betas_ld(const std::vector<ld>& h)
{
    const int M = static_cast<int>(h.size()) - 1;
    std::vector<ld> b = dct1(h);
    for (auto& v : b) v /= M;
    b[0] *= 0.5L;
    b[M] *= 0.5L;
    return b;
}

void pole_series_trace(ld alpha, const std::vector<ld>& b, int M,
                       std::vector<cld>& f, std::vector<cld>& ft, std::vector<cld>& ftt)
{
    const int n = static_cast<int>(b.size());
    std::vector<ld> w1(n), w2(n);
    f.resize(M);
    ft.resize(M);
    ftt.resize(M);
    half_circle_series(b.data(), n, M, f.data());
    for (int j = 0; j < n; ++j) {
        w1[j] = j * b[j];
        w2[j] = -static_cast<ld>(j) * j * b[j];
    }
    half_circle_series(w1.data(), n, M, ft.data());
    half_circle_series(w2.data(), n, M, ftt.data());
    const cld I(0.0L, 1.0L);
    for (int m = 0; m < M; ++m) {
        ft[m] *= I;
        const ld th = std::numbers::pi_v<ld> * m / M;
        const ld t = std::tan(th / 2);
        const ld c = std::cos(th / 2);
        const ld s2 = 1.0L / (c * c);
        f[m] += -I * alpha * t;
        ft[m] += -I * (alpha / 2) * s2;
        ftt[m] += -I * (alpha / 2) * s2 * t;
    }
}

}  // namespace detail

using detail::cld;
using detail::ld;

void DiskMapCoeffs::validate() const
{
    if (M < 4 || !is_power_of_two(M)) throw ValidationError("M must be a power of two >= 4");
    if (static_cast<int>(betas.size()) != M + 1) throw ValidationError("betas must have length M+1");
    if (!std::isfinite(alpha)) throw ValidationError("alpha not finite");
    for (double b : betas)
        if (!std::isfinite(b)) throw ValidationError("beta not finite");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> collocation_nodes(int M)
{
    std::vector<double> th(M);
    for (int m = 0; m < M; ++m) th[m] = std::numbers::pi * m / M;
    return th;
}

BoundaryTrace coeffs_to_trace(const DiskMapCoeffs& c)
{
    c.validate();
    std::vector<ld> b(c.betas.begin(), c.betas.end());
    std::vector<cld> f, ft, ftt;
    detail::pole_series_trace(c.alpha, b, c.M, f, ft, ftt);
    BoundaryTrace tr;
    tr.nodes = collocation_nodes(c.M);
    tr.f.resize(c.M);
    tr.f_theta.resize(c.M);
    tr.f_thetatheta.resize(c.M);
    for (int m = 0; m < c.M; ++m) {
        tr.f[m] = cplx(f[m]);
        tr.f_theta[m] = cplx(ft[m]);
        tr.f_thetatheta[m] = cplx(ftt[m]);
    }
    return tr;
}

BoundaryTrace trace_direct(const DiskMapCoeffs& c, const std::vector<double>& thetas)
{
    BoundaryTrace tr;
    tr.nodes = thetas;
    const cld I(0.0L, 1.0L);
    for (double th : thetas) {
        const ld half = static_cast<ld>(th) / 2;
        if (std::abs(std::cos(half)) < 1e-15L) throw DomainError("theta = pi is the pole");
        const ld t = std::tan(half);
        const ld s2 = 1.0L / (std::cos(half) * std::cos(half));
        cld f = -I * static_cast<ld>(c.alpha) * t;
        cld ft = -I * static_cast<ld>(c.alpha) / 2.0L * s2;
        cld ftt = -I * static_cast<ld>(c.alpha) / 2.0L * s2 * t;
        for (std::size_t j = 0; j < c.betas.size(); ++j) {
            const cld e = std::polar(1.0L, static_cast<ld>(j) * th);
            const ld bj = c.betas[j];
            f += bj * e;
            ft += I * static_cast<ld>(j) * bj * e;
            ftt -= static_cast<ld>(j * j) * bj * e;
        }
        tr.f.push_back(cplx(f));
        tr.f_theta.push_back(cplx(ft));
        tr.f_thetatheta.push_back(cplx(ftt));
    }
    return tr;
}

std::vector<double> heights_to_betas(const std::vector<double>& h)
{
    const int M = static_cast<int>(h.size()) - 1;
    if (M < 1) throw ValidationError("need at least two heights");
    std::vector<ld> b = detail::heights_to_betas_ld(std::vector<ld>(h.begin(), h.end()));
    return std::vector<double>(b.begin(), b.end());
}

std::vector<double> betas_to_heights(const std::vector<double>& betas)
{
    const int M = static_cast<int>(betas.size()) - 1;
    if (M < 1) throw ValidationError("need at least two coefficients");
    std::vector<ld> x(betas.begin(), betas.end());
    for (int j = 1; j < M; ++j) x[j] *= 0.5L;
    std::vector<ld> y = detail::dct1(x);
    return std::vector<double>(y.begin(), y.end());
}

double analyticity_defect(const std::vector<cplx>& samples)
{
    const int N = static_cast<int>(samples.size());
    if (N < 2 || N % 2) throw ValidationError("need an even number of samples");
    std::vector<cld> x(samples.begin(), samples.end());
    std::vector<cld> a = detail::dft_forward(x);
    long double d = 0;
    for (int n = 1; n <= N / 2; ++n) d = std::max(d, std::abs(a[N - n]) / N);
    return static_cast<double>(d);
}

std::vector<cplx> pole_free_samples(const DiskMapCoeffs& c, int N)
{
    std::vector<cplx> out(N);
    for (int k = 0; k < N; ++k) {
        const cplx w = std::polar(1.0, 2.0 * std::numbers::pi * k / N);
        cplx s = 0.0;
        for (auto it = c.betas.rbegin(); it != c.betas.rend(); ++it) s = s * w + *it;
        out[k] = c.alpha * (1.0 - w) + (1.0 + w) * s;
    }
    return out;
}

Jet eval_series_jet(const std::vector<double>& b, cplx w)
{
    cplx p = 0.0, d1 = 0.0, d2 = 0.0;
    for (auto it = b.rbegin(); it != b.rend(); ++it) {
        d2 = d2 * w + 2.0 * d1;
        d1 = d1 * w + p;
        p = p * w + *it;
    }
    return {p, d1, d2};
}

cplx eval_map(const DiskMapCoeffs& c, cplx w)
{
    if (w == cplx(-1.0, 0.0)) throw DomainError("w = -1 is the pole");
    cplx s = 0.0;
    for (auto it = c.betas.rbegin(); it != c.betas.rend(); ++it) s = s * w + *it;
    return c.alpha * (1.0 - w) / (1.0 + w) + s;
}

Jet eval_map_jet(const DiskMapCoeffs& c, cplx w)
{
    if (w == cplx(-1.0, 0.0)) throw DomainError("w = -1 is the pole");
    Jet j = eval_series_jet(c.betas, w);
    const cplx u = 1.0 + w;
    j.v += c.alpha * (1.0 - w) / u;
    j.d1 += -2.0 * c.alpha / (u * u);
    j.d2 += 4.0 * c.alpha / (u * u * u);
    return j;
}

Jet to_theta(const Jet& j, cplx w)
{
    const cplx I(0.0, 1.0);
    return {j.v, I * w * j.d1, -w * j.d1 - w * w * j.d2};
}

}  // namespace confmatch
