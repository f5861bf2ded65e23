#include "confmatch/direct_solver.hpp"
#include "confmatch/nlsq.hpp"
#include "confmatch/spectral.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace confmatch;

namespace {

struct DirectSystem {
    int M;
    Eigen::VectorXd x, r;
    ResidualFn fn;

    explicit DirectSystem(int M_) : M(M_)
    {
        const DirectSolution s = solve_direct(1.0, 0.3, M);
        x.resize(M);
        x[0] = s.params.q;
        for (int m = 1; m < M; ++m) x[m] = s.heights[m];
        fn = [M = M](const Eigen::VectorXd& y) { return direct_system_residual(1.0, 0.3, M, y); };
        r = fn(x);
    }
};

const DirectSystem& system(int M)
{
    static const DirectSystem s64(64), s128(128), s256(256);
    return M == 64 ? s64 : M == 128 ? s128 : s256;
}

DiskMapCoeffs sample_coeffs(int M)
{
    DiskMapCoeffs c{0.8, std::vector<double>(M + 1, 0.0), M};
    for (int j = 0; j <= M; ++j) c.betas[j] = std::pow(-0.7, j) / (1.0 + j);
    double alt = 0.0;
    for (int j = 0; j <= M; ++j) alt += (j % 2 ? -1.0 : 1.0) * c.betas[j];
    c.betas[0] -= alt;
    return c;
}

}  // namespace

static void BM_JacobianSerial(benchmark::State& st)
{
    const DirectSystem& s = system(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(fd_jacobian_serial(s.fn, s.x, s.r, 1e-9));
}
BENCHMARK(BM_JacobianSerial)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_JacobianParallel(benchmark::State& st)
{
    const DirectSystem& s = system(static_cast<int>(st.range(0)));
    const int threads = static_cast<int>(st.range(1));
    for (auto _ : st) benchmark::DoNotOptimize(fd_jacobian(s.fn, s.x, s.r, 1e-9, threads));
}
BENCHMARK(BM_JacobianParallel)
    ->ArgsProduct({{64, 128, 256}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond);

static void BM_TraceFFT(benchmark::State& st)
{
    const DiskMapCoeffs c = sample_coeffs(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(coeffs_to_trace(c));
}
BENCHMARK(BM_TraceFFT)->RangeMultiplier(2)->Range(64, 1024);

static void BM_TraceDirectSum(benchmark::State& st)
{
    const DiskMapCoeffs c = sample_coeffs(static_cast<int>(st.range(0)));
    const std::vector<double> nodes = collocation_nodes(c.M);
    for (auto _ : st) benchmark::DoNotOptimize(trace_direct(c, nodes));
}
BENCHMARK(BM_TraceDirectSum)->RangeMultiplier(2)->Range(64, 1024);

BENCHMARK_MAIN();
