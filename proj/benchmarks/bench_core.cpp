#include <benchmark/benchmark.h>

#include "plilab/flow.hpp"
#include "plilab/highgain.hpp"
#include "plilab/linalg.hpp"
#include "plilab/lqr.hpp"
#include "plilab/rng.hpp"
#include "plilab/scalar_lqr.hpp"

using namespace plilab;

namespace {

Mat random_hurwitz(std::uint64_t seed, int n) {
  Rng rng(seed);
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.uniform(-1.0, 1.0);
  const double a = linalg::spectral_abscissa(G).abscissa;
  return G - (a + 1.0) * Mat::Identity(n, n);
}

Mat random_spd(std::uint64_t seed, int n) {
  Rng rng(seed);
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  return M.transpose() * M + Mat::Identity(n, n);
}

void BM_lyapunov_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mat F = random_hurwitz(2, n);
  const Mat Q = random_spd(3, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(linalg::solve_lyapunov_ct(F, Q));
  }
}
BENCHMARK(BM_lyapunov_solve)->Arg(2)->Arg(4)->Arg(8);

void BM_spectral_abscissa(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mat M = random_hurwitz(5, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(linalg::spectral_abscissa(M));
  }
}
BENCHMARK(BM_spectral_abscissa)->Arg(4)->Arg(8);

void BM_lqr_gradient(benchmark::State& state) {
  Mat A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  const lqr::LqrProblem prob(A, B, Mat::Identity(2, 2), Mat::Identity(1, 1));
  const lqr::Gain K = highgain::stabilize(prob);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lqr::gradient(prob, K));
  }
}
BENCHMARK(BM_lqr_gradient);

void BM_ackermann(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(11);
  Mat A(n, n), b(n, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i) b(i, 0) = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(highgain::ackermann_gain(A, b, 2.0));
  }
}
BENCHMARK(BM_ackermann)->Arg(2);

void BM_scalar_flow_1s(benchmark::State& state) {
  Mat A(1, 1), B(1, 1), W(1, 1);
  A << 1;
  B << 1;
  W << 1;
  const lqr::LqrProblem prob(A, B, W, W);
  const double jstar = lqr::optimal_gain(prob).second;
  Mat K0(1, 1);
  K0 << 6.0;
  flow::FlowConfig cfg;
  cfg.max_time = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        flow::integrate_gradient_flow(prob, lqr::Gain(prob, K0), cfg, jstar));
  }
}
BENCHMARK(BM_scalar_flow_1s);

void BM_dt_sweep_single(benchmark::State& state) {
  const scalar::ScalarCt sys(1, 1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scalar::dt_rate_sweep(sys, {0.1}));
  }
}
BENCHMARK(BM_dt_sweep_single);

}  // namespace

BENCHMARK_MAIN();
