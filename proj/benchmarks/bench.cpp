#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "windcast/dataset.hpp"
#include "windcast/hsic.hpp"
#include "windcast/kernel.hpp"
#include "windcast/linear.hpp"
#include "windcast/power_curve.hpp"
#include "windcast/synthetic.hpp"

namespace {

using namespace windcast;

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

Eigen::VectorXd smooth_targets(const Eigen::MatrixXd& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    y[i] = std::sin(x(i, 0)) + 0.5 * x(i, x.cols() - 1) + 0.05 * g(rng);
  return y;
}

void BM_GaussianGram(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd x = random_matrix(n, 16, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_gram(x, x, KernelSpec{0.05}));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GaussianGram)->Arg(256)->Arg(1024)->Complexity(benchmark::oNSquared);

void BM_NystromKrrFit(benchmark::State& state) {
  const Eigen::MatrixXd x = random_matrix(4096, 16, 2);
  const Eigen::VectorXd y = smooth_targets(x, 3);
  const auto p = static_cast<std::ptrdiff_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nystrom_krr_fit(x, y, KernelSpec{0.05}, 0.1, p, 7));
}
BENCHMARK(BM_NystromKrrFit)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LassoFit(benchmark::State& state) {
  const Eigen::MatrixXd x = random_matrix(4096, 64, 4);
  const Eigen::VectorXd y = smooth_targets(x, 5);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_fit(x, y, 0.01, 1e-6, 10000));
}
BENCHMARK(BM_LassoFit)->Unit(benchmark::kMillisecond);

void BM_NystromHsic(benchmark::State& state) {
  const Eigen::MatrixXd x = random_matrix(2048, 16, 6);
  const Eigen::MatrixXd y = smooth_targets(x, 7);
  HsicConfig config;
  config.p = 100;
  config.p_prime = 100;
  for (auto _ : state) benchmark::DoNotOptimize(nystrom_hsic(x, y, config));
}
BENCHMARK(BM_NystromHsic)->Unit(benchmark::kMillisecond);

void BM_PowerCurveQuery(benchmark::State& state) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> speed(0.0, 15.0);
  std::normal_distribution<double> noise(0.0, 20.0);
  const std::size_t n = 40000;
  std::vector<double> ws(n), pw(n);
  for (std::size_t i = 0; i < n; ++i) {
    ws[i] = speed(rng);
    pw[i] = synth_power_function(ws[i]) + noise(rng);
  }
  const PowerCurve curve = fit_power_curve(ws, pw, 250);
  double q = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(curve.predict(q));
    q += 0.37;
    if (q > 15.0) q -= 15.0;
  }
}
BENCHMARK(BM_PowerCurveQuery);

void BM_BuildSupervised(benchmark::State& state) {
  SyntheticFarmSpec spec;
  spec.n = 20000;
  const TimeSeriesFrame frame = synth_generate(spec);
  const WindowSpec window;
  for (auto _ : state) benchmark::DoNotOptimize(build_supervised(frame, window, "WS", 6));
}
BENCHMARK(BM_BuildSupervised)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
