#include <benchmark/benchmark.h>

#include "snake/geometry.hpp"
#include "snake/kernels.hpp"
#include "snake/rng.hpp"

using namespace snake;

namespace {
WeightedPointMeasure cloud_measure(std::size_t n) {
  Stream rng(1, 0);
  WeightedPointMeasure mu(5);
  std::vector<double> p(5);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : p) x = rng.normal();
    mu.add(p, 1.0 / static_cast<double>(n));
  }
  return mu;
}

template <double (*F)(const WeightedPointMeasure&, double)>
void BM_Gaussian(benchmark::State& st) {
  const auto mu = cloud_measure(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(mu, 0.2));
  st.SetComplexityN(st.range(0));
}

template <double (*F)(const WeightedPointMeasure&, const Kernel&, double)>
void BM_Riesz(benchmark::State& st) {
  const auto mu = cloud_measure(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(mu, Kernel::power(1.0), 0.01));
}

template <VolumeEstimate (*F)(const PointCloud&, const Region&, double, std::size_t, std::uint64_t)>
void BM_Volume(benchmark::State& st) {
  const PointCloud c = support_cloud(cloud_measure(static_cast<std::size_t>(st.range(0))));
  const Region A = Region::make_ball(std::vector<double>(5, 0.0), 1.5);
  for (auto _ : st) benchmark::DoNotOptimize(F(c, A, 0.3, 100000, 7).estimate);
}
}  // namespace

BENCHMARK(BM_Gaussian<kernels::gaussian_pair_sum>)->Name("gaussian_pair_sum/parallel")->Arg(1000)->Arg(4000);
BENCHMARK(BM_Gaussian<reference::gaussian_pair_sum>)->Name("gaussian_pair_sum/reference")->Arg(1000)->Arg(4000);
BENCHMARK(BM_Riesz<kernels::kernel_pair_sum>)->Name("kernel_pair_sum/parallel")->Arg(1000)->Arg(4000);
BENCHMARK(BM_Riesz<reference::kernel_pair_sum>)->Name("kernel_pair_sum/reference")->Arg(1000)->Arg(4000);
BENCHMARK(BM_Volume<kernels::epsilon_volume>)->Name("epsilon_volume/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_Volume<reference::epsilon_volume>)->Name("epsilon_volume/reference")->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
