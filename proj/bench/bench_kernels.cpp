// Serial reference vs OpenMP kernels on synthetic data.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "spurlens/kernels.hpp"

using namespace spurlens;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

template <auto Kernel>
void bm_bootstrap(benchmark::State& state) {
  const auto x = normal_sample(static_cast<std::size_t>(state.range(0)), 1);
  const auto rows = iota_rows(x.size());
  const Statistic mean = [&](std::span<const std::size_t> idx) -> std::optional<double> {
    double s = 0.0;
    for (auto i : idx) s += x[i];
    return s / static_cast<double>(idx.size());
  };
  BootstrapOptions opts;
  opts.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(mean, rows, opts));
}

struct SplitData {
  std::vector<std::vector<double>> columns;
  std::vector<FeatureView> views;
  std::vector<double> target;
  std::vector<std::size_t> rows;
};

SplitData split_data(std::size_t n, std::size_t p) {
  SplitData d;
  for (std::size_t f = 0; f < p; ++f) d.columns.push_back(normal_sample(n, 100 + f));
  for (const auto& c : d.columns) d.views.push_back(FeatureView{c});
  std::mt19937_64 rng(3);
  std::bernoulli_distribution hi(0.9), lo(0.1);
  for (std::size_t i = 0; i < n; ++i) d.target.push_back(d.columns[0][i] > 0 ? hi(rng) : lo(rng));
  d.rows = iota_rows(n);
  return d;
}

template <auto Kernel>
void bm_split(benchmark::State& state) {
  const auto d = split_data(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(Kernel(d.views, d.target, d.rows, SplitCriterion::gini, 10));
}

template <auto Kernel>
void bm_auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<double>> features;
  for (std::size_t f = 0; f < 16; ++f) features.push_back(normal_sample(n, 200 + f));
  std::vector<int> group(n);
  for (std::size_t i = 0; i < n; ++i) group[i] = static_cast<int>(i % 4);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(features, group, 4));
}

}  // namespace

BENCHMARK(bm_bootstrap<kernels::serial::bootstrap>)->Name("bootstrap/serial")->Arg(200)->Arg(2000);
BENCHMARK(bm_bootstrap<kernels::parallel::bootstrap>)->Name("bootstrap/parallel")->Arg(200)->Arg(2000);
BENCHMARK(bm_split<kernels::serial::best_split>)->Name("split/serial")->Arg(2000)->Arg(20000);
BENCHMARK(bm_split<kernels::parallel::best_split>)->Name("split/parallel")->Arg(2000)->Arg(20000);
BENCHMARK(bm_auc<kernels::serial::aggregated_auc>)->Name("auc/serial")->Arg(2000)->Arg(20000);
BENCHMARK(bm_auc<kernels::parallel::aggregated_auc>)->Name("auc/parallel")->Arg(2000)->Arg(20000);

BENCHMARK_MAIN();
