#include <benchmark/benchmark.h>

#include <random>

#include "cmx/cmx.hpp"

namespace {

cmx::EmbeddedDataset mixture(std::size_t per_class, Eigen::Index dim, std::size_t classes) {
  std::vector<cmx::GaussianSpec> specs;
  for (std::size_t c = 0; c < classes; ++c) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    mean(static_cast<Eigen::Index>(c) % dim) = 2.0;
    specs.push_back({"c" + std::to_string(c), mean, Eigen::MatrixXd::Identity(dim, dim), per_class});
  }
  return cmx::generate(specs, 1);
}

void BM_Fit(benchmark::State& state) {
  const auto data = mixture(static_cast<std::size_t>(state.range(0)), state.range(1), 8);
  for (auto _ : state) benchmark::DoNotOptimize(cmx::fit(data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_Fit)->Args({500, 2})->Args({500, 64})->Args({2000, 384})->Unit(benchmark::kMillisecond);

void BM_ScoreDataset(benchmark::State& state) {
  const auto data = mixture(static_cast<std::size_t>(state.range(0)), state.range(1), 8);
  const auto model = cmx::fit(data);
  for (auto _ : state) benchmark::DoNotOptimize(cmx::score_dataset(data, model, cmx::kAllDistanceKinds));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_ScoreDataset)->Args({500, 2})->Args({500, 64})->Args({500, 384})->Unit(benchmark::kMillisecond);

cmx::AnalysisTable random_table(std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> ids(n), truth(n, "a"), pred(n);
  std::vector<double> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = std::to_string(i);
    x1[i] = u(rng);
    x2[i] = u(rng);
    pred[i] = u(rng) < 0.1 + 0.5 * x1[i] * x2[i] ? "b" : "a";
  }
  cmx::AnalysisTable table(ids, truth, pred);
  table.add_feature("x1", x1);
  table.add_feature("x2", x2);
  return table;
}

void BM_Slices1d(benchmark::State& state) {
  const auto table = random_table(static_cast<std::size_t>(state.range(0)));
  cmx::SliceSearchOptions opts;
  opts.min_support = cmx::default_min_support(table.size());
  for (auto _ : state) benchmark::DoNotOptimize(cmx::find_slices_1d(table, "x1", opts));
}
BENCHMARK(BM_Slices1d)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Slices2d(benchmark::State& state) {
  const auto table = random_table(10000);
  cmx::SliceSearchOptions opts;
  opts.min_support = cmx::default_min_support(table.size());
  opts.grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmx::find_slices_2d(table, "x1", "x2", opts));
}
BENCHMARK(BM_Slices2d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Heatmap(benchmark::State& state) {
  const auto model = cmx::model_from_specs(cmx::preset(cmx::Preset::ThreeTwoOverlaps));
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmx::heatmap(model, {-4, 8}, {-6, 6}, n, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Heatmap)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
