#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include <unistd.h>

#include "gcm/dataset_io.hpp"
#include "gcm/expansion.hpp"
#include "gcm/generator.hpp"
#include "gcm/objectives.hpp"
#include "gcm/training.hpp"

namespace {

const gcm::Dataset& bench_data() {
  static const gcm::Dataset data = [] {
    auto spec = gcm::GeneratorSpec::preset("fig5-regime");
    spec.seed = 3;
    spec.n_pos_groups = 20;
    spec.n_neg_groups = 1000;
    return gcm::generate(spec);
  }();
  return data;
}

gcm::LinearModel bench_model(std::size_t dim) {
  gcm::LinearModel m(dim);
  for (std::size_t j = 0; j < dim; ++j) m.w[static_cast<Eigen::Index>(j)] = 0.1 * static_cast<double>(j % 5) - 0.2;
  m.b = -0.5;
  return m;
}

void BM_ObjectiveGradient(benchmark::State& state) {
  const auto& data = bench_data();
  const gcm::ObjectiveSpec spec{{0.5, 1.0, 0.5},
                                state.range(0) == 0 ? gcm::Aggregation::kPerCandidate : gcm::Aggregation::kGrouped};
  const gcm::LinearModel m = bench_model(data.dim());
  gcm::GradientVector g;
  for (auto _ : state) benchmark::DoNotOptimize(gcm::evaluate(m, data, spec, &g).total);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.rows()));
  state.SetLabel(state.range(0) == 0 ? "per-candidate" : "grouped");
}
BENCHMARK(BM_ObjectiveGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainGcm(benchmark::State& state) {
  const auto& data = bench_data();
  for (auto _ : state) benchmark::DoNotOptimize(gcm::train_gcm(data, {0.5, 1.0, 0.5}).objective);
}
BENCHMARK(BM_TrainGcm)->Unit(benchmark::kMillisecond);

void BM_StreamGrouped(benchmark::State& state) {
  const auto path = std::filesystem::temp_directory_path() / ("gcm_bench_" + std::to_string(::getpid()) + ".bin");
  auto spec = gcm::GeneratorSpec::preset("fig5-regime");
  spec.seed = 4;
  spec.n_pos_groups = 20;
  spec.n_neg_groups = 1000;
  const auto rows = gcm::generate_to_binary(spec, path);
  gcm::BinaryDatasetReader reader(path);
  const gcm::LinearModel m = bench_model(reader.dim());
  for (auto _ : state) {
    reader.rewind();
    benchmark::DoNotOptimize(gcm::eval_grouped_stream(m, reader, {0.5, 1.0, 0.5}).total);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
  std::filesystem::remove(path);
}
BENCHMARK(BM_StreamGrouped)->Unit(benchmark::kMillisecond);

void BM_Expansion(benchmark::State& state) {
  const auto& data = bench_data();
  const auto degree = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gcm::expand(data, {degree, std::nullopt}).rows());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.rows()));
}
BENCHMARK(BM_Expansion)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
