// Serial reference kernels against their OpenMP counterparts. Each benchmark
// takes the execution mode as its single argument: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <numeric>

#include "edudss/data/preprocess.hpp"
#include "edudss/data/synthetic.hpp"
#include "edudss/explain/tree_shap.hpp"
#include "edudss/gbdt/binning.hpp"
#include "edudss/gbdt/booster.hpp"
#include "edudss/gbdt/histogram.hpp"

namespace {

using namespace edudss;

constexpr std::size_t kRows = 20000;
constexpr std::size_t kExplainRows = 2000;  // TreeSHAP is far costlier per row

struct Fixture {
  data::TransformedData data;
  gbdt::FeatureBinner binner;
  gbdt::BinnedMatrix binned;
  gbdt::GBDTModel model;
  FeatureMatrix explain_rows;

  Fixture() {
    const auto dataset = data::generate_student_data(kRows, 7);
    data = data::transform_dataset(dataset, data::fit_preprocessor(dataset));
    binner = gbdt::FeatureBinner::fit(data.features, 255);
    binned = binner.apply(data.features);
    gbdt::TrainConfig config;
    config.num_rounds = 100;
    model = gbdt::train(data.features, data.targets, config);
    for (std::size_t r = 0; r < kExplainRows; ++r) explain_rows.append_row(data.features.row(r));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

gbdt::Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? gbdt::Execution::kSerial : gbdt::Execution::kParallel;
}

void BM_BinnerApply(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.binner.apply(f.data.features, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRows));
}

void BM_HistogramBuild(benchmark::State& state) {
  const auto& f = fixture();
  const auto builder = gbdt::HistogramBuilder::unbundled(f.binned);
  std::vector<std::uint32_t> rows(kRows);
  std::iota(rows.begin(), rows.end(), 0u);
  std::vector<double> grad(kRows), hess(kRows, 1.0);
  for (std::size_t i = 0; i < kRows; ++i) grad[i] = f.data.targets[i] - 67.0;
  const auto totals = gbdt::sum_totals(rows, grad, hess);
  for (auto _ : state) {
    benchmark::DoNotOptimize(builder.build(rows, grad, hess, totals, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRows));
}

void BM_PredictBatch(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model.predict_batch(f.data.features, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kRows));
}

void BM_ExplainBatch(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(explain::explain_batch(f.model, f.explain_rows, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kExplainRows));
}

void BM_Train(benchmark::State& state) {
  const auto& f = fixture();
  gbdt::TrainConfig config;
  config.num_rounds = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gbdt::train(f.data.features, f.data.targets, config, {}, mode(state)));
  }
}

BENCHMARK(BM_BinnerApply)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExplainBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Train)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
