// Serial reference vs OpenMP kernel for each parallel stage.

#include <benchmark/benchmark.h>

#include <map>

#include "crn/datagen.hpp"
#include "crn/optimizer.hpp"
#include "crn/parallel.hpp"
#include "crn/presets.hpp"
#include "crn/volume.hpp"

using namespace crn;

namespace {

const ConeCatalog& catalog(int m) {
  static std::map<int, ConeCatalog> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, ConeCatalog(presets::mass_transfer_candidates(m), 4)).first;
  return it->second;
}

void BM_TallySerial(benchmark::State& state) {
  const auto& cat = catalog(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tally_signatures_serial(cat, MeasureSpec{}, 1, 0, 1000));
  state.SetItemsProcessed(state.iterations() * 1000 * static_cast<std::int64_t>(cat.nondegenerate().size()));
}

void BM_TallyParallel(benchmark::State& state) {
  const auto& cat = catalog(static_cast<int>(state.range(0)));
  par::set_threads(0);
  for (auto _ : state) benchmark::DoNotOptimize(tally_signatures(cat, MeasureSpec{}, 1, 0, 1000));
  state.SetItemsProcessed(state.iterations() * 1000 * static_cast<std::int64_t>(cat.nondegenerate().size()));
}

struct FitFixture {
  LikelihoodModel model;
  CountVector counts;
  OptimizerConfig config;

  explicit FitFixture(int m) {
    const auto& cat = catalog(m);
    const auto table = estimate_volumes(cat, MeasureSpec{}, 1000, 2);
    model = build_model(table, cat);
    counts.u.assign(table.block_count(), 0);
    for (std::size_t i = 0; i < counts.u.size(); i += 3) counts.u[i] = 5;
    config.restarts = 16;
    config.seed = 3;
  }
};

void BM_MultistartSerial(benchmark::State& state) {
  FitFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(multistart_serial(f.model, f.counts, f.config));
}

void BM_MultistartParallel(benchmark::State& state) {
  FitFixture f(static_cast<int>(state.range(0)));
  par::set_threads(0);
  for (auto _ : state) benchmark::DoNotOptimize(multistart(f.model, f.counts, f.config));
}

DataGenConfig datagen_config() {
  DataGenConfig cfg;
  cfg.points = 16;
  cfg.ssa = default_ssa_config(presets::mass_transfer_true());
  cfg.seed = 5;
  return cfg;
}

void BM_DatagenSerial(benchmark::State& state) {
  const auto net = presets::mass_transfer_true();
  const auto cfg = datagen_config();
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset_serial(net, cfg));
}

void BM_DatagenParallel(benchmark::State& state) {
  const auto net = presets::mass_transfer_true();
  const auto cfg = datagen_config();
  par::set_threads(0);
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(net, cfg));
}

}  // namespace

BENCHMARK(BM_TallySerial)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TallyParallel)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultistartSerial)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultistartParallel)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatagenSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatagenParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
