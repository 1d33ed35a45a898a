#include <benchmark/benchmark.h>

#include <numeric>

#include "abmal/abm.hpp"
#include "abmal/kernels.hpp"
#include "abmal/ssvm.hpp"

using namespace abmal;

namespace {

struct Workload {
  Dataset ds = gen_synthetic(8, 6, 140, 1, 0.3);
  std::vector<std::size_t> ids;
  ModelParams abm, ssvm;

  Workload() {
    ids.resize(ds.size());
    std::iota(ids.begin(), ids.end(), 0);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.05;
    const std::vector<std::size_t> train(ids.begin(), ids.begin() + 20);
    abm = train_abm(ds, train, cfg).params;
    ssvm = train_ssvm(ds, train, cfg).params;
    ssvm.platt = fit_platt_on_edges(ssvm, ds, train);
  }
};

const Workload& workload() {
  static const Workload w;
  return w;
}

template <bool Parallel>
void BM_AbmMiScores(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    auto s = Parallel ? kernels::parallel::abm_mi_scores(w.abm, w.ds, w.ids, {})
                      : kernels::serial::abm_mi_scores(w.abm, w.ds, w.ids, {});
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.ids.size()));
}

template <bool Parallel>
void BM_SsvmEntropyScores(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    auto s = Parallel ? kernels::parallel::ssvm_entropy_scores(w.ssvm, w.ds, w.ids)
                      : kernels::serial::ssvm_entropy_scores(w.ssvm, w.ds, w.ids);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.ids.size()));
}

template <bool Parallel>
void BM_EvaluateAbm(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    auto e = Parallel ? kernels::parallel::evaluate(w.abm, w.ds, w.ids, {})
                      : kernels::serial::evaluate(w.abm, w.ds, w.ids, {});
    benchmark::DoNotOptimize(e.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.ids.size()));
}

}  // namespace

BENCHMARK(BM_AbmMiScores<false>)->Name("abm_mi_scores/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AbmMiScores<true>)->Name("abm_mi_scores/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SsvmEntropyScores<false>)->Name("ssvm_entropy_scores/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SsvmEntropyScores<true>)->Name("ssvm_entropy_scores/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateAbm<false>)->Name("evaluate_abm/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateAbm<true>)->Name("evaluate_abm/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
