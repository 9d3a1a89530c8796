#include "lpsvm/experiment.hpp"
#include "lpsvm/graph_lp.hpp"
#include "lpsvm/parallel.hpp"
#include "lpsvm/svm.hpp"
#include "lpsvm/synthetic.hpp"

#include <benchmark/benchmark.h>

namespace {

lpsvm::Dataset masked_blobs(std::size_t n, std::size_t dim = 2) {
    lpsvm::BlobSpec spec;
    spec.n = n;
    spec.num_classes = 3;
    spec.separation = 4.0;
    spec.dimension = dim;
    spec.seed = 7;
    return lpsvm::mask_labels(lpsvm::gen_blobs(spec), 0.8, 7).dataset;
}

void BM_BuildWeights(benchmark::State &state) {
    const lpsvm::Dataset ds = masked_blobs(static_cast<std::size_t>(state.range(0)));
    const double sigma = lpsvm::default_sigma(ds.records());
    for (auto _ : state) {
        benchmark::DoNotOptimize(lpsvm::build_weights(ds.records(), sigma));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildWeights)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNSquared);

void BM_Propagate(benchmark::State &state) {
    const lpsvm::Dataset ds = masked_blobs(static_cast<std::size_t>(state.range(0)));
    const auto t = lpsvm::row_normalize(lpsvm::build_weights(ds.records(), lpsvm::default_sigma(ds.records())));
    for (auto _ : state) {
        benchmark::DoNotOptimize(lpsvm::propagate(t, ds));
    }
}
BENCHMARK(BM_Propagate)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_SmoLinear(benchmark::State &state) {
    lpsvm::BlobSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    spec.num_classes = 2;
    spec.separation = 3.0;
    spec.seed = 3;
    const lpsvm::Dataset ds = lpsvm::gen_blobs(spec);
    const std::vector<double> x = lpsvm::feature_matrix(ds.records());
    std::vector<int> y;
    for (const auto &r : ds.records()) {
        y.push_back(*r.label == 0 ? -1 : 1);
    }
    const lpsvm::SmoParams params{};
    for (auto _ : state) {
        benchmark::DoNotOptimize(lpsvm::smo_solve(x, ds.dimension(), y, params));
    }
}
BENCHMARK(BM_SmoLinear)->RangeMultiplier(2)->Range(100, 800)->Unit(benchmark::kMillisecond);

void BM_HybridFit(benchmark::State &state) {
    const lpsvm::Dataset ds = masked_blobs(static_cast<std::size_t>(state.range(0)));
    const std::size_t tasks = static_cast<std::size_t>(state.range(1));
    lpsvm::ParallelConfig cfg;
    cfg.tasks = tasks;
    for (auto _ : state) {
        if (tasks == 0) {
            benchmark::DoNotOptimize(lpsvm::hybrid_fit(ds, cfg.hybrid));
        } else {
            benchmark::DoNotOptimize(lpsvm::parallel_hybrid_fit(ds, cfg));
        }
    }
}
BENCHMARK(BM_HybridFit)->ArgsProduct({ { 300, 600 }, { 0, 1, 2, 4 } })->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
