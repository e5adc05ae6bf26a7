#include <random>

#include <benchmark/benchmark.h>

#include "sufcast/sdr.hpp"
#include "sufcast/slice_moments.hpp"
#include "sufcast/smoother.hpp"

using namespace sufcast;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
    return m;
}

// Arguments: T, K, with third moments (0/1).
template <Execution exec>
void BM_SliceMoments(benchmark::State& state) {
    const auto t = state.range(0);
    const auto k = state.range(1);
    const bool third = state.range(2) != 0;
    const Eigen::MatrixXd f = normal_matrix(t, k, 1);
    const auto s = slice(normal_matrix(t, 1, 2).col(0), kDefaultSlices);
    for (auto _ : state) benchmark::DoNotOptimize(slice_moments(f, s, third, exec));
    state.SetItemsProcessed(state.iterations() * t);
}

// Arguments: evaluation points, data points.
template <Execution exec>
void BM_NadarayaWatsonWeights(benchmark::State& state) {
    const Eigen::VectorXd at = normal_matrix(state.range(0), 1, 3).col(0);
    const Eigen::VectorXd data = normal_matrix(state.range(1), 1, 4).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(nw_weights(at, data, 0.3, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <Execution exec>
void BM_DrKernel(benchmark::State& state) {
    const auto t = state.range(0);
    const Eigen::MatrixXd f = normal_matrix(t, 8, 5);
    const auto s = slice(normal_matrix(t, 1, 6).col(0), kDefaultSlices);
    for (auto _ : state) benchmark::DoNotOptimize(dr_kernel(f, s, VarianceMode::identity, exec));
}

}  // namespace

BENCHMARK(BM_SliceMoments<Execution::serial>)->Args({500, 6, 0})->Args({500, 6, 1})->Args({20000, 8, 1});
BENCHMARK(BM_SliceMoments<Execution::parallel>)->Args({500, 6, 0})->Args({500, 6, 1})->Args({20000, 8, 1});
BENCHMARK(BM_NadarayaWatsonWeights<Execution::serial>)->Args({100, 500})->Args({1000, 1000});
BENCHMARK(BM_NadarayaWatsonWeights<Execution::parallel>)->Args({100, 500})->Args({1000, 1000});
BENCHMARK(BM_DrKernel<Execution::serial>)->Arg(500)->Arg(20000);
BENCHMARK(BM_DrKernel<Execution::parallel>)->Arg(500)->Arg(20000);

BENCHMARK_MAIN();
