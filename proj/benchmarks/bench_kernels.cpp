// Microbenchmarks for the kernels that dominate solver time: MTTKRP (dense
// and sparse), Khatri-Rao, the evaluation path, one ALS sweep, and the
// windowed recombination step.

#include "cpfit/als.hpp"
#include "cpfit/kruskal.hpp"
#include "cpfit/ngmres.hpp"
#include "cpfit/problems.hpp"
#include "cpfit/rng.hpp"
#include "cpfit/tensor.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace cpfit;

DataTensor make_dense(index_t s, index_t rank) {
    return DataTensor(dense_test_problem({s, 0.9, rank, 1.0, 1.0, 7}).data);
}

std::vector<Matrix> make_factors(const Shape& shape, index_t rank) {
    return uniform_initial_guess(shape, rank, 7).factors();
}

void BM_mttkrp_dense(benchmark::State& state) {
    const index_t s = state.range(0);
    const int mode = static_cast<int>(state.range(1));
    const DataTensor t = make_dense(s, 3);
    const auto factors = make_factors(t.shape(), 3);
    for (auto _ : state) benchmark::DoNotOptimize(t.mttkrp(factors, mode));
}
BENCHMARK(BM_mttkrp_dense)->Args({50, 0})->Args({50, 1})->Args({50, 2})->Args({100, 1});

void BM_mttkrp_sparse(benchmark::State& state) {
    const DataTensor t(laplacian_tensor({3, 6}));
    const auto factors = make_factors(t.shape(), 3);
    for (auto _ : state) benchmark::DoNotOptimize(t.mttkrp(factors, 2));
}
BENCHMARK(BM_mttkrp_sparse);

void BM_khatri_rao(benchmark::State& state) {
    Rng rng(7);
    std::vector<Matrix> mats;
    for (int i = 0; i < 3; ++i) {
        Matrix m(state.range(0), 5);
        for (index_t j = 0; j < m.size(); ++j) m.data()[j] = rng.uniform();
        mats.push_back(std::move(m));
    }
    for (auto _ : state) benchmark::DoNotOptimize(khatri_rao(mats));
}
BENCHMARK(BM_khatri_rao)->Arg(20)->Arg(50);

void BM_objective_and_gradient(benchmark::State& state) {
    const DataTensor t = make_dense(state.range(0), 3);
    const KruskalTensor k = uniform_initial_guess(t.shape(), 3, 11);
    Vector grad;
    for (auto _ : state) benchmark::DoNotOptimize(objective_and_gradient(t, k, grad));
}
BENCHMARK(BM_objective_and_gradient)->Arg(50)->Arg(100);

void BM_als_sweep(benchmark::State& state) {
    const DataTensor t = make_dense(state.range(0), 3);
    const KruskalTensor k = uniform_initial_guess(t.shape(), 3, 11);
    for (auto _ : state) benchmark::DoNotOptimize(als_sweep(t, k));
}
BENCHMARK(BM_als_sweep)->Arg(50)->Arg(100);

void BM_accelerate(benchmark::State& state) {
    Rng rng(13);
    const index_t dim = 5000;
    const std::size_t window = static_cast<std::size_t>(state.range(0));
    AccelWindow w(window);
    auto randv = [&] {
        Vector v(dim);
        for (index_t i = 0; i < dim; ++i) v[i] = rng.uniform() - 0.5;
        return v;
    };
    for (std::size_t i = 0; i < window; ++i) w.push(randv(), randv());
    const Vector u_bar = randv(), g_bar = randv();
    for (auto _ : state) benchmark::DoNotOptimize(accelerate(w, u_bar, g_bar, 1e-12));
}
BENCHMARK(BM_accelerate)->Arg(5)->Arg(20);

} // namespace

BENCHMARK_MAIN();
