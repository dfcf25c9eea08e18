// Serial reference loops against the OpenMP kernels on operator-sized inputs.
// Thread count follows OMP_NUM_THREADS.

#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"
#include "ihgnn/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace ihgnn;

namespace {

PropagationOperator make_op(std::size_t n) {
    Rng rng = substream(1, "bench/op");
    synthetic::HypergraphShape shape;
    shape.nodes = n;
    shape.extra_edges = n;
    shape.max_edge_size = 8;
    return build_operator(synthetic::random_hypergraph(shape, rng));
}

DenseMatrix make_dense(std::size_t r, std::size_t c) {
    Rng rng = substream(2, "bench/dense");
    return synthetic::random_matrix(r, c, rng);
}

template <bool Reference>
void BM_spmm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto op = make_op(n);
    const auto z = make_dense(n, 128);
    for (auto _ : state) {
        auto out = Reference ? reference::spmm(op.m, z) : spmm(op.m, z);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(op.m.nnz() * 128));
}

template <bool Reference>
void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto z = make_dense(n, 128), w = make_dense(128, 128);
    for (auto _ : state) {
        auto out = Reference ? reference::matmul(z, w) : matmul(z, w);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 128 * 128));
}

template <bool Reference>
void BM_matmul_tn(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = make_dense(n, 128), b = make_dense(n, 128);
    for (auto _ : state) {
        auto out = Reference ? reference::matmul_tn(a, b) : matmul_tn(a, b);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 128 * 128));
}

} // namespace

BENCHMARK(BM_spmm<true>)->Name("spmm/reference")->Arg(2708)->Arg(19717)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmm<false>)->Name("spmm/openmp")->Arg(2708)->Arg(19717)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul<true>)->Name("matmul/reference")->Arg(2708)->Arg(19717)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul<false>)->Name("matmul/openmp")->Arg(2708)->Arg(19717)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul_tn<true>)->Name("matmul_tn/reference")->Arg(2708)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul_tn<false>)->Name("matmul_tn/openmp")->Arg(2708)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
