// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "bsvd/driver.hpp"
#include "bsvd/kernels.hpp"

using namespace bsvd;

namespace {

DenseMatrix random_dense(std::size_t r, std::size_t c) {
  std::mt19937_64 gen(r * 131 + c);
  std::normal_distribution<double> nd;
  DenseMatrix a(r, c);
  for (double& x : a.data()) x = nd(gen);
  return a;
}

template <DenseMatrix (*Gemm)(const DenseMatrix&, const DenseMatrix&)>
void BM_gemm_tn(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix a = random_dense(2 * n, n);
  const DenseMatrix b = random_dense(2 * n, n);
  for (auto _ : st) benchmark::DoNotOptimize(Gemm(a, b));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(2 * n * n * n));
}

template <DenseMatrix (*Gemm)(const DenseMatrix&, const DenseMatrix&)>
void BM_gemm_nn(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix a = random_dense(n, n);
  const DenseMatrix b = random_dense(n, n);
  for (auto _ : st) benchmark::DoNotOptimize(Gemm(a, b));
}

template <DenseMatrix (*Kernel)(std::span<const Entry>, std::size_t, const DenseMatrix&)>
void BM_sparse_dense(benchmark::State& st) {
  const SparseTriplets m = gen_synthetic(2000, 400, 0.005, 1.1, 42);
  const DenseMatrix b = random_dense(400, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Kernel(m.entries(), m.rows(), b));
}

template <DenseMatrix (*Kernel)(std::span<const Entry>, std::size_t, std::span<const Entry>, std::size_t,
                                std::size_t)>
void BM_sparse_gram(benchmark::State& st) {
  const SparseTriplets m = gen_synthetic(2000, 400, 0.005, 1.1, 42);
  for (auto _ : st) benchmark::DoNotOptimize(Kernel(m.entries(), 400, m.entries(), 400, 2000));
}

}  // namespace

BENCHMARK(BM_gemm_tn<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_tn<kernels::parallel::gemm_tn>)->Name("gemm_tn/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(BM_gemm_nn<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_nn<kernels::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(BM_sparse_dense<kernels::serial::sparse_dense>)->Name("sparse_dense/serial")->Arg(16)->Arg(128);
BENCHMARK(BM_sparse_dense<kernels::parallel::sparse_dense>)
    ->Name("sparse_dense/parallel")
    ->Arg(16)
    ->Arg(128)
    ->UseRealTime();
BENCHMARK(BM_sparse_gram<kernels::serial::sparse_tn_sparse>)->Name("sparse_gram/serial");
BENCHMARK(BM_sparse_gram<kernels::parallel::sparse_tn_sparse>)->Name("sparse_gram/parallel")->UseRealTime();

BENCHMARK_MAIN();
