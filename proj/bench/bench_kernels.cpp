#include <benchmark/benchmark.h>

#include "balldyn/kernels.hpp"

using namespace balldyn;

namespace {

std::vector<DomainPoint> points(std::uint64_t seed, int n) {
  return sample_domain(DomainKind::Siegel, 4, n, seed);
}

template <bool Parallel>
void BM_distance_batch(benchmark::State& st) {
  int n = static_cast<int>(st.range(0));
  auto a = points(1, n), b = points(2, n);
  for (auto _ : st) {
    auto d = Parallel ? kernels::distance_batch(a, b) : kernels::serial::distance_batch(a, b);
    benchmark::DoNotOptimize(d.data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

template <bool Parallel>
void BM_commutation(benchmark::State& st) {
  int n = static_cast<int>(st.range(0));
  auto xs = points(1, n);
  MapDescription f = ExampleHyperbolic{4, 2}, g = ExampleParabolic{4, 3, 1.0};
  for (auto _ : st) {
    auto r = Parallel ? kernels::commutation_residuals(f, g, xs)
                      : kernels::serial::commutation_residuals(f, g, xs);
    benchmark::DoNotOptimize(r.data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

template <bool Parallel>
void BM_pullback(benchmark::State& st) {
  int n = static_cast<int>(st.range(0));
  auto xs = points(1, n);
  CommutingFamily F = make_family({ExampleHyperbolic{4, 2}, ExampleParabolic{4, 3, 1.0}});
  for (auto _ : st) {
    auto r = Parallel ? kernels::pullback_forms(F, xs) : kernels::serial::pullback_forms(F, xs);
    benchmark::DoNotOptimize(r.data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

}  // namespace

BENCHMARK(BM_distance_batch<false>)->Name("distance_batch/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_distance_batch<true>)->Name("distance_batch/openmp")->Arg(256)->Arg(4096);
BENCHMARK(BM_commutation<false>)->Name("commutation_residuals/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_commutation<true>)->Name("commutation_residuals/openmp")->Arg(256)->Arg(4096);
BENCHMARK(BM_pullback<false>)->Name("pullback_forms/serial")->Arg(16)->Arg(64);
BENCHMARK(BM_pullback<true>)->Name("pullback_forms/openmp")->Arg(16)->Arg(64);

BENCHMARK_MAIN();
