// Filter and propagator cost on rings; cost should track |E|.
#include <benchmark/benchmark.h>

#include <random>

#include "schro/filter.hpp"
#include "schro/operators.hpp"
#include "schro/propagate.hpp"

using namespace schro;

namespace {

struct RingCase {
  Graph graph;
  FeatureLocations f;
  Signal g;
};

RingCase make_case(std::size_t n, std::size_t channels) {
  auto [graph, ring] = ring_graph(n);
  const std::size_t cols[] = {0, 1};
  std::mt19937_64 rng(n);
  std::normal_distribution<double> normal;
  CMatrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(channels));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = Complex(normal(rng), normal(rng));
  g.colwise().normalize();
  return {std::move(graph), ring.select(cols), Signal(g)};
}

void BM_Filter(benchmark::State& state) {
  const RingCase c = make_case(static_cast<std::size_t>(state.range(0)), 4);
  FilterParams p;
  p.terms.push_back({1.0, 0.7, (RVector(2) << 1.0, -0.5).finished(), CMatrix::Identity(4, 4)});
  for (auto _ : state) benchmark::DoNotOptimize(schrodinger_filter(c.graph, c.f, p, c.g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Filter)->RangeMultiplier(2)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oN);

void BM_Evolve(benchmark::State& state) {
  const RingCase c = make_case(static_cast<std::size_t>(state.range(0)), 1);
  const auto lap = schrodinger_laplacian(c.graph, c.f);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(lap, 1.0, c.g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Evolve)->RangeMultiplier(2)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oN);

}  // namespace
BENCHMARK_MAIN();
