#include <gtest/gtest.h>

#include "oracle.hpp"
#include "schro/error.hpp"
#include "schro/operators.hpp"
#include "schro/propagate.hpp"

using namespace schro;

namespace {

const EvolutionConfig kTaylor{15, 1.0, EvolutionMethod::Taylor};
const EvolutionConfig kDense{15, 1.0, EvolutionMethod::DenseOracle};

struct Case {
  Graph graph;
  RMatrix f;
  CVector g;
};

Case random_case(std::mt19937_64& rng, std::size_t n = 12, Eigen::Index k = 2) {
  Case c{oracle::random_graph(rng, n), RMatrix(static_cast<Eigen::Index>(n), k), {}};
  for (Eigen::Index j = 0; j < k; ++j) c.f.col(j) = oracle::random_real(rng, static_cast<Eigen::Index>(n));
  c.g = oracle::random_unit(rng, static_cast<Eigen::Index>(n));
  return c;
}

}  // namespace

TEST(Evolve, ZeroTimeIsExact) {
  std::mt19937_64 rng(1);
  const Case c = random_case(rng);
  const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
  const Signal g = Signal::from_channel(c.g);
  EXPECT_EQ(evolve(lap, 0.0, g, kTaylor).values(), g.values());
  EXPECT_LE(oracle::max_abs(evolve_dense(lap, 0.0, g).values() - g.values()), 1e-12);
}

TEST(Evolve, ZeroLaplacianIsExact) {
  std::mt19937_64 rng(2);
  const Case c = random_case(rng);
  const auto lap = schrodinger_laplacian(c.graph, RVector::Constant(12, 3.0));
  const Signal g = Signal::from_channel(c.g);
  EXPECT_EQ(evolve(lap, 1.7, g, kTaylor).values(), g.values());
}

TEST(Evolve, P3TaylorMatchesOracle) {
  const Graph p3 = oracle::path(3);
  const RVector f = (RVector(3) << 0, 1, 2).finished();
  const CVector e0 = CVector::Unit(3, 0);
  const CVector expected = oracle::schrodinger(oracle::laplacian(p3, f), 0.3) * e0;
  const CVector got = evolve(schrodinger_laplacian(p3, f), 0.3, Signal::from_channel(e0), kTaylor).channel(0);
  EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolve, DenseOracleAgainstIndependentExponential) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Case c = random_case(rng);
    const double t = 1.3;
    const CVector expected = oracle::schrodinger(oracle::laplacian(c.graph, c.f), t) * c.g;
    const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
    EXPECT_LE((evolve_dense(lap, t, Signal::from_channel(c.g)).channel(0) - expected).norm(), 1e-10);
  }
}

TEST(Evolve, UnitarityCompositionInversion) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Case c = random_case(rng, 20, 3);
    const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
    const Signal g = Signal::from_channel(c.g);
    const double t1 = 0.7, t2 = -1.1;
    EXPECT_NEAR(evolve_dense(lap, t1, g).channel(0).norm(), 1.0, 1e-10);
    const Signal two = evolve_dense(lap, t1, evolve_dense(lap, t2, g));
    EXPECT_LE(oracle::max_abs(two.values() - evolve_dense(lap, t1 + t2, g).values()), 1e-9);
    EXPECT_LE(oracle::max_abs(evolve_dense(lap, -t1, evolve_dense(lap, t1, g)).values() - g.values()), 1e-9);
    EXPECT_LE(oracle::max_abs(evolve(lap, -t1, evolve(lap, t1, g, kTaylor), kTaylor).values() - g.values()), 1e-6);
  }
}

TEST(Evolve, SplitPolicy) {
  std::mt19937_64 rng(5);
  const Case c = random_case(rng);
  const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
  const TaylorPropagator prop(lap, kTaylor);
  EXPECT_DOUBLE_EQ(prop.norm_bound(), infinity_norm(lap));
  EXPECT_EQ(prop.substeps(2.0), static_cast<long>(std::ceil(2.0 * prop.norm_bound())));
}

TEST(UnitarityDefect, Examples) {
  std::mt19937_64 rng(6);
  const Case c = random_case(rng, 64, 2);
  const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
  const Signal g = Signal::from_channel(c.g);
  EXPECT_EQ(unitarity_defect(lap, 0.0, g, kTaylor), 0.0);
  EXPECT_LE(unitarity_defect(lap, 2.0, g, kDense), 1e-10);
  EXPECT_LE(unitarity_defect(lap, 2.0, g, kTaylor), 1e-6);
}

TEST(Evolve, CommutesWithDerivativeSingleFeature) {
  std::mt19937_64 rng(7);
  const Case c = random_case(rng, 12, 1);
  const RVector f = c.f.col(0);
  const auto d = feature_derivative(c.graph, f);
  const auto lap = schrodinger_laplacian(c.graph, f);
  const DensePropagator prop(lap);
  const CMatrix g = c.g;
  const CMatrix lhs = d.apply(prop.evolve(0.8, g));
  const CMatrix rhs = prop.evolve(0.8, d.apply(g));
  EXPECT_LE((lhs - rhs).norm(), 1e-9);
}

TEST(Evolve, MultiChannelIsColumnwise) {
  std::mt19937_64 rng(8);
  const Case c = random_case(rng);
  const auto lap = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
  CMatrix g(12, 3);
  for (Eigen::Index j = 0; j < 3; ++j) g.col(j) = oracle::random_unit(rng, 12);
  const Signal all = evolve(lap, 0.9, Signal(g), kTaylor);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Signal one = evolve(lap, 0.9, Signal::from_channel(g.col(j)), kTaylor);
    EXPECT_EQ(all.values().col(j), one.values().col(0));
  }
}

TEST(Evolve, Errors) {
  EXPECT_THROW((EvolutionConfig{0, 1.0, EvolutionMethod::Taylor}.validate()), Error);
  EXPECT_THROW((EvolutionConfig{65, 1.0, EvolutionMethod::Taylor}.validate()), Error);
  EXPECT_THROW((EvolutionConfig{15, 0.0, EvolutionMethod::Taylor}.validate()), Error);
  const auto [big, f] = ring_graph(1100);
  const auto lap = schrodinger_laplacian(big, f.column(0));
  try {
    DensePropagator prop(lap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Size);
  }
  std::mt19937_64 rng(9);
  const Case c = random_case(rng);
  const auto small = schrodinger_laplacian(c.graph, FeatureLocations(c.f));
  EXPECT_THROW(evolve(small, 1.0, Signal::from_channel(CVector::Ones(5)), kTaylor), Error);
}

TEST(Heat, ConservesMassAndSmooths) {
  const auto [g, f] = ring_graph(20);
  const HeatPropagator heat(graph_laplacian(g));
  const CMatrix x = CVector::Unit(20, 3);
  const CMatrix out = heat.evolve(2.0, x);
  EXPECT_NEAR(out.sum().real(), 1.0, 1e-12);
  EXPECT_LT(out.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(oracle::max_abs(heat.evolve(0.0, x) - x), 1e-12);
}
