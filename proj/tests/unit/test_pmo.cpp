#include <gtest/gtest.h>

#include "oracle.hpp"
#include "schro/error.hpp"
#include "schro/observe.hpp"
#include "schro/pmo.hpp"

using namespace schro;

namespace {

// Brute-force objective from dense matrices and SVD norms.
double dense_objective(const Graph& graph, const RMatrix& q, const RMatrix& t, double lambda) {
  const RMatrix f = q * t;
  double cross = 0.0, reg = 0.0;
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const RMatrix d = oracle::derivative(graph, f.col(j));
    reg += std::pow(d.cwiseAbs().rowwise().sum().maxCoeff() - 1.0, 2);
    for (Eigen::Index i = 0; i < f.cols(); ++i) {
      if (i == j) continue;
      const RMatrix x = f.col(i).asDiagonal();
      const RMatrix c = d * d * x - x * d * d;
      cross += std::pow(oracle::spectral_norm(c.cast<Complex>()), 2);
    }
  }
  return cross + lambda * reg;
}

RMatrix correlated_grid_features(const FeatureLocations& xy) {
  RMatrix q(xy.values().rows(), 2);
  q.col(0) = xy.values().col(0);
  q.col(1) = xy.values().col(0) + xy.values().col(1);
  return q;
}

}  // namespace

TEST(PMOObjective, ZeroTransformGivesLambdaK) {
  std::mt19937_64 rng(1);
  const Graph g = oracle::random_graph(rng, 10);
  RMatrix q(10, 3);
  for (Eigen::Index k = 0; k < 3; ++k) q.col(k) = oracle::random_real(rng, 10);
  EXPECT_NEAR(pmo_objective(g, FeatureLocations(q), RMatrix::Zero(3, 2), 1.5), 1.5 * 2, 1e-14);
}

TEST(PMOObjective, SingleOutputIsRegularizerOnly) {
  std::mt19937_64 rng(2);
  const Graph g = oracle::random_graph(rng, 10);
  RMatrix q(10, 2);
  for (Eigen::Index k = 0; k < 2; ++k) q.col(k) = oracle::random_real(rng, 10);
  const RMatrix t = (RMatrix(2, 1) << 0.7, -0.4).finished();
  const RVector f = q * t;
  const double inf = oracle::derivative(g, f).cwiseAbs().rowwise().sum().maxCoeff();
  EXPECT_NEAR(pmo_objective(g, FeatureLocations(q), t, 2.0), 2.0 * (inf - 1) * (inf - 1), 1e-12);
}

TEST(PMOObjective, GridMatchesBruteForce) {
  const auto [graph, xy] = grid_graph(6, 6);
  const RMatrix q = correlated_grid_features(xy);
  const RMatrix id = RMatrix::Identity(2, 2);
  const double got = pmo_objective(graph, FeatureLocations(q), id, 1.0);
  const double want = dense_objective(graph, q, id, 1.0);
  const PMOProblem problem(graph, FeatureLocations(q), 1.0);
  EXPECT_GT(problem.cross_mass(id), 0.0);
  EXPECT_NEAR(got, want, 1e-6 * want);
  EXPECT_NEAR(problem.cross_mass(id) + problem.regularizer(id), got, 1e-9 * got);
}

TEST(PMOObjective, PermutationInvariance) {
  std::mt19937_64 rng(3);
  const Graph g = oracle::random_graph(rng, 9);
  RMatrix q(9, 3);
  for (Eigen::Index k = 0; k < 3; ++k) q.col(k) = oracle::random_real(rng, 9);
  RMatrix t(3, 3);
  for (Eigen::Index k = 0; k < 3; ++k) t.col(k) = oracle::random_real(rng, 3);
  RMatrix perm = t;
  perm.col(0) = t.col(2);
  perm.col(2) = t.col(0);
  const FeatureLocations fq(q);
  EXPECT_NEAR(pmo_objective(g, fq, t, 1.0), pmo_objective(g, fq, perm, 1.0), 1e-9);
}

TEST(PMOGradient, SpectralMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  const Graph g = oracle::random_graph(rng, 10);
  RMatrix q(10, 2);
  for (Eigen::Index k = 0; k < 2; ++k) q.col(k) = oracle::random_real(rng, 10);
  const PMOProblem problem(g, FeatureLocations(q), 1.0);
  const RMatrix t = (RMatrix(2, 2) << 1.0, 0.3, -0.2, 0.8).finished();
  const RMatrix fd = problem.gradient_fd(t, 1e-5);
  const RMatrix sp = problem.gradient_spectral(t);
  EXPECT_LE((fd - sp).norm(), 1e-2 * fd.norm()) << fd << "\n" << sp;
  // step-size stability
  const RMatrix half = problem.gradient_fd(t, 5e-6);
  EXPECT_LE((fd - half).norm(), 1e-3 * fd.norm());
}

TEST(PMOFit, NearStationaryStart) {
  // Unit-scale single feature on a path: nothing to gain.
  const Graph g = oracle::path(6);
  RMatrix q(6, 1);
  q.col(0) = RVector::LinSpaced(6, 0.0, 2.5);  // ||grad||_inf = 2 * 0.5 = 1
  PMOConfig cfg;
  cfg.out_features = 1;
  cfg.max_iters = 200;
  const PMOResult r = pmo_fit(g, FeatureLocations(q), cfg);
  EXPECT_LE(std::abs(r.final_objective - r.initial_objective), 1e-6);
  EXPECT_LE(r.final_objective, r.initial_objective);
}

TEST(PMOFit, GridToy) {
  const auto [graph, xy] = grid_graph(12, 12);
  const FeatureLocations q(correlated_grid_features(xy));
  EXPECT_GT(centered_cosine(q.column(0), q.column(1)), 0.5);
  PMOConfig cfg;
  const PMOResult r = pmo_fit(graph, q, cfg);
  const PMOProblem problem(graph, q, cfg.lambda);
  const FeatureLocations f = problem.features(r.transform);
  EXPECT_LE(centered_cosine(f.column(0), f.column(1)), 0.1);
  const RMatrix id = RMatrix::Identity(2, 2);
  EXPECT_LE(problem.cross_mass(r.transform), 0.1 * problem.cross_mass(id));
  EXPECT_LE(r.final_deficiency, 0.1 * commuting_deficiency(graph, q));
  EXPECT_LE(r.final_objective, r.initial_objective);
  for (std::size_t k = 0; k < 2; ++k) {
    const double inf = oracle::derivative(graph, f.column(k)).cwiseAbs().rowwise().sum().maxCoeff();
    EXPECT_GE(inf, 0.5);
    EXPECT_LE(inf, 2.0);
  }
  ASSERT_FALSE(r.objective_trace.empty());
  EXPECT_TRUE(r.transform.allFinite());
}

TEST(PMOFit, Deterministic) {
  const auto [graph, xy] = grid_graph(5, 5);
  const FeatureLocations q(correlated_grid_features(xy));
  PMOConfig cfg;
  cfg.max_iters = 50;
  const PMOResult a = pmo_fit(graph, q, cfg);
  const PMOResult b = pmo_fit(graph, q, cfg);
  EXPECT_EQ(a.transform, b.transform);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(PMOConfig, Validation) {
  PMOConfig cfg;
  cfg.out_features = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.lambda = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
  const auto [graph, xy] = grid_graph(3, 3);
  PMOConfig wide;
  wide.out_features = 3;  // more outputs than inputs
  EXPECT_THROW(pmo_fit(graph, xy, wide), Error);
}

TEST(CenteredCosine, Examples) {
  const RVector a = (RVector(4) << 1, 2, 3, 4).finished();
  EXPECT_NEAR(centered_cosine(a, (2.0 * a).eval()), 1.0, 1e-15);
  EXPECT_NEAR(centered_cosine(a, (RVector(4) << 1, -1, -1, 1).finished()), 0.0, 1e-15);
}
