#include <gtest/gtest.h>

#include "oracle.hpp"
#include "schro/error.hpp"
#include "schro/observe.hpp"
#include "schro/operators.hpp"

using namespace schro;

namespace {

const Graph kP3 = oracle::path(3);
const RVector kF012 = (RVector(3) << 0, 1, 2).finished();

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

// <X g, g> for diagonal X = diag(f), straight from the definition.
double location_mean(const RVector& f, const CVector& g) { return (g.cwiseAbs2().array() * f.array()).sum(); }

double location_variance(const RVector& f, const CVector& g) {
  const double e = location_mean(f, g);
  return (g.cwiseAbs2().array() * (f.array() - e).square()).sum();
}

// Central difference of a scalar function of time.
template <class F>
double central(F&& fn, double h) {
  return (fn(h) - fn(-h)) / (2.0 * h);
}

bool close_rel(double got, double want, double rel, double abs_floor = 1e-8) {
  return std::abs(got - want) <= std::max(abs_floor, rel * std::abs(want));
}

}  // namespace

TEST(Mean, Examples) {
  const auto x = location_observable(kF012);
  EXPECT_DOUBLE_EQ(mean(x, CVector::Unit(3, 1)), 1.0);
  const CVector mix = (CVector::Unit(3, 0) + CVector::Unit(3, 2)) / std::sqrt(2.0);
  EXPECT_NEAR(mean(x, mix), 1.0, 1e-15);

  std::mt19937_64 rng(1);
  const Graph g = oracle::random_graph(rng, 10);
  const RVector f = oracle::random_real(rng, 10);
  const auto momentum = Complex(0.0, 1.0) * feature_derivative(g, f);
  const RVector real_g = oracle::random_real(rng, 10).normalized();
  EXPECT_LE(std::abs(mean(momentum, real_g.cast<Complex>())), 1e-12);
}

TEST(Mean, Errors) {
  const auto x = location_observable(kF012);
  EXPECT_EQ(code_of([&] { mean(x, CVector::Ones(3)); }), ErrorCode::Precondition);
  const auto d = feature_derivative(kP3, kF012);  // skew, not self-adjoint
  EXPECT_EQ(code_of([&] { mean(d, CVector::Unit(3, 0)); }), ErrorCode::Contract);
}

TEST(Variance, Examples) {
  const auto x = location_observable(kF012);
  EXPECT_EQ(variance(x, CVector::Unit(3, 2)), 0.0);
  const CVector mix = (CVector::Unit(3, 0) + CVector::Unit(3, 2)) / std::sqrt(2.0);
  EXPECT_NEAR(variance(x, mix), 1.0, 1e-15);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const RVector f = oracle::random_real(rng, 8);
    const CVector g = oracle::random_unit(rng, 8);
    const auto obs = location_observable(f);
    EXPECT_NEAR(variance(obs, g), variance_by_moments(obs, g), 1e-10);
    EXPECT_NEAR(variance(obs, g), location_variance(f, g), 1e-12);
  }
}

TEST(Routing, Examples) {
  std::mt19937_64 rng(3);
  const RVector f = oracle::random_real(rng, 9);
  const CVector g = oracle::random_unit(rng, 9);
  const auto x = location_observable(f);
  const double e = location_mean(f, g), v = location_variance(f, g);
  EXPECT_NEAR(routing_measure(x, g, g, e).measure, 1.0, 1e-12);
  const double c = 0.8;
  const RoutingReport rep = routing_measure(x, g, g, e + c);
  EXPECT_NEAR(rep.measure, 1.0 + c * c / v, 1e-12);
  EXPECT_DOUBLE_EQ(rep.target, e + c);
  EXPECT_NEAR(rep.initial_variance, v, 1e-14);
  EXPECT_NEAR(rep.final_mean, e, 1e-14);
  EXPECT_GE(rep.measure, 0.0);
  EXPECT_LE(routing_identity_worst_residual(), 1e-10);
}

TEST(Routing, PureInitialStateRejected) {
  const auto x = location_observable(kF012);
  const CVector e1 = CVector::Unit(3, 1);
  EXPECT_EQ(code_of([&] { routing_measure(x, e1, e1, 0.0); }), ErrorCode::Degenerate);
}

TEST(ModulatedMomentum, PathP3) {
  const RVector g = (RVector(3) << 1, 1, 0).finished() / std::sqrt(2.0);
  const double theta = M_PI / 2;
  // Direct <i grad D g, D g> from dense matrices.
  const CMatrix dmod = (Complex(0, 1) * theta * kF012.cast<Complex>()).array().exp().matrix().asDiagonal();
  const CVector dg = dmod * g.cast<Complex>();
  const CMatrix momentum = Complex(0, 1) * oracle::derivative(kP3, kF012).cast<Complex>();
  const double direct = oracle::expectation(momentum, dg).real();
  EXPECT_NEAR(direct, 1.0, 1e-15);
  EdgeSignals edges;
  EXPECT_NEAR(momentum_mean_modulated_closed_form(kP3, kF012, kF012, theta, g, &edges), direct, 1e-15);
  // The per-undirected-edge sum carries half of the ordered-pair total.
  EXPECT_NEAR(0.5 * edges.inner, 0.5, 1e-15);
}

TEST(ModulatedMomentum, TrivialCases) {
  std::mt19937_64 rng(4);
  const Graph graph = oracle::random_graph(rng, 10);
  const RVector f = oracle::random_real(rng, 10), h = oracle::random_real(rng, 10);
  const RVector g = oracle::random_real(rng, 10).normalized();
  EXPECT_EQ(momentum_mean_modulated_closed_form(graph, f, h, 0.0, g), 0.0);
  EXPECT_EQ(momentum_mean_modulated_closed_form(graph, f, RVector::Constant(10, 0.4), 2.0, g), 0.0);
  for (int i = 0; i < 20; ++i) {
    const double theta = -5.0 + 0.5 * i;
    const CVector dg = modulation(h, theta).apply(CVector(g.cast<Complex>()));
    const CMatrix momentum = Complex(0, 1) * oracle::derivative(graph, f).cast<Complex>();
    EXPECT_NEAR(momentum_mean_modulated_closed_form(graph, f, h, theta, g), oracle::expectation(momentum, dg).real(),
                1e-10);
  }
}

TEST(Dynamics, SingleFeature) {
  std::mt19937_64 rng(5);
  const Graph graph = oracle::random_graph(rng, 10);
  const RVector f = oracle::random_real(rng, 10);
  EXPECT_NEAR(dynamics_rhs_single(graph, f, oracle::random_real(rng, 10).normalized().cast<Complex>()), 0.0, 1e-14);
  EXPECT_EQ(dynamics_rhs_single(graph, RVector::Constant(10, 1.0), oracle::random_unit(rng, 10)), 0.0);
  for (int i = 0; i < 10; ++i) {
    const CVector g = oracle::random_unit(rng, 10);
    const RMatrix lap = oracle::laplacian(graph, f);
    const double fd = central([&](double t) { return location_mean(f, oracle::schrodinger(lap, t) * g); }, 1e-5);
    EXPECT_TRUE(close_rel(dynamics_rhs_single(graph, f, g), fd, 1e-4)) << dynamics_rhs_single(graph, f, g) << " vs " << fd;
  }
}

TEST(Dynamics, MultiFeature) {
  std::mt19937_64 rng(6);
  const Graph graph = oracle::random_graph(rng, 10);
  RMatrix f(10, 3);
  for (Eigen::Index k = 0; k < 3; ++k) f.col(k) = oracle::random_real(rng, 10);
  const CVector g = oracle::random_unit(rng, 10);

  EXPECT_NEAR(dynamics_rhs_multi(graph, FeatureLocations(RMatrix(f.col(0))), 0, g),
              dynamics_rhs_single(graph, f.col(0), g), 1e-14);
  RMatrix fc = f;
  fc.col(1).setConstant(2.0);
  fc.col(2).setConstant(-1.0);
  EXPECT_NEAR(dynamics_rhs_multi(graph, FeatureLocations(fc), 0, g), dynamics_rhs_single(graph, f.col(0), g), 1e-12);

  const RMatrix lap = oracle::laplacian(graph, f);
  for (std::size_t k = 0; k < 3; ++k) {
    const RVector fk = f.col(static_cast<Eigen::Index>(k));
    const double fd = central([&](double t) { return location_mean(fk, oracle::schrodinger(lap, t) * g); }, 1e-5);
    EXPECT_TRUE(close_rel(dynamics_rhs_multi(graph, FeatureLocations(f), k, g), fd, 1e-4));
  }
}

TEST(Dynamics, Variance) {
  std::mt19937_64 rng(7);
  const Graph graph = oracle::random_graph(rng, 10);
  const RVector f = oracle::random_real(rng, 10);
  EXPECT_NEAR(variance_rhs(graph, f, oracle::random_real(rng, 10).normalized().cast<Complex>()), 0.0, 1e-13);
  EXPECT_EQ(variance_rhs(graph, RVector::Constant(10, 3.0), oracle::random_unit(rng, 10)), 0.0);
  const RMatrix lap = oracle::laplacian(graph, f);
  for (int i = 0; i < 10; ++i) {
    const CVector g = oracle::random_unit(rng, 10);
    const double fd = central([&](double t) { return location_variance(f, oracle::schrodinger(lap, t) * g); }, 1e-5);
    EXPECT_TRUE(close_rel(variance_rhs(graph, f, g), fd, 1e-4));
  }
}

TEST(Regularity, Examples) {
  const Graph two(2, {{0, 1, 1.0}});
  const RVector f = (RVector(2) << 0, 1).finished();
  const CVector g = CVector::Ones(2) / std::sqrt(2.0);
  EXPECT_NEAR(epsilon_regularity(two, f, g), 0.0, 1e-15);
  EXPECT_NEAR(epsilon_regularity(two, RVector::Constant(2, 5.0), g), 1.0, 1e-15);
}

TEST(Regularity, SingleFeatureDeviationBound) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Graph graph = oracle::random_graph(rng, 10);
    const RVector f = oracle::random_real(rng, 10);
    const CVector g = oracle::random_unit(rng, 10);
    const CMatrix momentum = Complex(0, 1) * oracle::derivative(graph, f).cast<Complex>();
    const double lhs = std::abs(dynamics_rhs_single(graph, f, g) - 2.0 * oracle::expectation(momentum, g).real());
    const double eps = (oracle::smoothing(graph, f).cast<Complex>() * g - g).norm();
    EXPECT_NEAR(epsilon_regularity(graph, f, g), eps, 1e-12);
    EXPECT_LE(lhs, 2.0 * eps * oracle::spectral_norm(momentum) + 1e-9);
  }
}

TEST(Deficiency, Examples) {
  std::mt19937_64 rng(9);
  const Graph graph = oracle::random_graph(rng, 10);
  EXPECT_EQ(commuting_deficiency(graph, FeatureLocations(RMatrix(oracle::random_real(rng, 10)))), 0.0);
  EXPECT_EQ(commuting_deficiency(graph, FeatureLocations(RMatrix::Constant(10, 3, 0.5))), 0.0);

  RMatrix f(10, 3);
  for (Eigen::Index k = 0; k < 3; ++k) f.col(k) = oracle::random_real(rng, 10);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (i == j) continue;
      const RMatrix d = oracle::derivative(graph, f.col(j));
      const RMatrix x = f.col(i).asDiagonal();
      const RMatrix c = d * d * x - x * d * d;
      expected = std::max(expected, oracle::spectral_norm(c.cast<Complex>()));
    }
  }
  EXPECT_NEAR(commuting_deficiency(graph, FeatureLocations(f)), expected, 1e-6 * expected);
}

TEST(MixedDerivative, ConstantModulationIsZero) {
  std::mt19937_64 rng(10);
  const Graph graph = oracle::random_graph(rng, 10);
  const RVector f = oracle::random_real(rng, 10);
  const CVector g = oracle::random_real(rng, 10).normalized().cast<Complex>();
  EXPECT_EQ(mixed_derivative_rhs(graph, f, RVector::Constant(10, 0.3), g, 0.7), 0.0);
}

TEST(MixedDerivative, NestedFiniteDifference) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5; ++i) {
    const Graph graph = oracle::random_graph(rng, 8);
    const RVector f = oracle::random_real(rng, 8), h = oracle::random_real(rng, 8);
    const CVector g = oracle::random_real(rng, 8).normalized().cast<Complex>();
    const double r = 1.0;
    const RMatrix lap = oracle::laplacian(graph, f);
    const double v0 = location_variance(f, g);
    const auto p = [&](double t, double theta) {
      CVector gt = (Complex(0, 1) * theta * h.cast<Complex>()).array().exp().matrix().cwiseProduct(g);
      gt = oracle::schrodinger(lap, t) * gt;
      return (gt.cwiseAbs2().array() * (f.array() - r).square()).sum() / v0;
    };
    const double s = 1e-4;
    const double fd = (p(s, s) - p(s, -s) - p(-s, s) + p(-s, -s)) / (4.0 * s * s);
    const double got = mixed_derivative_rhs(graph, f, h, g, r);
    EXPECT_TRUE(close_rel(got, fd, 1e-3)) << got << " vs " << fd;
  }
}

TEST(Sensitivity, Examples) {
  std::mt19937_64 rng(12);
  const CVector g = oracle::random_unit(rng, 9);
  EXPECT_NEAR(sensitivity_probe([](const CVector& x) { return x; }, g), 1.0, 1e-12);
  EXPECT_NEAR(sensitivity_probe([](const CVector& x) { return CVector(3.0 * x); }, g), 1.0, 1e-12);
  const Graph graph = oracle::random_graph(rng, 9);
  const RVector f = oracle::random_real(rng, 9);
  const CMatrix s = oracle::schrodinger(oracle::laplacian(graph, f), 0.6);
  const auto d = modulation(f, 1.7);
  EXPECT_NEAR(sensitivity_probe([&](const CVector& x) { return CVector(s * d.apply(x)); }, g), 1.0, 1e-10);
  EXPECT_EQ(code_of([&] { sensitivity_probe([](const CVector& x) { return CVector(CVector::Zero(x.size())); }, g); }),
            ErrorCode::Degenerate);
}

TEST(Inner, Convention) {
  const CVector a = (CVector(2) << Complex(1, 1), Complex(0, 0)).finished();
  const CVector b = (CVector(2) << Complex(0, 1), Complex(2, 0)).finished();
  // sum a conj(b) = (1+i)(-i) = 1 - i
  EXPECT_EQ(inner(a, b), Complex(1, -1));
}
