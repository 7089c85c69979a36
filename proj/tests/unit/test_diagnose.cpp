#include <gtest/gtest.h>

#include "oracle.hpp"
#include "schro/diagnose.hpp"
#include "schro/error.hpp"
#include "schro/filter.hpp"
#include "schro/observe.hpp"

using namespace schro;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

}  // namespace

TEST(Windows, TwoBinsAreComplementaryRamps) {
  const FeatureLocations f(RMatrix(RVector::LinSpaced(11, 0.0, 1.0)));
  const WindowSet ws = build_windows(f, 0, 2);
  const auto& w = ws.axes[0].weights;
  ASSERT_EQ(w.size(), 2u);
  EXPECT_LE(((w[0] + w[1]).array() - 1.0).abs().maxCoeff(), 1e-15);
  for (Eigen::Index v = 1; v < 11; ++v) EXPECT_LE(w[0](v), w[0](v - 1));  // ramp down
  EXPECT_EQ(ws.partition_defect(), 0.0);
}

TEST(Windows, NodeAtCentreIsApex) {
  // Values 0..8: quantile centres at 1, 3, 5, 7.
  const RVector x = RVector::LinSpaced(9, 0.0, 8.0);
  const WindowSet ws = build_windows(FeatureLocations(RMatrix(x)), 0, 4);
  const auto& axis = ws.axes[0];
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_NEAR(axis.centers[b], 8.0 * (b + 0.5) / 4.0, 1e-12);
  }
  // centre of window 1 is 3.0, a node
  EXPECT_NEAR(axis.weights[1](3), 1.0, 1e-15);
  EXPECT_NEAR(axis.weights[0](3) + axis.weights[2](3) + axis.weights[3](3), 0.0, 1e-15);
}

TEST(Windows, RingAngleQuarters) {
  const auto [g, f] = ring_graph(100);
  const WindowSet ws = build_windows(f, 2, 4);
  for (const auto& w : ws.axes[0].weights) {
    EXPECT_NEAR(w.sum(), 25.0, 5.0);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_LE(w.maxCoeff(), 1.0);
  }
  EXPECT_LE(ws.partition_defect(), 1e-10);
}

TEST(Windows, ProductWindows) {
  std::mt19937_64 rng(1);
  RMatrix f(30, 2);
  f.col(0) = oracle::random_real(rng, 30);
  f.col(1) = oracle::random_real(rng, 30);
  const std::size_t coords[] = {0, 1};
  const WindowSet ws = build_windows(FeatureLocations(f), coords, 3);
  const auto windows = ws.windows();
  ASSERT_EQ(windows.size(), 9u);
  EXPECT_EQ(windows[5].id, "1_2");
  RVector total = RVector::Zero(30);
  for (const auto& w : windows) total += w.weight;
  EXPECT_LE((total.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Windows, Errors) {
  const FeatureLocations flat(RMatrix::Constant(5, 1, 2.0));
  EXPECT_EQ(code_of([&] { build_windows(flat, 0, 4); }), ErrorCode::Degenerate);
  const FeatureLocations f(RMatrix(RVector::LinSpaced(5, 0, 1)));
  EXPECT_EQ(code_of([&] { build_windows(f, 0, 1); }), ErrorCode::Argument);
}

TEST(WindowSignal, Examples) {
  std::mt19937_64 rng(2);
  const CVector g = 2.0 * oracle::random_unit(rng, 12);
  EXPECT_LE((window_signal(g, RVector::Ones(12)) - g / g.norm()).norm(), 1e-15);
  EXPECT_EQ(code_of([&] { window_signal(g, RVector::Zero(12)); }), ErrorCode::Degenerate);

  const WindowSet ws = build_windows(FeatureLocations(RMatrix(oracle::random_real(rng, 12))), 0, 4);
  double total = 0.0;
  for (const auto& w : ws.axes[0].weights) total += (w.cwiseSqrt().cast<Complex>().cwiseProduct(g)).squaredNorm();
  EXPECT_NEAR(total, g.squaredNorm(), 1e-10);
}

TEST(RelativeShift, IdentityAndModulationAreStatic) {
  std::mt19937_64 rng(3);
  RMatrix f(20, 2);
  f.col(0) = oracle::random_real(rng, 20);
  f.col(1) = oracle::random_real(rng, 20);
  const FeatureLocations fl(f);
  const Signal g = Signal::from_channel(oracle::random_unit(rng, 20));
  const WindowSet ws = build_windows(fl, 0, 4);
  const ShiftReport id = relative_shift([](const CMatrix& x) { return x; }, g, fl, ws);
  ASSERT_TRUE(id.mean.has_value());
  for (const auto& e : id.entries) EXPECT_NEAR(*e.shift, 0.0, 1e-14);
  const auto d = modulation(f.col(1), 2.3);
  const ShiftReport mod = relative_shift([&](const CMatrix& x) { return d.apply(x); }, g, fl, ws);
  for (const auto& e : mod.entries) EXPECT_NEAR(*e.shift, 0.0, 1e-14);
}

TEST(RelativeShift, ScaleInvarianceAndFullWindow) {
  std::mt19937_64 rng(4);
  const Graph graph = oracle::random_graph(rng, 15);
  const RVector f = oracle::random_real(rng, 15);
  const FeatureLocations fl{RMatrix(f)};
  const CMatrix s = oracle::schrodinger(oracle::laplacian(graph, f), 0.9);
  const Signal g = Signal::from_channel(oracle::random_unit(rng, 15));
  const WindowSet ws = build_windows(fl, 0, 3);
  const ShiftReport a = relative_shift([&](const CMatrix& x) { return CMatrix(s * x); }, g, fl, ws);
  const ShiftReport b = relative_shift([&](const CMatrix& x) { return CMatrix(4.0 * s * x); }, g, fl, ws);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_NEAR(*a.entries[i].shift, *b.entries[i].shift, 1e-12);

  // full-support window: shift is the plain change of E_X over the population std
  WindowSet full;
  full.axes.push_back({0, {0.0}, {RVector::Ones(15)}});
  const ShiftReport r = relative_shift([&](const CMatrix& x) { return CMatrix(s * x); }, g, fl, full);
  const CVector in = g.channel(0);
  const CVector out = s * in;
  const double mean_f = f.mean();
  const double sd = std::sqrt((f.array() - mean_f).square().mean());
  const double want = ((out.cwiseAbs2().array() * f.array()).sum() - (in.cwiseAbs2().array() * f.array()).sum()) / sd;
  EXPECT_NEAR(*r.entries[0].shift, want, 1e-12);
}

TEST(RelativeShift, ZeroOutputWindowIsMissing) {
  std::mt19937_64 rng(5);
  const RVector f = oracle::random_real(rng, 10);
  const FeatureLocations fl{RMatrix(f)};
  const Signal g = Signal::from_channel(oracle::random_unit(rng, 10));
  const WindowSet ws = build_windows(fl, 0, 2);
  const ShiftReport r = relative_shift([](const CMatrix& x) { return CMatrix(CMatrix::Zero(x.rows(), x.cols())); }, g, fl, ws);
  EXPECT_EQ(r.missing, 2u);
  EXPECT_FALSE(r.mean.has_value());
  const std::string csv = format_shift_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "window_id,coordinate,shift,pre_mean,post_mean,pre_variance,post_variance");
  EXPECT_NE(csv.find("missing"), std::string::npos);
}

TEST(RelativeShift, TwoClusterOptimumMovesTowardTarget) {
  const auto inst = cluster_graph(kPinnedClusterSeed);
  const RVector f = inst.features.column(0);
  const CVector g0 = inst.signal.channel(0);
  const RMatrix lap = oracle::laplacian(inst.graph, f);
  // Locate the sweep optimum with the oracle exponential (t = 3 x 0.1).
  const CMatrix s = oracle::schrodinger(lap, 0.3);
  const auto routing = [&](double theta) {
    const CVector d = (Complex(0, 1) * theta * f.cast<Complex>()).array().exp().matrix();
    const CVector gt = s * d.cwiseProduct(g0);
    return (gt.cwiseAbs2().array() * (f.array() - 1.0).square()).sum();
  };
  double best = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double theta = -5.0 + 0.1 * i;
    if (routing(theta) < routing(best)) best = theta;
  }
  const CVector d = (Complex(0, 1) * best * f.cast<Complex>()).array().exp().matrix();
  const WindowSet ws = build_windows(inst.features, 0, 4);
  const ShiftReport r =
      relative_shift([&](const CMatrix& x) { return CMatrix(s * (d.asDiagonal() * x)); }, inst.signal, inst.features, ws);
  ASSERT_TRUE(r.mean.has_value());
  const double e0 = (g0.cwiseAbs2().array() * f.array()).sum();
  EXPECT_GT(*r.mean * (1.0 - e0), 0.0);  // sign(r - E_X(g0))
}

TEST(EnergyMoments, MultiChannel) {
  CMatrix g(3, 2);
  g << 1, 0, 0, 1, 0, 1;
  const RVector f = (RVector(3) << 0, 1, 2).finished();
  const auto [m, v] = energy_moments(g, f);
  EXPECT_NEAR(m, 1.0, 1e-15);
  EXPECT_NEAR(v, 2.0 / 3.0, 1e-15);
}
