#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "schro/error.hpp"
#include "schro/graph.hpp"

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

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("schro_test_" + name);
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(Graph, LoadsSmallPath) {
  const auto path = temp_file("p3.tsv", "#nodes=3\n0\t1\t1.0\n1\t2\t1.0\n");
  const Graph g = load_graph(path);
  EXPECT_EQ(g.n_nodes(), 3u);
  EXPECT_EQ(g.n_edges(), 2u);
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.weight(1, 0), 1.0);
  EXPECT_EQ(g.weight(0, 2), 0.0);
}

TEST(Graph, RejectsSelfLoop) {
  EXPECT_EQ(code_of([] { parse_graph("#nodes=3\n2\t2\t1.0\n"); }), ErrorCode::Format);
}

TEST(Graph, RejectsConflictingDuplicate) {
  EXPECT_EQ(code_of([] { parse_graph("#nodes=3\n0\t1\t1.0\n1\t0\t2.0\n"); }), ErrorCode::Format);
}

TEST(Graph, ParseErrorNamesLine) {
  try {
    parse_graph("#nodes=3\n0\t1\t1.0\n0\tx\t1.0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(Graph, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_graph("/nonexistent/graph.tsv"); }), ErrorCode::Io);
}

TEST(Graph, ClusterGraphRoundTripsBitExactly) {
  const auto inst = cluster_graph(kPinnedClusterSeed);
  const Graph back = parse_graph(format_graph(inst.graph));
  ASSERT_EQ(back.n_nodes(), inst.graph.n_nodes());
  ASSERT_EQ(back.n_edges(), inst.graph.n_edges());
  for (std::size_t i = 0; i < back.n_edges(); ++i) EXPECT_EQ(back.edges()[i], inst.graph.edges()[i]);
}

TEST(Graph, SignalAndFeatureFilesRoundTrip) {
  std::mt19937_64 rng(3);
  CMatrix v(7, 2);
  v.col(0) = oracle::random_unit(rng, 7);
  v.col(1) = oracle::random_unit(rng, 7);
  const Signal s(v);
  const auto sp = temp_file("sig.csv", format_signal(s));
  EXPECT_EQ(load_signal(sp).values(), v);

  RMatrix f(7, 3);
  for (Eigen::Index k = 0; k < 3; ++k) f.col(k) = oracle::random_real(rng, 7);
  const auto fp = temp_file("feat.csv", format_features(FeatureLocations(f)));
  EXPECT_EQ(load_features(fp).values(), f);
}

TEST(Signal, NormalizeChannel) {
  CMatrix v(3, 2);
  v << 2, 5, 0, 0, 0, 0;
  const Signal out = normalize_channel(Signal(v), 0);
  EXPECT_EQ(out.values()(0, 0), Complex(1.0, 0.0));
  EXPECT_EQ(out.values()(0, 1), Complex(5.0, 0.0));  // other channel untouched
  EXPECT_EQ(code_of([] { normalize_channel(Signal(CMatrix::Zero(3, 1)), 0); }), ErrorCode::Degenerate);
}

TEST(Signal, NormalizeRandomAndIdempotent) {
  std::mt19937_64 rng(11);
  const CVector g = 3.7 * oracle::random_unit(rng, 10);
  const Signal once = normalize_channel(Signal::from_channel(g), 0);
  EXPECT_NEAR(once.channel(0).norm(), 1.0, 1e-12);
  const Signal twice = normalize_channel(once, 0);
  EXPECT_LE(oracle::max_abs(twice.values() - once.values()), 1e-12);
}

TEST(Signal, RejectsNonFinite) {
  CMatrix v = CMatrix::Zero(2, 1);
  v(1, 0) = Complex(std::nan(""), 0.0);
  EXPECT_THROW(Signal{v}, Error);
}

TEST(Generators, ClusterGraph) {
  for (const std::uint64_t seed : {1u, 2u, 7u}) {
    const auto inst = cluster_graph(seed);
    EXPECT_EQ(inst.graph.n_nodes(), 60u);
    EXPECT_TRUE(inst.graph.is_connected());
    for (const auto& e : inst.graph.edges()) EXPECT_EQ(e.w, 1.0);
    EXPECT_NEAR(inst.signal.channel(0).norm(), 1.0, 1e-12);
    EXPECT_GE(inst.signal.values().real().minCoeff(), 0.0);
  }
}

TEST(Generators, PinnedSeedMean) {
  const auto inst = cluster_graph(kPinnedClusterSeed);
  const CVector g = inst.signal.channel(0);
  const double e = (g.cwiseAbs2().array() * inst.features.column(0).array()).sum();
  EXPECT_GE(e, -1.1);
  EXPECT_LE(e, -0.9);
}

TEST(Generators, Ring) {
  const auto [g, f] = ring_graph(100);
  EXPECT_EQ(g.n_edges(), 100u);
  for (std::size_t v = 0; v < 100; ++v) EXPECT_EQ(g.degree(v), 2u);
  EXPECT_EQ(f.n_features(), 3u);
  EXPECT_DOUBLE_EQ(f.values()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(f.values()(0, 2), -M_PI);

  const auto [tri, tf] = ring_graph(3);
  EXPECT_EQ(tri.n_edges(), 3u);
  EXPECT_EQ(tri.weight(0, 2), 1.0);
  EXPECT_EQ(code_of([] { ring_graph(2); }), ErrorCode::Argument);
}

TEST(Generators, Grid) {
  const auto [g, f] = grid_graph(3, 4);
  EXPECT_EQ(g.n_nodes(), 12u);
  EXPECT_EQ(g.n_edges(), 3u * 3u + 2u * 4u);
  EXPECT_EQ(f.n_features(), 2u);
}
