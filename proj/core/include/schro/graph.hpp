#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace schro {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Channels whose L2 norm is at or below this are treated as degenerate.
inline constexpr double kNormFloor = 1e-12;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double w = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph without self-loops. Each undirected edge is
/// stored once with u < v; adjacency() is the symmetric N x N matrix.
class Graph {
 public:
  Graph() = default;
  /// Edges may be given in either orientation; they are stored with u < v.
  /// Throws Error(Format) on self-loops, duplicate pairs, out-of-range
  /// indices or non-finite weights.
  Graph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// a(n, m); zero when there is no edge.
  double weight(std::size_t n, std::size_t m) const;
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& adjacency() const noexcept {
    return adjacency_;
  }
  std::size_t degree(std::size_t n) const;
  bool is_connected() const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> adjacency_;
};

/// N x J complex node signal with finite entries.
class Signal {
 public:
  Signal() = default;
  explicit Signal(CMatrix values);
  /// Single-channel signal.
  static Signal from_channel(const CVector& channel);
  static Signal from_real(const RMatrix& values);

  std::size_t n_nodes() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_channels() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const CMatrix& values() const noexcept { return values_; }
  CVector channel(std::size_t j) const;

 private:
  CMatrix values_;
};

/// N x K real feature locations (formal coordinates).
class FeatureLocations {
 public:
  FeatureLocations() = default;
  explicit FeatureLocations(RMatrix values);

  std::size_t n_nodes() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_features() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const RMatrix& values() const noexcept { return values_; }
  RVector column(std::size_t k) const;
  /// Sub-selection of columns, in the given order.
  FeatureLocations select(std::span<const std::size_t> columns) const;

 private:
  RMatrix values_;
};

/// Returns g with channel j rescaled to unit L2 norm.
Signal normalize_channel(const Signal& g, std::size_t j);
/// Unit-norm copy of a single channel; throws Error(Degenerate) at or below kNormFloor.
CVector normalized(const CVector& g);

// ---- generators ------------------------------------------------------------

struct ClusterInstance {
  Graph graph;
  FeatureLocations features;  // x coordinate
  Signal signal;              // nonnegative, unit norm, left cluster
  RMatrix positions;          // N x 2 sampled points
};

/// Seed used by the two-cluster experiment; its E_X(g) lies in [-1.1, -0.9].
inline constexpr std::uint64_t kPinnedClusterSeed = 7;

/// Two Gaussian clouds of 30 nodes each around (-1, 0) and (1, 0), std 0.5,
/// unit edges below distance 1.5. Resamples (up to 100 draws) until connected.
ClusterInstance cluster_graph(std::uint64_t seed);

/// Cycle on n nodes. Features: cos(angle), sin(angle), angle with
/// angle_n = -pi + 2 pi n / N.
std::tuple<Graph, FeatureLocations> ring_graph(std::size_t n);

/// rows x cols 4-neighbour grid; features are the (x, y) integer coordinates.
std::tuple<Graph, FeatureLocations> grid_graph(std::size_t rows, std::size_t cols);

// ---- file I/O --------------------------------------------------------------

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& graph, const std::filesystem::path& path);
Graph parse_graph(const std::string& text);
std::string format_graph(const Graph& graph);

Signal load_signal(const std::filesystem::path& path);
std::string format_signal(const Signal& signal);
void save_signal(const Signal& signal, const std::filesystem::path& path);

FeatureLocations load_features(const std::filesystem::path& path);
std::string format_features(const FeatureLocations& features);
void save_features(const FeatureLocations& features, const std::filesystem::path& path);

}  // namespace schro
