#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "schro/filter.hpp"
#include "schro/graph.hpp"
#include "schro/pmo.hpp"
#include "schro/propagate.hpp"

namespace schro::tools {

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Everything a command writes: summary.json plus named text files.
struct ExperimentOutput {
  std::string command;
  nlohmann::json config;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<Assertion> assertions;
  std::vector<std::pair<std::string, std::string>> files;

  bool passed() const;
  void check(const std::string& name, bool ok, const std::string& detail);
  nlohmann::json summary() const;
  /// Creates `dir` and writes summary.json and every file.
  void write(const std::filesystem::path& dir) const;
};

// ---- verify ----------------------------------------------------------------------

struct VerifyConfig {
  std::uint64_t seed = 42;
  std::string filter;  // substring of suite names; empty runs all

  static VerifyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Throws Error(Config) listing the available suites when the filter matches none.
ExperimentOutput run_verify(const VerifyConfig& cfg);

// ---- clusters --------------------------------------------------------------------

struct ClustersConfig {
  std::uint64_t seed = kPinnedClusterSeed;
  double theta_min = -5.0;
  double theta_max = 5.0;
  int theta_points = 101;
  double time = 0.1;
  int repeats = 3;
  double target = 1.0;
  EvolutionConfig evolution;

  static ClustersConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentOutput run_clusters(const ClustersConfig& cfg);

// ---- pmo-grid --------------------------------------------------------------------

struct PmoGridConfig {
  std::size_t rows = 12;
  std::size_t cols = 12;
  PMOConfig pmo;

  static PmoGridConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentOutput run_pmo_grid(const PmoGridConfig& cfg);

// ---- ring ------------------------------------------------------------------------

struct RingConfig {
  std::size_t nodes = 100;
  int shift = 35;
  std::size_t samples = 100;  // split 80/10/10
  double var_min = 0.5;
  double var_max = 1.5;
  double noise = 1e-3;
  std::size_t channels = 4;  // filter terms per model
  int iterations = 150;
  double learning_rate = 0.02;
  std::size_t batch = 32;
  double fd_step = 1e-5;
  std::uint64_t seed = 0;
  std::size_t bins = 4;
  double min_energy_fraction = 0.05;
  double probe_variance = 0.5;
  EvolutionConfig evolution{15, 1.0, EvolutionMethod::DenseOracle};

  static RingConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Columns are unit-norm samples; targets are the inputs rolled by `shift`.
struct RingData {
  RMatrix train_x, train_y, val_x, val_y, test_x, test_y;
};

RingData make_ring_data(const RingConfig& cfg);

enum class RingModelKind { Modulated, Unmodulated, Diffusion };
std::string to_string(RingModelKind kind);

/// Fixed ring operators shared by all models: the Schrodinger propagator over
/// the (cos, sin) features, the (cos, sin, angle) modulation basis, and the
/// heat semigroup of the combinatorial Laplacian.
class RingProblem {
 public:
  explicit RingProblem(const RingConfig& cfg);

  std::size_t n_nodes() const noexcept { return n_; }
  const Graph& graph() const noexcept { return graph_; }
  const FeatureLocations& features() const noexcept { return features_; }

  /// |model(x)| column-wise. Diffusion models read t and Re(mix) from params.
  RMatrix predict(RingModelKind kind, const FilterParams& params, const CMatrix& x) const;
  /// Mean squared error per entry.
  double mse(RingModelKind kind, const FilterParams& params, const RMatrix& x, const RMatrix& y) const;

 private:
  std::size_t n_;
  Graph graph_;
  FeatureLocations features_;
  FeatureLocations modulation_basis_;
  std::unique_ptr<Propagator> schrodinger_;
  std::unique_ptr<HeatPropagator> heat_;
};

struct RingFit {
  FilterParams params;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double test_mse = 0.0;
  std::vector<std::pair<int, double>> trace;  // (iteration, minibatch loss)
};

RingFit fit_ring_model(const RingProblem& problem, const RingData& data, RingModelKind kind,
                       const RingConfig& cfg);

ExperimentOutput run_ring(const RingConfig& cfg);

// ---- diagnose --------------------------------------------------------------------

struct DiagnoseConfig {
  std::filesystem::path graph;
  std::filesystem::path features;
  std::filesystem::path signal;
  std::filesystem::path params;
  std::vector<std::size_t> coordinates{0};
  std::vector<std::size_t> laplacian_columns;  // empty: all feature columns
  std::size_t bins = 4;
  Activation activation = Activation::None;
  double min_energy_fraction = 0.0;
  EvolutionConfig evolution;

  /// Relative paths are resolved against base_dir.
  static DiagnoseConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;
};

ExperimentOutput run_diagnose(const DiagnoseConfig& cfg);

}  // namespace schro::tools
