#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "schro/graph.hpp"
#include "schro/operators.hpp"
#include "schro/propagate.hpp"

namespace schro {

/// One term of a filter: S[t, f] D[theta (f . direction)] g W.
struct FilterTerm {
  double t = 0.0;
  double theta = 0.0;
  RVector direction;  // K
  CMatrix mix;        // J x D
};

struct FilterParams {
  std::vector<FilterTerm> terms;

  std::size_t n_terms() const noexcept { return terms.size(); }
  std::size_t n_directions() const;  // K
  std::size_t n_in() const;          // J
  std::size_t n_out() const;         // D

  /// Throws Error(Contract) unless M >= 1, shapes agree across terms and
  /// everything is finite.
  void validate() const;

  /// Complex entries count twice.
  std::size_t real_parameter_count() const;

  /// Per term: t, theta, direction, then mix as (re, im) in column-major order.
  RVector flatten() const;
  /// Inverse of flatten using `shape` for dimensions.
  static FilterParams unflatten(const RVector& flat, const FilterParams& shape);

  /// Single identity term (t = 0, theta = 0, W = I_J).
  static FilterParams identity(std::size_t k, std::size_t j);
};

struct InputModulationParams {
  RMatrix amp_map;    // B, d_in x d
  RMatrix phase_map;  // P, d_in x d

  void validate() const;
};

enum class Activation { SplitRelu, Modulus, None };

std::string to_string(Activation a);
/// "split-relu", "modulus" or "none"; Error(Config) otherwise.
Activation parse_activation(const std::string& name);

struct LayerConfig {
  Activation activation = Activation::SplitRelu;
  EvolutionConfig evolution;
};

/// sum_m S[t_m, f] D[theta_m f T^(m)] g W^(m). The Laplacian and the
/// modulation both use all columns of f.
Signal schrodinger_filter(const Graph& graph, const FeatureLocations& f, const FilterParams& params,
                          const Signal& g, const EvolutionConfig& cfg = {});

/// Same filter with a prebuilt propagator; modulation directions act on
/// `modulation_basis` (N x K), which may differ from the Laplacian's features.
/// Terms are accumulated in ascending m.
CMatrix schrodinger_filter(const Propagator& propagator, const FeatureLocations& modulation_basis,
                           const FilterParams& params, const CMatrix& g);

/// activation(schrodinger_filter(...)).
Signal schrodinger_layer(const Graph& graph, const FeatureLocations& f, const FilterParams& params,
                         const Signal& g, const LayerConfig& cfg);

/// (qB) .* exp(i qP), entrywise.
Signal input_modulation(const FeatureLocations& q, const InputModulationParams& p);

Signal activation(const Signal& g, Activation kind);
CMatrix activation(const CMatrix& g, Activation kind);

/// n draws from Uniform[0, 1.5), deterministic in seed.
std::vector<double> init_times(std::size_t n, std::uint64_t seed);

/// Central finite-difference gradient of a scalar loss.
RVector fd_gradient(const std::function<double(const RVector&)>& loss, const RVector& x,
                    double step = 1e-6);

}  // namespace schro
