#pragma once

#include <cstdint>
#include <random>

#include "schro/graph.hpp"

namespace schro::tools {

using Rng = std::mt19937_64;

/// Connected random graph: a shuffled spanning path plus Bernoulli edges
/// targeting the given mean degree. Weights uniform in [0.5, 1.5].
Graph random_graph(Rng& rng, std::size_t n, double mean_degree = 4.0);

/// N x K features uniform in [-1, 1].
FeatureLocations random_features(Rng& rng, std::size_t n, std::size_t k);

/// Unit-norm signals.
CVector random_complex_unit(Rng& rng, std::size_t n);
RVector random_real_unit(Rng& rng, std::size_t n);

struct Instance {
  Graph graph;
  FeatureLocations f;
  CVector g;
};

/// n uniform in [n_min, n_max], k uniform in [k_min, k_max].
Instance random_instance(Rng& rng, std::size_t n_min, std::size_t n_max, std::size_t k_min,
                         std::size_t k_max);

double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive

}  // namespace schro::tools
