#include "schro_tools/instances.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

namespace schro::tools {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Graph random_graph(Rng& rng, std::size_t n, double mean_degree) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<Edge> edges;
  const auto add = [&](std::size_t a, std::size_t b) {
    const auto key = std::minmax(a, b);
    if (a == b || !seen.insert({key.first, key.second}).second) return;
    edges.push_back({key.first, key.second, uniform(rng, 0.5, 1.5)});
  };
  for (std::size_t i = 1; i < n; ++i) add(order[i - 1], order[i]);

  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double extra = std::max(0.0, 0.5 * mean_degree * static_cast<double>(n) - static_cast<double>(n - 1));
  const double p = pairs > 0.0 ? std::min(1.0, extra / pairs) : 0.0;
  std::bernoulli_distribution coin(p);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (coin(rng)) add(a, b);
    }
  }
  return Graph(n, std::move(edges));
}

FeatureLocations random_features(Rng& rng, std::size_t n, std::size_t k) {
  RMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = uniform(rng, -1.0, 1.0);
  }
  return FeatureLocations(std::move(f));
}

CVector random_complex_unit(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  CVector g(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = Complex(normal(rng), normal(rng));
  return g / g.norm();
}

RVector random_real_unit(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  RVector g(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(rng);
  return g / g.norm();
}

Instance random_instance(Rng& rng, std::size_t n_min, std::size_t n_max, std::size_t k_min,
                         std::size_t k_max) {
  const std::size_t n = uniform_index(rng, n_min, n_max);
  const std::size_t k = uniform_index(rng, k_min, k_max);
  Instance inst;
  inst.graph = random_graph(rng, n);
  inst.f = random_features(rng, n, k);
  inst.g = random_complex_unit(rng, n);
  return inst;
}

}  // namespace schro::tools
