#pragma once

// Dense reference implementations, written from the definitions and kept
// independent of the library's sparse code paths.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "schro/graph.hpp"

namespace oracle {

using schro::CMatrix;
using schro::Complex;
using schro::CVector;
using schro::Graph;
using schro::RMatrix;
using schro::RVector;

inline RMatrix adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  RMatrix a = RMatrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = e.w;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = e.w;
  }
  return a;
}

inline RMatrix derivative(const Graph& g, const RVector& f) {
  RMatrix d = adjacency(g);
  for (Eigen::Index n = 0; n < d.rows(); ++n) {
    for (Eigen::Index m = 0; m < d.cols(); ++m) d(n, m) *= f(n) - f(m);
  }
  return d;
}

inline RMatrix laplacian(const Graph& g, const RMatrix& f) {
  RMatrix l = RMatrix::Zero(f.rows(), f.rows());
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    const RMatrix d = derivative(g, f.col(k));
    l -= d * d;
  }
  return l;
}

inline RMatrix smoothing(const Graph& g, const RVector& f) {
  RMatrix w = adjacency(g);
  for (Eigen::Index v = 0; v < w.rows(); ++v) {
    for (Eigen::Index u = 0; u < w.cols(); ++u) w(v, u) *= (f(u) - f(v)) * (f(u) - f(v));
  }
  return w;
}

/// e^{-i t L} for real symmetric L.
inline CMatrix schrodinger(const RMatrix& l, double t) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(l);
  CVector phase(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) phase(i) = std::polar(1.0, -t * es.eigenvalues()(i));
  const CMatrix v = es.eigenvectors().cast<Complex>();
  return v * phase.asDiagonal() * v.adjoint();
}

/// <M g, g> with the library's convention <a, b> = sum a conj(b).
inline Complex expectation(const CMatrix& m, const CVector& g) { return g.dot(m * g); }

inline double spectral_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Path 0 - 1 - ... - (n-1) with unit weights.
inline Graph path(std::size_t n) {
  std::vector<schro::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Graph(n, edges);
}

inline Graph random_graph(std::mt19937_64& rng, std::size_t n, double p = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::vector<schro::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w(rng)});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (u(rng) < p) edges.push_back({i, j, w(rng)});
    }
  }
  return Graph(n, edges);
}

inline RVector random_real(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RVector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline CVector random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> z(0.0, 1.0);
  CVector v(n);
  for (auto& x : v) x = Complex(z(rng), z(rng));
  return v / v.norm();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
