#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "schro/error.hpp"
#include "schro/graph.hpp"
#include "schro/operators.hpp"

namespace schro {

enum class GradMode { FiniteDifference, SpectralPair };

struct PMOConfig {
  std::size_t out_features = 2;  // K
  double lambda = 1.0;
  double learning_rate = 0.01;
  int max_iters = 2000;
  GradMode grad_mode = GradMode::FiniteDifference;
  std::uint64_t seed = 0;
  double norm_tol = 1e-8;  // power-iteration tolerance for the op norms
  double fd_step = 1e-5;

  void validate() const;
};

struct PMOResult {
  RMatrix transform;                               // M x K
  std::vector<std::pair<int, double>> objective_trace;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double final_deficiency = 0.0;                   // commuting_deficiency of f = q T
  bool restarted = false;
  std::vector<std::string> warnings;
};

/// Thrown when the objective becomes non-finite; carries the last finite T.
class PMODiverged : public Error {
 public:
  PMODiverged(const std::string& what, RMatrix last_good)
      : Error(ErrorCode::Numerical, what), last_good_(std::move(last_good)) {}
  const RMatrix& last_good() const noexcept { return last_good_; }

 private:
  RMatrix last_good_;
};

/// Position-momentum objective for a fixed graph and raw features q.
/// Caches the per-column derivative matrices so that grad_{qT} is formed
/// by linear combination.
class PMOProblem {
 public:
  PMOProblem(const Graph& graph, const FeatureLocations& q, double lambda, double norm_tol = 1e-8);

  std::size_t n_inputs() const noexcept { return q_.n_features(); }

  /// sum_{i != j} ||[grad_j^2, X_i]||_op^2 + lambda sum_k (||grad_k||_inf - 1)^2.
  double objective(const RMatrix& transform) const;
  double cross_mass(const RMatrix& transform) const;
  double regularizer(const RMatrix& transform) const;

  /// Central finite differences, one pair of evaluations per entry.
  RMatrix gradient_fd(const RMatrix& transform, double step) const;
  /// Chain rule through the top singular pair of each commutator plus the
  /// subgradient of the infinity-norm terms at the arg-max row.
  RMatrix gradient_spectral(const RMatrix& transform) const;

  FeatureLocations features(const RMatrix& transform) const;

 private:
  friend class PMOFitter;

  struct Pair {
    double norm = 0.0;
    RVector right;
    RVector left;
  };

  RealSparse derivative(const RMatrix& transform, std::size_t k) const;
  RealSparse cross_commutator(const RealSparse& square, const RVector& location) const;
  /// Warm start alone, or warm plus the all-ones start when `refresh`; cold
  /// (all-ones plus seeded random restart) without a warm vector.
  Pair top_pair(const RealSparse& c, const RVector* warm, bool refresh) const;
  double objective_impl(const RMatrix& transform, std::vector<RVector>* warm_io,
                        bool refresh = true) const;
  double regularizer_of(const RMatrix& transform) const;
  RMatrix gradient_fd_impl(const RMatrix& transform, double step,
                           const std::vector<RVector>& warm) const;

  const Graph* graph_;
  FeatureLocations q_;
  double lambda_;
  double norm_tol_;
  std::vector<RealSparse> base_derivatives_;
};

double pmo_objective(const Graph& graph, const FeatureLocations& q, const RMatrix& transform,
                     double lambda);

/// Adam on the position-momentum objective from the identity-padded T
/// (first K columns of I_M). Stops at max_iters or when the relative
/// objective decrease over 20 iterations falls below 1e-8. Returns the best
/// T seen, so the objective never exceeds its initial value.
PMOResult pmo_fit(const Graph& graph, const FeatureLocations& q, const PMOConfig& cfg);

/// |cos| of the angle between two centered node vectors.
double centered_cosine(const RVector& a, const RVector& b);

}  // namespace schro
