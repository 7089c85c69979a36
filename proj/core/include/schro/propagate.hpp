#pragma once

#include <memory>

#include "schro/graph.hpp"
#include "schro/operators.hpp"

namespace schro {

enum class EvolutionMethod { Taylor, DenseOracle };

/// Truncated-Taylor settings for e^{-it Delta}. Time is split into
/// s = ceil(|t| * ||Delta||_inf / split_threshold) equal sub-steps.
struct EvolutionConfig {
  int taylor_order = 15;
  double split_threshold = 1.0;
  EvolutionMethod method = EvolutionMethod::Taylor;

  /// Throws Error(Config) unless taylor_order in [1, 64] and split_threshold > 0.
  void validate() const;
};

/// Applies S[t] = e^{-it L} for a fixed self-adjoint generator L.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual std::size_t dimension() const = 0;
  /// Column-wise S[t] g for an N x J block.
  virtual CMatrix evolve(double t, const CMatrix& g) const = 0;
};

class TaylorPropagator final : public Propagator {
 public:
  TaylorPropagator(LinearNodeOperator generator, EvolutionConfig cfg);

  std::size_t dimension() const override { return generator_.dimension(); }
  CMatrix evolve(double t, const CMatrix& g) const override;

  /// Cached induced infinity norm of the generator.
  double norm_bound() const noexcept { return norm_bound_; }
  long substeps(double t) const;

 private:
  LinearNodeOperator generator_;
  EvolutionConfig cfg_;
  double norm_bound_ = 0.0;
};

/// Eigendecomposition oracle: S[t] = V e^{-it Lambda} V^*. N <= kDenseLimit.
class DensePropagator final : public Propagator {
 public:
  explicit DensePropagator(const LinearNodeOperator& generator);

  std::size_t dimension() const override { return static_cast<std::size_t>(vectors_.rows()); }
  CMatrix evolve(double t, const CMatrix& g) const override;

  const RVector& eigenvalues() const noexcept { return values_; }
  const CMatrix& eigenvectors() const noexcept { return vectors_; }

 private:
  RVector values_;
  CMatrix vectors_;
};

std::unique_ptr<Propagator> make_propagator(const LinearNodeOperator& generator,
                                            const EvolutionConfig& cfg);

/// e^{-it Delta} g via the method in cfg.
Signal evolve(const LinearNodeOperator& laplacian, double t, const Signal& g,
              const EvolutionConfig& cfg = {});
Signal evolve_dense(const LinearNodeOperator& laplacian, double t, const Signal& g);

/// | ||evolve(g)|| - ||g|| | / ||g|| (Frobenius norms).
double unitarity_defect(const LinearNodeOperator& laplacian, double t, const Signal& g,
                        const EvolutionConfig& cfg = {});

// ---- diffusion baseline --------------------------------------------------------

/// Combinatorial graph Laplacian D - A.
RealSparse graph_laplacian(const Graph& graph);

/// e^{-t L} for a real symmetric L via dense eigendecomposition.
class HeatPropagator {
 public:
  explicit HeatPropagator(const RealSparse& generator);
  CMatrix evolve(double t, const CMatrix& g) const;

 private:
  RVector values_;
  RMatrix vectors_;
};

}  // namespace schro
