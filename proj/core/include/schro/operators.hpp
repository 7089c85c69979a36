#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "schro/graph.hpp"

namespace schro {

/// Largest dimension accepted by dense materialization.
inline constexpr std::size_t kDenseLimit = 1024;

using ComplexSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A linear map on single-channel node signals.
///
/// Kinds:
///   SparseGeneral        complex sparse matrix
///   DiagonalReal         diag(d) with real d
///   DiagonalUnitModulus  diag(d) with |d_n| = 1
///   Laplacian            -sum_k D_k D_k for real sparse D_k, never materialized
///                        on application
///
/// Instances are immutable; application is reentrant.
class LinearNodeOperator {
 public:
  enum class Kind { SparseGeneral, DiagonalReal, DiagonalUnitModulus, Laplacian };

  static LinearNodeOperator sparse(ComplexSparse matrix);
  static LinearNodeOperator sparse(const RealSparse& matrix);
  static LinearNodeOperator diagonal_real(RVector diagonal);
  /// Throws Error(Contract) when some |d_n| differs from 1 by more than 1e-12.
  static LinearNodeOperator diagonal_unit_modulus(CVector diagonal);
  static LinearNodeOperator identity(std::size_t n);
  static LinearNodeOperator zero(std::size_t n);
  /// -sum_k D_k^2, applied as K double passes of sparse D_k.
  static LinearNodeOperator laplacian(std::vector<RealSparse> derivatives);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }

  CVector apply(const CVector& g) const;
  /// Column-wise application to an N x J block.
  CMatrix apply(const CMatrix& g) const;
  /// out = op(in); out must not alias in.
  void apply_into(const CMatrix& in, CMatrix& out) const;

  LinearNodeOperator adjoint() const;
  ComplexSparse materialize() const;
  CMatrix to_dense(std::size_t max_dim = kDenseLimit) const;

  /// Entrywise |op - op^*| <= tol.
  bool is_self_adjoint(double tol = 1e-12) const;

  /// Diagonal entries for the diagonal kinds (empty otherwise).
  const CVector& diagonal() const noexcept { return diag_; }
  /// Real derivative factors of a Laplacian (empty otherwise).
  const std::vector<RealSparse>& laplacian_factors() const noexcept { return factors_; }

  friend LinearNodeOperator operator*(const LinearNodeOperator& a, const LinearNodeOperator& b);
  friend LinearNodeOperator operator+(const LinearNodeOperator& a, const LinearNodeOperator& b);
  friend LinearNodeOperator operator-(const LinearNodeOperator& a, const LinearNodeOperator& b);
  friend LinearNodeOperator operator*(Complex s, const LinearNodeOperator& a);

 private:
  LinearNodeOperator() = default;

  Kind kind_ = Kind::SparseGeneral;
  std::size_t dim_ = 0;
  ComplexSparse matrix_;
  CVector diag_;
  std::vector<RealSparse> factors_;
};

// ---- builders ----------------------------------------------------------------

/// Real sparse matrix with entries a(n,m) (f(n) - f(m)).
RealSparse derivative_matrix(const Graph& graph, const RVector& f);

/// f_k-partial derivative: skew-symmetric, pattern within the adjacency pattern.
LinearNodeOperator feature_derivative(const Graph& graph, const FeatureLocations& f, std::size_t k);
LinearNodeOperator feature_derivative(const Graph& graph, const RVector& f);

/// -sum_k grad_{f_k}^2 over all columns of f (K >= 1).
LinearNodeOperator schrodinger_laplacian(const Graph& graph, const FeatureLocations& f);
LinearNodeOperator schrodinger_laplacian(const Graph& graph, const RVector& f);

/// diag(f_k).
LinearNodeOperator location_observable(const FeatureLocations& f, std::size_t k);
LinearNodeOperator location_observable(const RVector& f);

/// (W g)(v) = sum_w a(v,w) (f(w) - f(v))^2 g(w).
LinearNodeOperator smoothing_operator(const Graph& graph, const FeatureLocations& f, std::size_t k);
LinearNodeOperator smoothing_operator(const Graph& graph, const RVector& f);

/// diag(exp(i theta h)).
LinearNodeOperator modulation(const RVector& h, double theta);

/// ab - ba, materialized sparse.
LinearNodeOperator commutator(const LinearNodeOperator& a, const LinearNodeOperator& b);

struct OperatorNormResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  CVector right;  // unit top right singular vector estimate
  CVector left;   // op(right) / value (zero when value == 0)
};

/// Spectral norm by power iteration on op^* op. Starts from the normalized
/// all-ones vector, then one seeded random restart; returns the larger.
/// Non-convergence within max_iter is reported through `converged`.
OperatorNormResult operator_norm(const LinearNodeOperator& op, double tol = 1e-8,
                                 int max_iter = 500);

/// Induced infinity norm: max over rows of the absolute row sum.
double infinity_norm(const LinearNodeOperator& op);
double infinity_norm(const RealSparse& matrix);

/// Row-major CSV dump of a dense matrix as re,im pairs (N <= 256).
std::string dense_dump(const LinearNodeOperator& op);

}  // namespace schro
