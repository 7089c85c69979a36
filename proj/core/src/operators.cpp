#include "schro/operators.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "schro/error.hpp"

namespace schro {

namespace {

ComplexSparse to_complex(const RealSparse& m) { return m.cast<Complex>(); }

ComplexSparse diagonal_sparse(const CVector& d) {
  const auto n = d.size();
  ComplexSparse m(n, n);
  m.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i) m.insert(i, i) = d(i);
  m.makeCompressed();
  return m;
}

bool is_diagonal_kind(LinearNodeOperator::Kind k) {
  return k == LinearNodeOperator::Kind::DiagonalReal ||
         k == LinearNodeOperator::Kind::DiagonalUnitModulus;
}

void require_same_dimension(const LinearNodeOperator& a, const LinearNodeOperator& b) {
  if (a.dimension() != b.dimension()) {
    fail(ErrorCode::Contract, "operator dimensions differ: " + std::to_string(a.dimension()) +
                                  " vs " + std::to_string(b.dimension()));
  }
}

}  // namespace

// ---- construction ------------------------------------------------------------

LinearNodeOperator LinearNodeOperator::sparse(ComplexSparse matrix) {
  if (matrix.rows() != matrix.cols()) fail(ErrorCode::Contract, "operator matrix must be square");
  LinearNodeOperator op;
  op.kind_ = Kind::SparseGeneral;
  op.dim_ = static_cast<std::size_t>(matrix.rows());
  matrix.makeCompressed();
  op.matrix_ = std::move(matrix);
  return op;
}

LinearNodeOperator LinearNodeOperator::sparse(const RealSparse& matrix) {
  return sparse(to_complex(matrix));
}

LinearNodeOperator LinearNodeOperator::diagonal_real(RVector diagonal) {
  LinearNodeOperator op;
  op.kind_ = Kind::DiagonalReal;
  op.dim_ = static_cast<std::size_t>(diagonal.size());
  op.diag_ = diagonal.cast<Complex>();
  return op;
}

LinearNodeOperator LinearNodeOperator::diagonal_unit_modulus(CVector diagonal) {
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) {
    if (std::abs(std::abs(diagonal(i)) - 1.0) > 1e-12) {
      fail(ErrorCode::Contract, "unit-modulus diagonal entry " + std::to_string(i) + " has modulus " +
                                    std::to_string(std::abs(diagonal(i))));
    }
  }
  LinearNodeOperator op;
  op.kind_ = Kind::DiagonalUnitModulus;
  op.dim_ = static_cast<std::size_t>(diagonal.size());
  op.diag_ = std::move(diagonal);
  return op;
}

LinearNodeOperator LinearNodeOperator::identity(std::size_t n) {
  return diagonal_real(RVector::Ones(static_cast<Eigen::Index>(n)));
}

LinearNodeOperator LinearNodeOperator::zero(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return sparse(ComplexSparse(dim, dim));
}

LinearNodeOperator LinearNodeOperator::laplacian(std::vector<RealSparse> derivatives) {
  if (derivatives.empty()) fail(ErrorCode::Contract, "laplacian needs at least one derivative");
  const auto n = derivatives.front().rows();
  for (auto& d : derivatives) {
    if (d.rows() != n || d.cols() != n) fail(ErrorCode::Contract, "laplacian factors must be N x N");
    d.makeCompressed();
  }
  LinearNodeOperator op;
  op.kind_ = Kind::Laplacian;
  op.dim_ = static_cast<std::size_t>(n);
  op.factors_ = std::move(derivatives);
  return op;
}

// ---- application -------------------------------------------------------------

void LinearNodeOperator::apply_into(const CMatrix& in, CMatrix& out) const {
  if (static_cast<std::size_t>(in.rows()) != dim_) {
    fail(ErrorCode::Contract, "signal has " + std::to_string(in.rows()) +
                                  " nodes, operator dimension is " + std::to_string(dim_));
  }
  switch (kind_) {
    case Kind::SparseGeneral:
      out.noalias() = matrix_ * in;
      return;
    case Kind::DiagonalReal:
    case Kind::DiagonalUnitModulus:
      out.noalias() = diag_.asDiagonal() * in;
      return;
    case Kind::Laplacian: {
      out.setZero(in.rows(), in.cols());
      CMatrix first(in.rows(), in.cols());
      CMatrix second(in.rows(), in.cols());
      for (const auto& d : factors_) {
        first.noalias() = d * in;
        second.noalias() = d * first;
        out -= second;
      }
      return;
    }
  }
}

CMatrix LinearNodeOperator::apply(const CMatrix& g) const {
  CMatrix out;
  apply_into(g, out);
  return out;
}

CVector LinearNodeOperator::apply(const CVector& g) const {
  CMatrix out;
  apply_into(CMatrix(g), out);
  return out.col(0);
}

LinearNodeOperator LinearNodeOperator::adjoint() const {
  switch (kind_) {
    case Kind::SparseGeneral:
      return sparse(ComplexSparse(matrix_.adjoint()));
    case Kind::DiagonalReal:
      return *this;
    case Kind::DiagonalUnitModulus:
      return diagonal_unit_modulus(diag_.conjugate());
    case Kind::Laplacian: {
      std::vector<RealSparse> transposed;
      for (const auto& d : factors_) transposed.emplace_back(d.transpose());
      return laplacian(std::move(transposed));
    }
  }
  return *this;
}

ComplexSparse LinearNodeOperator::materialize() const {
  switch (kind_) {
    case Kind::SparseGeneral:
      return matrix_;
    case Kind::DiagonalReal:
    case Kind::DiagonalUnitModulus:
      return diagonal_sparse(diag_);
    case Kind::Laplacian: {
      const auto n = static_cast<Eigen::Index>(dim_);
      RealSparse sum(n, n);
      for (const auto& d : factors_) {
        RealSparse sq = d * d;
        sum = sum - sq;
      }
      sum.makeCompressed();
      return to_complex(sum);
    }
  }
  return matrix_;
}

CMatrix LinearNodeOperator::to_dense(std::size_t max_dim) const {
  if (dim_ > max_dim) {
    fail(ErrorCode::Size, "dense materialization of dimension " + std::to_string(dim_) +
                              " exceeds the limit " + std::to_string(max_dim));
  }
  return CMatrix(materialize());
}

bool LinearNodeOperator::is_self_adjoint(double tol) const {
  if (kind_ == Kind::DiagonalReal) return true;
  const ComplexSparse m = materialize();
  const ComplexSparse diff = m - ComplexSparse(m.adjoint());
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (ComplexSparse::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

// ---- algebra -----------------------------------------------------------------

LinearNodeOperator operator*(const LinearNodeOperator& a, const LinearNodeOperator& b) {
  require_same_dimension(a, b);
  using Kind = LinearNodeOperator::Kind;
  if (is_diagonal_kind(a.kind()) && is_diagonal_kind(b.kind())) {
    CVector d = a.diagonal().cwiseProduct(b.diagonal());
    if (a.kind() == Kind::DiagonalReal && b.kind() == Kind::DiagonalReal) {
      return LinearNodeOperator::diagonal_real(d.real());
    }
    if (a.kind() == Kind::DiagonalUnitModulus && b.kind() == Kind::DiagonalUnitModulus) {
      return LinearNodeOperator::diagonal_unit_modulus(std::move(d));
    }
    return LinearNodeOperator::sparse(diagonal_sparse(d));
  }
  if (is_diagonal_kind(a.kind())) {
    return LinearNodeOperator::sparse(ComplexSparse(a.diagonal().asDiagonal() * b.materialize()));
  }
  if (is_diagonal_kind(b.kind())) {
    return LinearNodeOperator::sparse(ComplexSparse(a.materialize() * b.diagonal().asDiagonal()));
  }
  return LinearNodeOperator::sparse(ComplexSparse(a.materialize() * b.materialize()));
}

LinearNodeOperator operator+(const LinearNodeOperator& a, const LinearNodeOperator& b) {
  require_same_dimension(a, b);
  using Kind = LinearNodeOperator::Kind;
  if (a.kind() == Kind::DiagonalReal && b.kind() == Kind::DiagonalReal) {
    return LinearNodeOperator::diagonal_real((a.diagonal() + b.diagonal()).real());
  }
  return LinearNodeOperator::sparse(ComplexSparse(a.materialize() + b.materialize()));
}

LinearNodeOperator operator-(const LinearNodeOperator& a, const LinearNodeOperator& b) {
  return a + Complex(-1.0, 0.0) * b;
}

LinearNodeOperator operator*(Complex s, const LinearNodeOperator& a) {
  using Kind = LinearNodeOperator::Kind;
  if (a.kind() == Kind::DiagonalReal && s.imag() == 0.0) {
    return LinearNodeOperator::diagonal_real(s.real() * a.diagonal().real());
  }
  if (is_diagonal_kind(a.kind())) {
    return LinearNodeOperator::sparse(diagonal_sparse(s * a.diagonal()));
  }
  return LinearNodeOperator::sparse(ComplexSparse(s * a.materialize()));
}

// ---- builders ----------------------------------------------------------------

RealSparse derivative_matrix(const Graph& graph, const RVector& f) {
  if (static_cast<std::size_t>(f.size()) != graph.n_nodes()) {
    fail(ErrorCode::Contract, "feature length does not match the graph");
  }
  RealSparse d = graph.adjacency();
  for (Eigen::Index row = 0; row < d.outerSize(); ++row) {
    for (RealSparse::InnerIterator it(d, row); it; ++it) {
      it.valueRef() *= f(row) - f(it.col());
    }
  }
  return d;
}

LinearNodeOperator feature_derivative(const Graph& graph, const RVector& f) {
  return LinearNodeOperator::sparse(derivative_matrix(graph, f));
}

LinearNodeOperator feature_derivative(const Graph& graph, const FeatureLocations& f, std::size_t k) {
  return feature_derivative(graph, f.column(k));
}

LinearNodeOperator schrodinger_laplacian(const Graph& graph, const FeatureLocations& f) {
  if (f.n_features() == 0) fail(ErrorCode::Argument, "schrodinger_laplacian needs K >= 1");
  if (f.n_nodes() != graph.n_nodes()) fail(ErrorCode::Contract, "feature rows do not match the graph");
  std::vector<RealSparse> factors;
  factors.reserve(f.n_features());
  for (std::size_t k = 0; k < f.n_features(); ++k) factors.push_back(derivative_matrix(graph, f.column(k)));
  return LinearNodeOperator::laplacian(std::move(factors));
}

LinearNodeOperator schrodinger_laplacian(const Graph& graph, const RVector& f) {
  return LinearNodeOperator::laplacian({derivative_matrix(graph, f)});
}

LinearNodeOperator location_observable(const RVector& f) { return LinearNodeOperator::diagonal_real(f); }

LinearNodeOperator location_observable(const FeatureLocations& f, std::size_t k) {
  return location_observable(f.column(k));
}

LinearNodeOperator smoothing_operator(const Graph& graph, const RVector& f) {
  if (static_cast<std::size_t>(f.size()) != graph.n_nodes()) {
    fail(ErrorCode::Contract, "feature length does not match the graph");
  }
  RealSparse w = graph.adjacency();
  for (Eigen::Index row = 0; row < w.outerSize(); ++row) {
    for (RealSparse::InnerIterator it(w, row); it; ++it) {
      const double diff = f(it.col()) - f(row);
      it.valueRef() *= diff * diff;
    }
  }
  return LinearNodeOperator::sparse(w);
}

LinearNodeOperator smoothing_operator(const Graph& graph, const FeatureLocations& f, std::size_t k) {
  return smoothing_operator(graph, f.column(k));
}

LinearNodeOperator modulation(const RVector& h, double theta) {
  CVector d(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) d(i) = std::polar(1.0, theta * h(i));
  return LinearNodeOperator::diagonal_unit_modulus(std::move(d));
}

LinearNodeOperator commutator(const LinearNodeOperator& a, const LinearNodeOperator& b) {
  require_same_dimension(a, b);
  const ComplexSparse ab = (a * b).materialize();
  const ComplexSparse ba = (b * a).materialize();
  ComplexSparse c = ab - ba;
  c.prune(Complex(0.0, 0.0), 0.0);
  return LinearNodeOperator::sparse(std::move(c));
}

// ---- norms -------------------------------------------------------------------

namespace {

struct PowerRun {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  CVector x;
};

PowerRun power_run(const LinearNodeOperator& op, const LinearNodeOperator& adj, CVector x,
                   double tol, int max_iter) {
  PowerRun run;
  x /= x.norm();
  double previous = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const CVector y = op.apply(x);
    const double sigma = y.norm();
    run.iterations = it;
    run.value = sigma;
    run.x = x;
    if (sigma == 0.0) {
      run.converged = true;
      return run;
    }
    if (previous >= 0.0 && std::abs(sigma - previous) <= tol * sigma) {
      run.converged = true;
      return run;
    }
    previous = sigma;
    CVector z = adj.apply(y);
    const double zn = z.norm();
    if (zn == 0.0) {
      run.converged = true;
      return run;
    }
    x = z / zn;
  }
  return run;
}

}  // namespace

OperatorNormResult operator_norm(const LinearNodeOperator& op, double tol, int max_iter) {
  if (op.dimension() == 0) fail(ErrorCode::Argument, "operator_norm needs dimension >= 1");
  const auto n = static_cast<Eigen::Index>(op.dimension());
  const LinearNodeOperator adj = op.adjoint();

  PowerRun best = power_run(op, adj, CVector::Ones(n), tol, max_iter);

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  CVector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = Complex(normal(rng), normal(rng));
  PowerRun restart = power_run(op, adj, std::move(start), tol, max_iter);
  if (restart.value > best.value) best = std::move(restart);

  OperatorNormResult result;
  result.value = best.value;
  result.converged = best.converged;
  result.iterations = best.iterations;
  result.right = best.x;
  result.left = best.value > 0.0 ? CVector(op.apply(best.x) / best.value) : CVector::Zero(n);
  return result;
}

double infinity_norm(const RealSparse& matrix) {
  double best = 0.0;
  for (Eigen::Index row = 0; row < matrix.outerSize(); ++row) {
    double sum = 0.0;
    for (RealSparse::InnerIterator it(matrix, row); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

double infinity_norm(const LinearNodeOperator& op) {
  if (op.kind() == LinearNodeOperator::Kind::DiagonalReal ||
      op.kind() == LinearNodeOperator::Kind::DiagonalUnitModulus) {
    return op.dimension() == 0 ? 0.0 : op.diagonal().cwiseAbs().maxCoeff();
  }
  const ComplexSparse m = op.materialize();
  double best = 0.0;
  for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
    double sum = 0.0;
    for (ComplexSparse::InnerIterator it(m, row); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

std::string dense_dump(const LinearNodeOperator& op) {
  const CMatrix m = op.to_dense(256);
  std::string out;
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%s%.17g,%.17g", c ? "," : "", m(r, c).real(), m(r, c).imag());
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace schro
