#include "schro/propagate.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "schro/error.hpp"

namespace schro {

void EvolutionConfig::validate() const {
  if (taylor_order < 1 || taylor_order > 64) {
    fail(ErrorCode::Config, "taylor_order must be in [1, 64], got " + std::to_string(taylor_order));
  }
  if (!(split_threshold > 0.0) || !std::isfinite(split_threshold)) {
    fail(ErrorCode::Config, "split_threshold must be positive");
  }
}

// ---- Taylor --------------------------------------------------------------------

TaylorPropagator::TaylorPropagator(LinearNodeOperator generator, EvolutionConfig cfg)
    : generator_(std::move(generator)), cfg_(cfg) {
  cfg_.validate();
  norm_bound_ = infinity_norm(generator_);
}

long TaylorPropagator::substeps(double t) const {
  if (t == 0.0 || norm_bound_ == 0.0) return 0;
  return static_cast<long>(std::ceil(std::abs(t) * norm_bound_ / cfg_.split_threshold));
}

CMatrix TaylorPropagator::evolve(double t, const CMatrix& g) const {
  if (!std::isfinite(t)) fail(ErrorCode::Argument, "evolution time must be finite");
  if (static_cast<std::size_t>(g.rows()) != dimension()) {
    fail(ErrorCode::Contract, "signal node count does not match the generator");
  }
  const long steps = substeps(t);
  if (steps == 0) return g;

  const double tau = t / static_cast<double>(steps);
  CMatrix state = g;
  CMatrix acc(g.rows(), g.cols());
  CMatrix applied(g.rows(), g.cols());
  for (long s = 0; s < steps; ++s) {
    // Horner: acc = x + (-i tau L / r) acc, r = R..1.
    acc = state;
    for (int r = cfg_.taylor_order; r >= 1; --r) {
      generator_.apply_into(acc, applied);
      acc = state + Complex(0.0, -tau / static_cast<double>(r)) * applied;
    }
    state.swap(acc);
    if (!state.allFinite()) {
      fail(ErrorCode::Numerical, "non-finite value in Taylor sub-step " + std::to_string(s + 1) +
                                     " of " + std::to_string(steps));
    }
  }
  return state;
}

// ---- dense oracle ----------------------------------------------------------------

DensePropagator::DensePropagator(const LinearNodeOperator& generator) {
  const CMatrix dense = generator.to_dense(kDenseLimit);
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  if ((dense - dense.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(ErrorCode::Contract, "dense propagator requires a self-adjoint generator");
  }
  if (dense.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    const RMatrix real = 0.5 * (dense.real() + dense.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(real);
    if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "eigendecomposition failed");
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors().cast<Complex>();
  } else {
    const CMatrix herm = 0.5 * (dense + dense.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
    if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "eigendecomposition failed");
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }
}

CMatrix DensePropagator::evolve(double t, const CMatrix& g) const {
  if (g.rows() != vectors_.rows()) fail(ErrorCode::Contract, "signal node count does not match the generator");
  if (t == 0.0) return g;
  CVector phase(values_.size());
  for (Eigen::Index i = 0; i < values_.size(); ++i) phase(i) = std::polar(1.0, -t * values_(i));
  const CMatrix coeffs = phase.asDiagonal() * (vectors_.adjoint() * g);
  return vectors_ * coeffs;
}

std::unique_ptr<Propagator> make_propagator(const LinearNodeOperator& generator,
                                            const EvolutionConfig& cfg) {
  cfg.validate();
  if (cfg.method == EvolutionMethod::DenseOracle) return std::make_unique<DensePropagator>(generator);
  return std::make_unique<TaylorPropagator>(generator, cfg);
}

Signal evolve(const LinearNodeOperator& laplacian, double t, const Signal& g, const EvolutionConfig& cfg) {
  if (t == 0.0) return g;
  return Signal(make_propagator(laplacian, cfg)->evolve(t, g.values()));
}

Signal evolve_dense(const LinearNodeOperator& laplacian, double t, const Signal& g) {
  if (laplacian.dimension() > kDenseLimit) {
    fail(ErrorCode::Size, "evolve_dense supports N <= " + std::to_string(kDenseLimit));
  }
  return Signal(DensePropagator(laplacian).evolve(t, g.values()));
}

double unitarity_defect(const LinearNodeOperator& laplacian, double t, const Signal& g,
                        const EvolutionConfig& cfg) {
  const double before = g.values().norm();
  if (!(before > kNormFloor)) fail(ErrorCode::Degenerate, "unitarity_defect of a zero signal");
  const double after = evolve(laplacian, t, g, cfg).values().norm();
  return std::abs(after - before) / before;
}

// ---- diffusion baseline --------------------------------------------------------

RealSparse graph_laplacian(const Graph& graph) {
  const auto& a = graph.adjacency();
  RealSparse l = -a;
  RVector degree = RVector::Zero(a.rows());
  for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
    for (RealSparse::InnerIterator it(a, row); it; ++it) degree(row) += it.value();
  }
  RealSparse d(a.rows(), a.cols());
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index i = 0; i < a.rows(); ++i) diag.emplace_back(i, i, degree(i));
  d.setFromTriplets(diag.begin(), diag.end());
  l = l + d;
  l.makeCompressed();
  return l;
}

HeatPropagator::HeatPropagator(const RealSparse& generator) {
  if (static_cast<std::size_t>(generator.rows()) > kDenseLimit) {
    fail(ErrorCode::Size, "HeatPropagator supports N <= " + std::to_string(kDenseLimit));
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> solver{RMatrix(generator)};
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

CMatrix HeatPropagator::evolve(double t, const CMatrix& g) const {
  const RVector decay = (-t * values_).array().exp().matrix();
  const CMatrix coeffs = decay.cast<Complex>().asDiagonal() * (vectors_.transpose().cast<Complex>() * g);
  return vectors_.cast<Complex>() * coeffs;
}

}  // namespace schro
