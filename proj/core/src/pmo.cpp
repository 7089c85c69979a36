#include "schro/pmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "schro/observe.hpp"

namespace schro {

void PMOConfig::validate() const {
  if (out_features < 1) fail(ErrorCode::Config, "pmo out_features must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::Config, "pmo lambda must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorCode::Config, "pmo learning_rate must be > 0");
  }
  if (max_iters < 0) fail(ErrorCode::Config, "pmo max_iters must be >= 0");
  if (!(norm_tol > 0.0)) fail(ErrorCode::Config, "pmo norm_tol must be > 0");
  if (!(fd_step > 0.0)) fail(ErrorCode::Config, "pmo fd_step must be > 0");
}

namespace {

constexpr int kNormMaxIter = 500;

/// One power-iteration run on C^T C from `start`.
struct RealRun {
  double value = 0.0;
  RVector x;
};

RealRun real_power_run(const RealSparse& c, const RealSparse& ct, RVector x, double tol, int max_iter) {
  RealRun run;
  double norm = x.norm();
  if (!(norm > 0.0)) return run;
  x /= norm;
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    const RVector cx = c * x;
    const double value = cx.norm();
    run.value = value;
    run.x = x;
    if (value == 0.0) break;
    if (prev >= 0.0 && std::abs(value - prev) <= tol * value) break;
    prev = value;
    RVector next = ct * cx;
    norm = next.norm();
    if (!(norm > 0.0)) break;
    x = next / norm;
  }
  if (run.x.size() == 0) run.x = x;
  return run;
}

}  // namespace

PMOProblem::PMOProblem(const Graph& graph, const FeatureLocations& q, double lambda, double norm_tol)
    : graph_(&graph), q_(q), lambda_(lambda), norm_tol_(norm_tol) {
  if (q.n_nodes() != graph.n_nodes()) fail(ErrorCode::Contract, "feature rows do not match the graph");
  if (q.n_features() == 0) fail(ErrorCode::Argument, "PMO needs at least one raw feature");
  base_derivatives_.reserve(q.n_features());
  for (std::size_t a = 0; a < q.n_features(); ++a) {
    base_derivatives_.push_back(derivative_matrix(graph, q.column(a)));
  }
}

FeatureLocations PMOProblem::features(const RMatrix& transform) const {
  return FeatureLocations(q_.values() * transform);
}

RealSparse PMOProblem::derivative(const RMatrix& transform, std::size_t k) const {
  // All base derivatives share the adjacency pattern, so combine values directly.
  RealSparse d = base_derivatives_.front();
  const auto nnz = d.nonZeros();
  double* out = d.valuePtr();
  std::fill(out, out + nnz, 0.0);
  for (std::size_t a = 0; a < base_derivatives_.size(); ++a) {
    const double coeff = transform(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k));
    if (coeff == 0.0) continue;
    const double* in = base_derivatives_[a].valuePtr();
    for (Eigen::Index e = 0; e < nnz; ++e) out[e] += coeff * in[e];
  }
  return d;
}

RealSparse PMOProblem::cross_commutator(const RealSparse& square, const RVector& location) const {
  // [S, X](n, m) = S(n, m) (x(m) - x(n)).
  RealSparse c = square;
  for (Eigen::Index row = 0; row < c.outerSize(); ++row) {
    for (RealSparse::InnerIterator it(c, row); it; ++it) it.valueRef() *= location(it.col()) - location(row);
  }
  return c;
}

PMOProblem::Pair PMOProblem::top_pair(const RealSparse& c, const RVector* warm, bool refresh) const {
  const RealSparse ct = c.transpose();
  const Eigen::Index n = c.rows();
  RealRun best;
  if (warm != nullptr && warm->size() == n) {
    best = real_power_run(c, ct, *warm, norm_tol_, kNormMaxIter);
    if (refresh) {
      RealRun ones = real_power_run(c, ct, RVector::Ones(n), norm_tol_, kNormMaxIter);
      if (ones.value > best.value) best = std::move(ones);
    }
  } else {
    best = real_power_run(c, ct, RVector::Ones(n), norm_tol_, kNormMaxIter);
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> normal;
    RVector start(n);
    for (Eigen::Index i = 0; i < n; ++i) start(i) = normal(rng);
    RealRun restart = real_power_run(c, ct, std::move(start), norm_tol_, kNormMaxIter);
    if (restart.value > best.value) best = std::move(restart);
  }
  Pair pair;
  pair.norm = best.value;
  pair.right = best.x;
  pair.left = best.value > 0.0 ? RVector(c * best.x / best.value) : RVector::Zero(n);
  return pair;
}

double PMOProblem::regularizer_of(const RMatrix& transform) const {
  double total = 0.0;
  for (Eigen::Index k = 0; k < transform.cols(); ++k) {
    const double excess = infinity_norm(derivative(transform, static_cast<std::size_t>(k))) - 1.0;
    total += excess * excess;
  }
  return lambda_ * total;
}

double PMOProblem::objective_impl(const RMatrix& transform, std::vector<RVector>* warm_io,
                                  bool refresh) const {
  if (static_cast<std::size_t>(transform.rows()) != q_.n_features()) {
    fail(ErrorCode::Contract, "transform rows must equal the raw feature count");
  }
  const auto k = static_cast<std::size_t>(transform.cols());
  if (k == 0) fail(ErrorCode::Argument, "transform needs at least one column");

  double cross = 0.0;
  if (k > 1) {
    const RMatrix f = q_.values() * transform;
    std::vector<RealSparse> squares;
    squares.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      const RealSparse d = derivative(transform, j);
      squares.push_back(RealSparse(d * d).pruned());
    }
    if (warm_io != nullptr && warm_io->size() != k * k) warm_io->assign(k * k, RVector());
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        const RealSparse c = cross_commutator(squares[j], f.col(static_cast<Eigen::Index>(i)));
        RVector* warm = warm_io != nullptr ? &(*warm_io)[i * k + j] : nullptr;
        Pair pair = top_pair(c, warm, refresh);
        cross += pair.norm * pair.norm;
        if (warm != nullptr) *warm = std::move(pair.right);
      }
    }
  }
  return cross + regularizer_of(transform);
}

double PMOProblem::objective(const RMatrix& transform) const { return objective_impl(transform, nullptr); }

double PMOProblem::regularizer(const RMatrix& transform) const { return regularizer_of(transform); }

double PMOProblem::cross_mass(const RMatrix& transform) const {
  return objective_impl(transform, nullptr) - regularizer_of(transform);
}

RMatrix PMOProblem::gradient_fd(const RMatrix& transform, double step) const {
  if (!(step > 0.0)) fail(ErrorCode::Argument, "finite-difference step must be positive");
  std::vector<RVector> warm;
  objective_impl(transform, &warm);
  return gradient_fd_impl(transform, step, warm);
}

RMatrix PMOProblem::gradient_fd_impl(const RMatrix& transform, double step,
                                     const std::vector<RVector>& warm) const {
  RMatrix grad(transform.rows(), transform.cols());
  RMatrix probe = transform;
  for (Eigen::Index c = 0; c < transform.cols(); ++c) {
    for (Eigen::Index r = 0; r < transform.rows(); ++r) {
      std::vector<RVector> wp = warm;
      std::vector<RVector> wm = warm;
      probe(r, c) = transform(r, c) + step;
      const double up = objective_impl(probe, &wp, false);
      probe(r, c) = transform(r, c) - step;
      const double down = objective_impl(probe, &wm, false);
      probe(r, c) = transform(r, c);
      grad(r, c) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

RMatrix PMOProblem::gradient_spectral(const RMatrix& transform) const {
  const auto k = static_cast<std::size_t>(transform.cols());
  const auto m = static_cast<Eigen::Index>(q_.n_features());
  RMatrix grad = RMatrix::Zero(transform.rows(), transform.cols());
  const RMatrix f = q_.values() * transform;

  std::vector<RealSparse> derivs;
  std::vector<RealSparse> squares;
  for (std::size_t j = 0; j < k; ++j) {
    derivs.push_back(derivative(transform, j));
    squares.push_back(RealSparse(derivs.back() * derivs.back()).pruned());
  }

  for (std::size_t i = 0; i < k && k > 1; ++i) {
    const RVector xi = f.col(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const Pair pair = top_pair(cross_commutator(squares[j], xi), nullptr, true);
      if (pair.norm == 0.0) continue;
      const RVector& v = pair.right;
      const RVector& u = pair.left;
      const double scale = 2.0 * pair.norm;
      const RVector sv = squares[j] * v;
      const RVector xv = xi.cwiseProduct(v);
      for (Eigen::Index a = 0; a < m; ++a) {
        const RVector qa = q_.values().col(a);
        // d/dT(a, i): [S_j, diag(q_a)].
        const double di = u.dot(squares[j] * qa.cwiseProduct(v) - qa.cwiseProduct(sv));
        grad(a, static_cast<Eigen::Index>(i)) += scale * di;
        // d/dT(a, j): [B_a D_j + D_j B_a, X_i].
        const RealSparse& b = base_derivatives_[static_cast<std::size_t>(a)];
        const RealSparse& d = derivs[j];
        const auto ds = [&](const RVector& w) -> RVector { return b * (d * w) + d * (b * w); };
        const double dj = u.dot(ds(xv) - xi.cwiseProduct(ds(v)));
        grad(a, static_cast<Eigen::Index>(j)) += scale * dj;
      }
    }
  }

  if (lambda_ > 0.0) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const RealSparse& d = derivs[kk];
      Eigen::Index arg = 0;
      double best = -1.0;
      for (Eigen::Index row = 0; row < d.outerSize(); ++row) {
        double sum = 0.0;
        for (RealSparse::InnerIterator it(d, row); it; ++it) sum += std::abs(it.value());
        if (sum > best) {
          best = sum;
          arg = row;
        }
      }
      const double outer = 2.0 * lambda_ * (best - 1.0);
      for (Eigen::Index a = 0; a < m; ++a) {
        const RealSparse& b = base_derivatives_[static_cast<std::size_t>(a)];
        double inner_sum = 0.0;
        RealSparse::InnerIterator itd(d, arg);
        for (RealSparse::InnerIterator itb(b, arg); itb && itd; ++itb, ++itd) {
          const double s = itd.value() > 0.0 ? 1.0 : (itd.value() < 0.0 ? -1.0 : 0.0);
          inner_sum += s * itb.value();
        }
        grad(a, static_cast<Eigen::Index>(kk)) += outer * inner_sum;
      }
    }
  }
  return grad;
}

double pmo_objective(const Graph& graph, const FeatureLocations& q, const RMatrix& transform,
                     double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::Argument, "lambda must be >= 0");
  return PMOProblem(graph, q, lambda).objective(transform);
}

namespace {

struct RunOutcome {
  RMatrix best;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, double>> trace;
};

}  // namespace

class PMOFitter {
 public:
  static RunOutcome run(const PMOProblem& problem, RMatrix transform, const PMOConfig& cfg,
                        int iter_offset);
};

RunOutcome PMOFitter::run(const PMOProblem& problem, RMatrix transform, const PMOConfig& cfg,
                          int iter_offset) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  constexpr int kWindow = 20;

  RunOutcome out;
  RMatrix m1 = RMatrix::Zero(transform.rows(), transform.cols());
  RMatrix m2 = m1;
  std::vector<RVector> warm;
  std::vector<double> best_history;
  RMatrix last_good = transform;

  for (int it = 0; it <= cfg.max_iters; ++it) {
    const double value = problem.objective_impl(transform, &warm);
    if (!std::isfinite(value) || !transform.allFinite()) {
      throw PMODiverged("PMO objective became non-finite at iteration " + std::to_string(it), last_good);
    }
    last_good = transform;
    out.trace.emplace_back(iter_offset + it, value);
    if (value < out.best_objective) {
      out.best_objective = value;
      out.best = transform;
    }
    best_history.push_back(out.best_objective);
    if (it >= kWindow) {
      const double then = best_history[static_cast<std::size_t>(it - kWindow)];
      if (then - out.best_objective <= 1e-8 * std::abs(then)) break;
    }
    if (it == cfg.max_iters) break;

    const RMatrix grad = cfg.grad_mode == GradMode::FiniteDifference
                             ? problem.gradient_fd_impl(transform, cfg.fd_step, warm)
                             : problem.gradient_spectral(transform);
    if (!grad.allFinite()) {
      throw PMODiverged("PMO gradient became non-finite at iteration " + std::to_string(it), last_good);
    }
    m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
    m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, it + 1);
    const double c2 = 1.0 - std::pow(kBeta2, it + 1);
    transform -= cfg.learning_rate *
                 ((m1 / c1).array() / ((m2 / c2).array().sqrt() + kEps)).matrix();
  }
  return out;
}

PMOResult pmo_fit(const Graph& graph, const FeatureLocations& q, const PMOConfig& cfg) {
  cfg.validate();
  const std::size_t m = q.n_features();
  if (m < cfg.out_features) fail(ErrorCode::Precondition, "PMO needs M >= K raw features");

  PMOResult result;
  if (!graph.is_connected()) result.warnings.emplace_back("graph is not connected");

  const PMOProblem problem(graph, q, cfg.lambda, cfg.norm_tol);
  const auto mi = static_cast<Eigen::Index>(m);
  const auto ki = static_cast<Eigen::Index>(cfg.out_features);
  const RMatrix init = RMatrix::Identity(mi, ki);

  result.initial_objective = problem.objective(init);
  RunOutcome outcome = PMOFitter::run(problem, init, cfg, 0);

  const bool weak = result.initial_objective > 0.0 &&
                    result.initial_objective - outcome.best_objective < 0.01 * result.initial_objective;
  if (weak) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    RMatrix start(mi, ki);
    for (Eigen::Index c = 0; c < ki; ++c) {
      for (Eigen::Index r = 0; r < mi; ++r) start(r, c) = normal(rng) / std::sqrt(static_cast<double>(m));
    }
    const int offset = outcome.trace.empty() ? 0 : outcome.trace.back().first + 1;
    RunOutcome second = PMOFitter::run(problem, start, cfg, offset);
    result.restarted = true;
    outcome.trace.insert(outcome.trace.end(), second.trace.begin(), second.trace.end());
    if (second.best_objective < outcome.best_objective) {
      outcome.best = std::move(second.best);
      outcome.best_objective = second.best_objective;
    }
  }

  result.transform = outcome.best;
  result.final_objective = problem.objective(result.transform);
  if (result.final_objective > result.initial_objective) {
    result.transform = init;
    result.final_objective = result.initial_objective;
  }
  result.objective_trace = std::move(outcome.trace);
  result.final_deficiency = commuting_deficiency(graph, problem.features(result.transform));
  return result;
}

double centered_cosine(const RVector& a, const RVector& b) {
  if (a.size() != b.size()) fail(ErrorCode::Contract, "centered_cosine needs equal lengths");
  const RVector ac = a.array() - a.mean();
  const RVector bc = b.array() - b.mean();
  const double denom = ac.norm() * bc.norm();
  if (!(denom > kNormFloor)) fail(ErrorCode::Degenerate, "centered_cosine of a constant vector");
  return std::abs(ac.dot(bc)) / denom;
}

}  // namespace schro
