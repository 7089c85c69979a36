#include "schro/observe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "schro/error.hpp"

namespace schro {

namespace {

std::atomic<double> g_worst_routing_residual{0.0};

void record_routing_residual(double residual) {
  double seen = g_worst_routing_residual.load();
  while (residual > seen && !g_worst_routing_residual.compare_exchange_weak(seen, residual)) {
  }
}

void require_unit(const CVector& g) {
  const double norm = g.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    fail(ErrorCode::Precondition, "signal must be normalized (norm " + std::to_string(norm) + ")");
  }
}

void require_length(const Graph& graph, Eigen::Index n) {
  if (static_cast<std::size_t>(n) != graph.n_nodes()) {
    fail(ErrorCode::Contract, "vector length does not match the graph");
  }
}

constexpr Complex kI{0.0, 1.0};

}  // namespace

Complex inner(const CVector& a, const CVector& b) { return b.dot(a); }

double mean(const LinearNodeOperator& obs, const CVector& g) {
  require_unit(g);
  if (!obs.is_self_adjoint(1e-12)) fail(ErrorCode::Contract, "observable is not self-adjoint");
  const Complex value = inner(obs.apply(g), g);
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    fail(ErrorCode::Contract, "imaginary residue " + std::to_string(value.imag()) +
                                  " in the expectation of a self-adjoint observable");
  }
  return value.real();
}

double variance(const LinearNodeOperator& obs, const CVector& g) {
  const double e = mean(obs, g);
  const CVector centered = obs.apply(g) - e * g;
  const double v = centered.squaredNorm();
  return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

double variance_by_moments(const LinearNodeOperator& obs, const CVector& g) {
  const double e = mean(obs, g);
  const CVector mg = obs.apply(g);
  // E_{M^2}(g) = <M^2 g, g> = ||M g||^2 for self-adjoint M.
  const double v = inner(obs.apply(mg), g).real() - e * e;
  return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

ObservableStats stats(const LinearNodeOperator& obs, const CVector& g, std::string id) {
  return {mean(obs, g), variance(obs, g), std::move(id)};
}

RoutingReport routing_measure(const LinearNodeOperator& obs, const CVector& g0, const CVector& gt,
                              double r) {
  require_unit(g0);
  require_unit(gt);
  RoutingReport report;
  report.target = r;
  report.initial_variance = variance(obs, g0);
  if (!(report.initial_variance > kVarianceFloor)) {
    fail(ErrorCode::Degenerate, "initial state has variance at or below the variance floor");
  }
  report.final_mean = mean(obs, gt);
  report.final_variance = variance(obs, gt);

  const CVector shifted = obs.apply(gt) - r * gt;
  // <(M - r)^2 gt, gt> = ||(M - r) gt||^2.
  const double numerator = inner(obs.apply(shifted) - r * shifted, gt).real();
  report.measure = numerator / report.initial_variance;

  const double decomposed =
      (report.final_variance + (r - report.final_mean) * (r - report.final_mean)) /
      report.initial_variance;
  const double residual = std::abs(report.measure - decomposed) / std::max(1.0, std::abs(report.measure));
  record_routing_residual(residual);
  if (residual > 1e-10) {
    fail(ErrorCode::Numerical, "routing measure routes disagree by " + std::to_string(residual));
  }
  return report;
}

double routing_identity_worst_residual() { return g_worst_routing_residual.load(); }

double momentum_mean_modulated_closed_form(const Graph& graph, const RVector& f, const RVector& h,
                                           double theta, const RVector& g, EdgeSignals* edges) {
  require_length(graph, f.size());
  require_length(graph, h.size());
  require_length(graph, g.size());
  if (std::abs(g.norm() - 1.0) > 1e-9) fail(ErrorCode::Precondition, "signal must be normalized");

  const auto m = static_cast<Eigen::Index>(2 * graph.n_edges());
  if (edges) {
    edges->e_gh.resize(m);
    edges->e_f.resize(m);
  }
  double total = 0.0;
  Eigen::Index slot = 0;
  for (const auto& e : graph.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    for (const auto& [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
      const double egh = e.w * g(a) * g(b) * std::sin(theta * (h(b) - h(a)));
      const double ef = f(b) - f(a);
      total += egh * ef;
      if (edges) {
        edges->e_gh(slot) = egh;
        edges->e_f(slot) = ef;
      }
      ++slot;
    }
  }
  if (edges) edges->inner = edges->e_gh.dot(edges->e_f);
  return total;
}

double dynamics_rhs_single(const Graph& graph, const RVector& f, const CVector& g) {
  require_length(graph, g.size());
  const auto grad = feature_derivative(graph, f);
  const auto smooth = smoothing_operator(graph, f);
  return 2.0 * inner(kI * grad.apply(g), smooth.apply(g)).real();
}

double dynamics_rhs_multi(const Graph& graph, const FeatureLocations& f, std::size_t k,
                          const CVector& g) {
  require_length(graph, g.size());
  if (k >= f.n_features()) fail(ErrorCode::Argument, "feature index out of range");
  const RVector fk = f.column(k);
  double rhs = dynamics_rhs_single(graph, fk, g);
  const CVector xg = fk.cast<Complex>().cwiseProduct(g);
  for (std::size_t j = 0; j < f.n_features(); ++j) {
    if (j == k) continue;
    const auto grad = feature_derivative(graph, f.column(j));
    // [i grad^2, X] g = i (grad^2 X g - X grad^2 g)
    const CVector a = grad.apply(grad.apply(xg));
    const CVector b = fk.cast<Complex>().cwiseProduct(grad.apply(grad.apply(g)));
    const Complex cross = inner(kI * (a - b), g);
    if (std::abs(cross.imag()) > 1e-10 * std::max(1.0, std::abs(cross.real()))) {
      fail(ErrorCode::Contract, "imaginary residue in the multi-feature cross term");
    }
    rhs -= cross.real();
  }
  return rhs;
}

namespace {

/// [Delta, X^2] u with Delta = -grad^2.
CVector laplacian_square_commutator(const LinearNodeOperator& grad, const RVector& f, const CVector& u) {
  const CVector f2 = f.cwiseProduct(f).cast<Complex>();
  const CVector x2u = f2.cwiseProduct(u);
  const CVector delta_x2 = -grad.apply(grad.apply(x2u));
  const CVector x2_delta = f2.cwiseProduct(-grad.apply(grad.apply(u)));
  return delta_x2 - x2_delta;
}

}  // namespace

double variance_rhs(const Graph& graph, const RVector& f, const CVector& g) {
  require_length(graph, g.size());
  const auto grad = feature_derivative(graph, f);
  const auto smooth = smoothing_operator(graph, f);
  const Complex first = inner(kI * laplacian_square_commutator(grad, f, g), g);
  if (std::abs(first.imag()) > 1e-10 * std::max(1.0, std::abs(first.real()))) {
    fail(ErrorCode::Contract, "imaginary residue in E_{i[Delta, X^2]}");
  }
  const double ex = mean(location_observable(f), g);
  const double coupling = inner(kI * grad.apply(g), smooth.apply(g)).real();
  return first.real() - 4.0 * ex * coupling;
}

double epsilon_regularity(const Graph& graph, const RVector& f, const CVector& g) {
  require_length(graph, g.size());
  return (smoothing_operator(graph, f).apply(g) - g).norm();
}

double commuting_deficiency(const Graph& graph, const FeatureLocations& f) {
  const std::size_t k = f.n_features();
  double worst = 0.0;
  if (k < 2) return worst;
  std::vector<LinearNodeOperator> squares;
  std::vector<LinearNodeOperator> locations;
  for (std::size_t j = 0; j < k; ++j) {
    const auto grad = feature_derivative(graph, f.column(j));
    squares.push_back(grad * grad);
    locations.push_back(location_observable(f.column(j)));
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      worst = std::max(worst, operator_norm(commutator(squares[j], locations[i]), 1e-8, 500).value);
    }
  }
  return worst;
}

double mixed_derivative_rhs(const Graph& graph, const RVector& f, const RVector& h, const CVector& g,
                            double r) {
  require_length(graph, g.size());
  const double v0 = variance(location_observable(f), g);
  if (!(v0 > kVarianceFloor)) fail(ErrorCode::Degenerate, "signal has variance at or below the floor");
  require_length(graph, h.size());
  // X_h = c I commutes with everything; skip the rounding noise.
  if (h.size() == 0 || (h.array() == h(0)).all()) return 0.0;
  const auto grad = feature_derivative(graph, f);
  const auto smooth = smoothing_operator(graph, f);
  const CVector hc = h.cast<Complex>();

  const auto c = [&](const CVector& u) -> CVector { return laplacian_square_commutator(grad, f, u); };
  const CVector first_vec = hc.cwiseProduct(c(g)) - c(hc.cwiseProduct(g));
  const double first = inner(first_vec, g).real();

  const auto w_grad = [&](const CVector& u) -> CVector { return smooth.apply(grad.apply(u)); };
  const CVector second_vec = hc.cwiseProduct(w_grad(g)) - w_grad(hc.cwiseProduct(g));
  const double second = inner(second_vec, g).real();

  return (first - 4.0 * r * second) / v0;
}

double sensitivity_probe(const LinearMap& phi, const CVector& g) {
  if (std::abs(g.norm() - 1.0) > 1e-9) fail(ErrorCode::Precondition, "signal must be normalized");
  const Eigen::Index n = g.size();

  std::mt19937_64 rng(0xC0FFEEULL);
  std::normal_distribution<double> normal;
  const auto random_vector = [&] {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
    return v;
  };
  for (int probe = 0; probe < 2; ++probe) {
    const CVector u = random_vector();
    const CVector v = random_vector();
    const Complex alpha(normal(rng), normal(rng));
    const Complex beta(normal(rng), normal(rng));
    const CVector pu = phi(u);
    const CVector pv = phi(v);
    const CVector combined = phi(alpha * u + beta * v);
    const double scale = std::abs(alpha) * pu.norm() + std::abs(beta) * pv.norm();
    if ((combined - alpha * pu - beta * pv).norm() > 1e-8 * std::max(1.0, scale)) {
      fail(ErrorCode::Contract, "sensitivity_probe requires a linear map");
    }
  }

  const CVector out = phi(g);
  const double energy = out.squaredNorm();
  if (!(energy > kNormFloor * kNormFloor)) fail(ErrorCode::Degenerate, "filter output is zero");
  constexpr double d = 1.0;
  const CVector perturbed = phi(g + d * g);
  return inner(perturbed - out, out).real() / (d * energy);
}

}  // namespace schro
