#pragma once

#include <functional>
#include <string>

#include "schro/graph.hpp"
#include "schro/operators.hpp"

namespace schro {

/// Initial states with location variance at or below this are rejected by the
/// routing measure.
inline constexpr double kVarianceFloor = 1e-10;

/// <a, b> = sum_v a(v) conj(b(v)).
Complex inner(const CVector& a, const CVector& b);

struct ObservableStats {
  double mean = 0.0;
  double variance = 0.0;
  std::string observable_id;
};

struct RoutingReport {
  double measure = 0.0;
  double target = 0.0;
  double initial_variance = 0.0;
  double final_mean = 0.0;
  double final_variance = 0.0;
};

/// Re<M g, g> for self-adjoint M and unit g. Throws Error(Precondition) if
/// | ||g|| - 1 | > 1e-9, Error(Contract) for non-self-adjoint M or an
/// imaginary residue above 1e-10 (relative to max(1, |mean|)).
double mean(const LinearNodeOperator& obs, const CVector& g);

/// ||(M - E I) g||^2, clamped to 0 when within 1e-12 below zero.
double variance(const LinearNodeOperator& obs, const CVector& g);

/// E_{M^2}(g) - E_M(g)^2, the second route used for cross-checking.
double variance_by_moments(const LinearNodeOperator& obs, const CVector& g);

ObservableStats stats(const LinearNodeOperator& obs, const CVector& g, std::string id);

/// <(M - r)^2 gt, gt> / V_M(g0). Also evaluates (V(gt) + (r - E(gt))^2) / V(g0)
/// and throws Error(Numerical) if the two routes differ by more than
/// 1e-10 * max(1, measure). Throws Error(Degenerate) when V_M(g0) <= kVarianceFloor.
RoutingReport routing_measure(const LinearNodeOperator& obs, const CVector& g0, const CVector& gt,
                              double r);

/// Largest direct-vs-decomposed routing discrepancy seen by routing_measure in this process.
double routing_identity_worst_residual();

struct EdgeSignals {
  RVector e_gh;  // a(v,w) g(v) g(w) sin(theta (h(w) - h(v))), ordered pairs
  RVector e_f;   // f(w) - f(v)
  double inner = 0.0;
};

/// Expected momentum of D[theta h] g for real g in closed form:
/// sum over ordered pairs (v,w) of a g(v) g(w) (f(w) - f(v)) sin(theta (h(w) - h(v))).
double momentum_mean_modulated_closed_form(const Graph& graph, const RVector& f, const RVector& h,
                                           double theta, const RVector& g,
                                           EdgeSignals* edges = nullptr);

/// 2 Re<i grad_f g, W_f g>.
double dynamics_rhs_single(const Graph& graph, const RVector& f, const CVector& g);

/// 2 Re<i grad_k g, W_k g> - sum_{j != k} Re<[i grad_j^2, X_k] g, g>.
/// Throws Error(Contract) when a cross term has imaginary residue above 1e-10.
double dynamics_rhs_multi(const Graph& graph, const FeatureLocations& f, std::size_t k,
                          const CVector& g);

/// E_{i[Delta, X^2]}(g) - 4 E_X(g) Re<i grad g, W g> with Delta = -grad_f^2.
double variance_rhs(const Graph& graph, const RVector& f, const CVector& g);

/// ||W_f g - g||, the smallest eps for which g is eps-f regular.
double epsilon_regularity(const Graph& graph, const RVector& f, const CVector& g);

/// max over i != j of ||[grad_{f_j}^2, X_{f_i}]||_op; 0 when K = 1.
double commuting_deficiency(const Graph& graph, const FeatureLocations& f);

/// (<[X_h,[Delta,X_f^2]] g, g> - 4 r Re<[X_h, W_f grad_f] g, g>) / V_{X_f}(g).
double mixed_derivative_rhs(const Graph& graph, const RVector& f, const RVector& h,
                            const CVector& g, double r);

using LinearMap = std::function<CVector(const CVector&)>;

/// Probed differential <Phi(g + d g) - Phi(g), Phi(g)> / (d ||Phi(g)||^2) at d = 1.
/// Checks linearity of phi on seeded random probes (Error(Contract) otherwise) and
/// throws Error(Degenerate) when Phi(g) = 0.
double sensitivity_probe(const LinearMap& phi, const CVector& g);

}  // namespace schro
