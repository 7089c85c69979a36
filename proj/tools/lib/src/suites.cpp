#include "schro_tools/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>

#include <Eigen/SVD>

#include "schro/diagnose.hpp"
#include "schro/error.hpp"
#include "schro/filter.hpp"
#include "schro/observe.hpp"
#include "schro/operators.hpp"
#include "schro/pmo.hpp"
#include "schro/propagate.hpp"
#include "schro_tools/instances.hpp"

namespace schro::tools {

namespace {

constexpr Complex kI{0.0, 1.0};

/// Running worst case of a residual sequence.
class Tracker {
 public:
  Tracker(std::string name, double tolerance) : name_(std::move(name)), tolerance_(tolerance) {}

  void add(double residual, const std::string& where) {
    ++cases_;
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    if (cases_ == 1 || residual > worst_) {
      worst_ = residual;
      where_ = where;
    }
  }

  SuiteResult result() const {
    SuiteResult r;
    r.name = name_;
    r.cases = cases_;
    r.worst = worst_;
    r.tolerance = tolerance_;
    r.passed = cases_ > 0 && worst_ <= tolerance_;
    r.detail = where_;
    return r;
  }

 private:
  std::string name_;
  double tolerance_;
  int cases_ = 0;
  double worst_ = 0.0;
  std::string where_;
};

std::string tag(int i) { return "instance " + std::to_string(i); }

/// |a - b| / max(|b|, floor / rel): compare against rel for "rel tol with absolute floor".
double relative(double a, double b, double rel, double floor) {
  return std::abs(a - b) / std::max(std::abs(b), floor / rel);
}

LinearNodeOperator momentum(const Graph& graph, const RVector& f) {
  return kI * feature_derivative(graph, f);
}

CVector evolve_vec(const Propagator& p, double t, const CVector& g) { return p.evolve(t, CMatrix(g)).col(0); }

double dense_op_norm(const LinearNodeOperator& op) {
  const CMatrix m = op.to_dense();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// ---- propagation -----------------------------------------------------------------

SuiteResult unitarity_dense(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("unitarity-dense", 1e-10);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 64, 1, 3);
    const double t = uniform(rng, -2.0, 2.0);
    const auto lap = schrodinger_laplacian(inst.graph, inst.f);
    const double after = evolve_dense(lap, t, Signal::from_channel(inst.g)).values().norm();
    tr.add(std::abs(after - 1.0), tag(i));
  }
  return tr.result();
}

SuiteResult unitarity_taylor(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("unitarity-taylor", 1e-6);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 64, 1, 3);
    const double t = uniform(rng, -2.0, 2.0);
    const auto lap = schrodinger_laplacian(inst.graph, inst.f);
    tr.add(unitarity_defect(lap, t, Signal::from_channel(inst.g)), tag(i));
  }
  return tr.result();
}

SuiteResult taylor_matches_dense(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("taylor-vs-dense", 1e-8);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 3);
    const double t = uniform(rng, -2.0, 2.0);
    const auto lap = schrodinger_laplacian(inst.graph, inst.f);
    const Signal g = Signal::from_channel(inst.g);
    tr.add((evolve(lap, t, g).values() - evolve_dense(lap, t, g).values()).norm(), tag(i));
  }
  return tr.result();
}

// ---- observables -----------------------------------------------------------------

SuiteResult momentum_conservation(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("momentum-conservation", 1e-8);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 1);
    const RVector f = inst.f.column(0);
    const auto mom = momentum(inst.graph, f);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, f));
    const double e0 = mean(mom, inst.g);
    for (const double t : {0.1, 0.5, 1.0, 2.0}) {
      const CVector gt = normalized(evolve_vec(prop, t, inst.g));
      tr.add(std::abs(mean(mom, gt) - e0), tag(i) + " t=" + std::to_string(t));
    }
  }
  return tr.result();
}

SuiteResult variance_routes(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("variance-routes", 1e-10);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 64, 1, 1);
    const auto x = location_observable(inst.f.column(0));
    tr.add(std::abs(variance(x, inst.g) - variance_by_moments(x, inst.g)), tag(i));
  }
  return tr.result();
}

constexpr double kFdStep = 1e-5;

SuiteResult dynamics_single(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("dynamics-single", 1e-4);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 1);
    const RVector f = inst.f.column(0);
    const auto x = location_observable(f);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, f));
    const double up = mean(x, normalized(evolve_vec(prop, kFdStep, inst.g)));
    const double down = mean(x, normalized(evolve_vec(prop, -kFdStep, inst.g)));
    const double fd = (up - down) / (2.0 * kFdStep);
    tr.add(relative(dynamics_rhs_single(inst.graph, f, inst.g), fd, 1e-4, 1e-8), tag(i));
  }
  return tr.result();
}

SuiteResult dynamics_multi(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("dynamics-multi", 1e-4);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 2, 3);
    const std::size_t k = uniform_index(rng, 0, inst.f.n_features() - 1);
    const auto x = location_observable(inst.f, k);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, inst.f));
    const double up = mean(x, normalized(evolve_vec(prop, kFdStep, inst.g)));
    const double down = mean(x, normalized(evolve_vec(prop, -kFdStep, inst.g)));
    const double fd = (up - down) / (2.0 * kFdStep);
    tr.add(relative(dynamics_rhs_multi(inst.graph, inst.f, k, inst.g), fd, 1e-4, 1e-8), tag(i));
  }
  return tr.result();
}

SuiteResult variance_dynamics(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("variance-dynamics", 1e-4);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 1);
    const RVector f = inst.f.column(0);
    const auto x = location_observable(f);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, f));
    const double up = variance(x, normalized(evolve_vec(prop, kFdStep, inst.g)));
    const double down = variance(x, normalized(evolve_vec(prop, -kFdStep, inst.g)));
    const double fd = (up - down) / (2.0 * kFdStep);
    tr.add(relative(variance_rhs(inst.graph, f, inst.g), fd, 1e-4, 1e-8), tag(i));
  }
  return tr.result();
}

SuiteResult modulated_momentum(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("modulated-momentum", 1e-10);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 64, 2, 2);
    const RVector f = inst.f.column(0);
    const RVector h = inst.f.column(1);
    const RVector g = random_real_unit(rng, inst.graph.n_nodes());
    const double theta = uniform(rng, -5.0, 5.0);
    const double closed = momentum_mean_modulated_closed_form(inst.graph, f, h, theta, g);
    const CVector dg = modulation(h, theta).apply(CVector(g.cast<Complex>()));
    tr.add(std::abs(closed - mean(momentum(inst.graph, f), dg)), tag(i));
  }
  return tr.result();
}

SuiteResult real_momentum(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("real-momentum", 1e-12);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 64, 1, 1);
    const RVector g = random_real_unit(rng, inst.graph.n_nodes());
    tr.add(std::abs(mean(momentum(inst.graph, inst.f.column(0)), CVector(g.cast<Complex>()))), tag(i));
  }
  return tr.result();
}

SuiteResult smoothing_lemmas(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("smoothing-lemmas", 1e-10);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 1);
    const RVector f = inst.f.column(0);
    const auto grad = feature_derivative(inst.graph, f);
    const auto x = location_observable(f);
    const auto w = smoothing_operator(inst.graph, f);
    const auto lap = schrodinger_laplacian(inst.graph, f);
    const CMatrix w_dense = w.to_dense();
    const double first = (w_dense - commutator(x, grad).to_dense()).cwiseAbs().maxCoeff();
    const CMatrix lhs = commutator(lap, x).to_dense();
    const CMatrix g_dense = grad.to_dense();
    const CMatrix rhs = g_dense * w_dense + w_dense * g_dense;
    const double second = (lhs - rhs).cwiseAbs().maxCoeff();
    tr.add(std::max(first, second), tag(i));
  }
  return tr.result();
}

SuiteResult routing_identity(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("routing-identity", 1e-10);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 3);
    const std::size_t k = uniform_index(rng, 0, inst.f.n_features() - 1);
    const auto x = location_observable(inst.f, k);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, inst.f));
    const CVector gt = normalized(evolve_vec(prop, uniform(rng, -2.0, 2.0), inst.g));
    const double r = uniform(rng, -1.0, 1.0);
    const RoutingReport rep = routing_measure(x, inst.g, gt, r);
    const double decomposed =
        (rep.final_variance + (r - rep.final_mean) * (r - rep.final_mean)) / rep.initial_variance;
    tr.add(std::abs(rep.measure - decomposed) / std::max(1.0, std::abs(rep.measure)), tag(i));
  }
  // Every routing_measure call made so far in this process is included.
  tr.add(routing_identity_worst_residual(), "all routing_measure calls in this process");
  return tr.result();
}

SuiteResult deviation_single(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("deviation-single", 1e-9);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 1);
    const RVector f = inst.f.column(0);
    // Mix in smooth states so the bound is not trivially loose.
    const auto w = smoothing_operator(inst.graph, f);
    CVector g = inst.g;
    if (i % 2 == 1) g = normalized(inst.g + 4.0 * w.apply(inst.g));
    const DensePropagator prop(schrodinger_laplacian(inst.graph, f));
    const CVector gt = normalized(evolve_vec(prop, uniform(rng, 0.0, 1.0), g));
    const double lhs = std::abs(dynamics_rhs_single(inst.graph, f, gt) - 2.0 * mean(momentum(inst.graph, f), g));
    const double eps = epsilon_regularity(inst.graph, f, gt);
    const double bound = 2.0 * eps * dense_op_norm(feature_derivative(inst.graph, f));
    tr.add(lhs - bound, tag(i));
  }
  return tr.result();
}

SuiteResult deviation_multi(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("deviation-multi", 1e-9);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_instance(rng, 4, 40, 3, 3);
    const std::size_t k = uniform_index(rng, 0, 2);
    const RVector fk = inst.f.column(k);
    const double lhs =
        std::abs(dynamics_rhs_multi(inst.graph, inst.f, k, inst.g) - 2.0 * mean(momentum(inst.graph, fk), inst.g));
    const double eps = epsilon_regularity(inst.graph, fk, inst.g);
    const double delta = commuting_deficiency(inst.graph, inst.f);
    const double bound = 2.0 * eps * dense_op_norm(feature_derivative(inst.graph, fk)) + 2.0 * delta;
    tr.add(lhs - bound, tag(i));
  }
  return tr.result();
}

SuiteResult mixed_derivative(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("mixed-derivative", 1e-3);
  constexpr double step = 1e-4;
  for (int i = 0; i < 25; ++i) {
    const auto inst = random_instance(rng, 6, 40, 2, 2);
    const RVector f = inst.f.column(0);
    const RVector h = inst.f.column(1);
    const CVector g = random_real_unit(rng, inst.graph.n_nodes()).cast<Complex>();
    const double r = uniform(rng, -1.0, 1.0);
    const auto x = location_observable(f);
    const DensePropagator prop(schrodinger_laplacian(inst.graph, f));
    const auto p = [&](double t, double theta) {
      const CVector gt = normalized(evolve_vec(prop, t, modulation(h, theta).apply(g)));
      return routing_measure(x, g, gt, r).measure;
    };
    const double fd = (p(step, step) - p(step, -step) - p(-step, step) + p(-step, -step)) / (4.0 * step * step);
    const double closed = mixed_derivative_rhs(inst.graph, f, h, g, r);
    tr.add(std::abs(closed - fd) / std::max(std::abs(fd), 1e-6), tag(i));

    const RVector flat = RVector::Constant(h.size(), uniform(rng, -2.0, 2.0));
    const double zero = mixed_derivative_rhs(inst.graph, f, flat, g, r);
    tr.add(zero == 0.0 ? 0.0 : std::numeric_limits<double>::infinity(), tag(i) + " constant h");
  }
  return tr.result();
}

SuiteResult sensitivity(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("sensitivity-probe", 1e-10);
  for (int i = 0; i < 25; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 2);
    const RVector h = inst.f.column(inst.f.n_features() - 1);
    const double theta = uniform(rng, -5.0, 5.0);
    const double t = uniform(rng, -2.0, 2.0);
    const Complex scale(uniform(rng, 0.5, 2.0), uniform(rng, -1.0, 1.0));
    const TaylorPropagator prop(schrodinger_laplacian(inst.graph, inst.f), {});
    const auto mod = modulation(h, theta);
    const LinearMap phi = [&](const CVector& u) { return CVector(scale * evolve_vec(prop, t, mod.apply(u))); };
    tr.add(std::abs(sensitivity_probe(phi, inst.g) - 1.0), tag(i));
  }
  return tr.result();
}

// ---- filter ----------------------------------------------------------------------

FilterParams random_params(Rng& rng, std::size_t m, std::size_t k, std::size_t j, std::size_t d) {
  FilterParams p;
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < m; ++i) {
    FilterTerm term;
    term.t = uniform(rng, -1.5, 1.5);
    term.theta = uniform(rng, -3.0, 3.0);
    term.direction = RVector(static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < term.direction.size(); ++a) term.direction(a) = normal(rng);
    term.mix = CMatrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d));
    for (Eigen::Index a = 0; a < term.mix.size(); ++a) term.mix.data()[a] = Complex(normal(rng), normal(rng));
    p.terms.push_back(std::move(term));
  }
  return p;
}

CMatrix random_block(Rng& rng, std::size_t n, std::size_t j) {
  std::normal_distribution<double> normal;
  CMatrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  for (Eigen::Index a = 0; a < g.size(); ++a) g.data()[a] = Complex(normal(rng), normal(rng));
  return g;
}

SuiteResult filter_linearity(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("filter-linearity", 1e-9);
  for (int i = 0; i < 30; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 3);
    const std::size_t n = inst.graph.n_nodes();
    const std::size_t j = uniform_index(rng, 1, 3);
    const auto params = random_params(rng, uniform_index(rng, 1, 3), inst.f.n_features(), j, uniform_index(rng, 1, 3));
    const CMatrix g1 = random_block(rng, n, j);
    const CMatrix g2 = random_block(rng, n, j);
    const Complex a(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const Complex b(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const auto psi = [&](const CMatrix& g) {
      return schrodinger_filter(inst.graph, inst.f, params, Signal(g)).values();
    };
    const CMatrix lhs = psi(a * g1 + b * g2);
    const CMatrix rhs = a * psi(g1) + b * psi(g2);
    tr.add((lhs - rhs).norm() / std::max(1.0, rhs.norm()), tag(i));
  }
  return tr.result();
}

SuiteResult filter_unitary_term(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("filter-unitary-term", 1e-6);
  for (int i = 0; i < 30; ++i) {
    const auto inst = random_instance(rng, 4, 48, 1, 3);
    const std::size_t j = uniform_index(rng, 1, 3);
    auto params = random_params(rng, 1, inst.f.n_features(), j, j);
    Eigen::HouseholderQR<CMatrix> qr(params.terms[0].mix);
    params.terms[0].mix = qr.householderQ() * CMatrix::Identity(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    const CMatrix g = random_block(rng, inst.graph.n_nodes(), j);
    const double out = schrodinger_filter(inst.graph, inst.f, params, Signal(g)).values().norm();
    tr.add(std::abs(out - g.norm()) / g.norm(), tag(i));
  }
  return tr.result();
}

SuiteResult activation_idempotent(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("activation-idempotent", 0.0);
  for (int i = 0; i < 20; ++i) {
    const CMatrix g = random_block(rng, uniform_index(rng, 1, 50), uniform_index(rng, 1, 4));
    for (const auto kind : {Activation::SplitRelu, Activation::Modulus}) {
      const CMatrix once = activation(g, kind);
      tr.add((activation(once, kind) - once).cwiseAbs().maxCoeff(), tag(i) + " " + to_string(kind));
    }
  }
  return tr.result();
}

// ---- windows ---------------------------------------------------------------------

SuiteResult window_partition(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("window-partition", 1e-10);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = uniform_index(rng, 5, 200);
    const auto f = random_features(rng, n, 2);
    const std::size_t bins = uniform_index(rng, 2, 8);
    const auto set = build_windows(f, uniform_index(rng, 0, 1), bins);
    tr.add(set.partition_defect(), tag(i));
    const CVector g = random_complex_unit(rng, n);
    double split = 0.0;
    for (const auto& w : set.windows()) split += (w.weight.cwiseSqrt().cast<Complex>().cwiseProduct(g)).squaredNorm();
    tr.add(std::abs(split - 1.0), tag(i) + " energy split");
  }
  return tr.result();
}

SuiteResult shift_scale_invariance(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("shift-scale-invariance", 1e-10);
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_instance(rng, 8, 48, 1, 2);
    const auto lap = schrodinger_laplacian(inst.graph, inst.f);
    const DensePropagator prop(lap);
    const double t = uniform(rng, 0.0, 1.0);
    const double c = uniform(rng, 0.1, 10.0);
    const LayerFn layer = [&](const CMatrix& g) { return prop.evolve(t, g); };
    const LayerFn scaled = [&](const CMatrix& g) { return CMatrix(c * prop.evolve(t, g)); };
    const auto windows = build_windows(inst.f, 0, 3);
    const Signal g = Signal::from_channel(inst.g);
    const auto a = relative_shift(layer, g, inst.f, windows);
    const auto b = relative_shift(scaled, g, inst.f, windows);
    double worst = 0.0;
    for (std::size_t e = 0; e < a.entries.size(); ++e) {
      if (a.entries[e].shift.has_value() != b.entries[e].shift.has_value()) {
        worst = std::numeric_limits<double>::infinity();
      } else if (a.entries[e].shift) {
        worst = std::max(worst, std::abs(*a.entries[e].shift - *b.entries[e].shift));
      }
    }
    tr.add(worst, tag(i));
  }
  return tr.result();
}

// ---- PMO -------------------------------------------------------------------------

SuiteResult pmo_gradient(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("pmo-gradient", 1e-3);
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = uniform_index(rng, 6, 16);
    const Graph graph = random_graph(rng, n, 3.0);
    const std::size_t m = uniform_index(rng, 2, 3);
    const auto q = random_features(rng, n, m);
    RMatrix t(static_cast<Eigen::Index>(m), 2);
    for (Eigen::Index a = 0; a < t.size(); ++a) t.data()[a] = uniform(rng, -1.0, 1.0);
    const PMOProblem problem(graph, q, 1.0, 1e-14);
    const RMatrix full = problem.gradient_fd(t, 1e-5);
    const RMatrix half = problem.gradient_fd(t, 5e-6);
    tr.add((full - half).norm() / std::max(half.norm(), 1e-8), tag(i));
  }
  return tr.result();
}

SuiteResult pmo_permutation(std::uint64_t seed) {
  Rng rng(seed);
  Tracker tr("pmo-permutation", 1e-8);
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = uniform_index(rng, 6, 24);
    const Graph graph = random_graph(rng, n, 3.0);
    const auto q = random_features(rng, n, 3);
    RMatrix t(3, 3);
    for (Eigen::Index a = 0; a < t.size(); ++a) t.data()[a] = uniform(rng, -1.0, 1.0);
    const RMatrix swapped = t(Eigen::all, std::vector<int>{2, 0, 1});
    const double a = pmo_objective(graph, q, t, 1.0);
    const double b = pmo_objective(graph, q, swapped, 1.0);
    tr.add(std::abs(a - b) / std::max(1.0, std::abs(a)), tag(i));
  }
  return tr.result();
}

std::vector<Suite> make_suites() {
  return {
      {"unitarity-dense", "dense-oracle evolution preserves the norm", unitarity_dense},
      {"unitarity-taylor", "truncated-Taylor evolution preserves the norm", unitarity_taylor},
      {"taylor-vs-dense", "Taylor and dense evolution agree", taylor_matches_dense},
      {"momentum-conservation", "expected momentum is constant in time", momentum_conservation},
      {"variance-routes", "both variance formulas agree", variance_routes},
      {"dynamics-single", "expected-location rate matches finite differences", dynamics_single},
      {"dynamics-multi", "multi-feature expected-location rate matches finite differences", dynamics_multi},
      {"variance-dynamics", "variance rate matches finite differences", variance_dynamics},
      {"modulated-momentum", "closed-form momentum of a modulated real signal", modulated_momentum},
      {"real-momentum", "real signals carry no momentum", real_momentum},
      {"smoothing-lemmas", "W = [X, grad] and [Delta, X] = grad W + W grad", smoothing_lemmas},
      {"routing-identity", "routing measure agrees with its mean/variance decomposition", routing_identity},
      {"deviation-single", "single-feature deviation bound", deviation_single},
      {"deviation-multi", "multi-feature deviation bound", deviation_multi},
      {"mixed-derivative", "mixed derivative of the routing measure", mixed_derivative},
      {"sensitivity-probe", "probe equals one for modulate-then-evolve maps", sensitivity},
      {"filter-linearity", "filters are linear in the signal", filter_linearity},
      {"filter-unitary-term", "single term with unitary mix preserves the norm", filter_unitary_term},
      {"activation-idempotent", "activations are idempotent", activation_idempotent},
      {"window-partition", "windows form a partition of unity", window_partition},
      {"shift-scale-invariance", "relative shift ignores layer scale", shift_scale_invariance},
      {"pmo-gradient", "finite-difference gradient is step-stable", pmo_gradient},
      {"pmo-permutation", "objective is invariant under column permutation", pmo_permutation},
  };
}

}  // namespace

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites = make_suites();
  return suites;
}

std::vector<const Suite*> select_suites(const std::string& pattern) {
  std::vector<const Suite*> out;
  for (const auto& s : all_suites()) {
    if (pattern.empty() || s.name.find(pattern) != std::string::npos) out.push_back(&s);
  }
  return out;
}

SuiteResult run_suite(const Suite& suite, std::uint64_t seed) {
  try {
    return suite.run(seed);
  } catch (const std::exception& e) {
    SuiteResult r;
    r.name = suite.name;
    r.passed = false;
    r.worst = std::numeric_limits<double>::infinity();
    r.detail = std::string("exception: ") + e.what();
    return r;
  }
}

nlohmann::json to_json(const SuiteResult& r) {
  return {{"name", r.name},
          {"passed", r.passed},
          {"cases", r.cases},
          {"worst", std::isfinite(r.worst) ? nlohmann::json(r.worst) : nlohmann::json("inf")},
          {"tolerance", r.tolerance},
          {"detail", r.detail}};
}

}  // namespace schro::tools
