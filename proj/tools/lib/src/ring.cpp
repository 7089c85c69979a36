#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <random>

#include "schro/diagnose.hpp"
#include "schro/error.hpp"
#include "schro/operators.hpp"
#include "schro/serialize.hpp"
#include "schro_tools/config.hpp"
#include "schro_tools/experiments.hpp"

namespace schro::tools {

using nlohmann::json;

namespace {

constexpr std::size_t kAngle = 2;  // index of the angle feature in ring_graph
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Parameter vector layout per model kind:
//   modulated:   per term [log t, theta, d_cos, d_sin, d_angle, re w, im w]
//   unmodulated: per term [log t, re w, im w]
//   diffusion:   per term [log t, w]
std::size_t stride(RingModelKind kind) {
  switch (kind) {
    case RingModelKind::Modulated: return 7;
    case RingModelKind::Unmodulated: return 3;
    case RingModelKind::Diffusion: return 2;
  }
  return 0;
}

FilterParams decode(RingModelKind kind, const RVector& p) {
  const std::size_t s = stride(kind);
  FilterParams out;
  for (std::size_t m = 0; m * s < static_cast<std::size_t>(p.size()); ++m) {
    const auto* v = p.data() + m * s;
    FilterTerm term;
    term.t = std::exp(v[0]);
    term.direction = RVector::Zero(3);
    term.mix = CMatrix::Zero(1, 1);
    switch (kind) {
      case RingModelKind::Modulated:
        term.theta = v[1];
        term.direction << v[2], v[3], v[4];
        term.mix(0, 0) = Complex(v[5], v[6]);
        break;
      case RingModelKind::Unmodulated:
        term.mix(0, 0) = Complex(v[1], v[2]);
        break;
      case RingModelKind::Diffusion:
        term.mix(0, 0) = v[1];
        break;
    }
    out.terms.push_back(std::move(term));
  }
  return out;
}

RVector encode(RingModelKind kind, const FilterParams& params) {
  const std::size_t s = stride(kind);
  RVector p(static_cast<Eigen::Index>(s * params.n_terms()));
  for (std::size_t m = 0; m < params.n_terms(); ++m) {
    const auto& term = params.terms[m];
    auto* v = p.data() + m * s;
    v[0] = std::log(term.t);
    const Complex w = term.mix(0, 0);
    switch (kind) {
      case RingModelKind::Modulated:
        v[1] = term.theta;
        v[2] = term.direction(0);
        v[3] = term.direction(1);
        v[4] = term.direction(2);
        v[5] = w.real();
        v[6] = w.imag();
        break;
      case RingModelKind::Unmodulated:
        v[1] = w.real();
        v[2] = w.imag();
        break;
      case RingModelKind::Diffusion:
        v[1] = w.real();
        break;
    }
  }
  return p;
}

RMatrix columns(const RMatrix& m, const std::vector<std::size_t>& idx) {
  RMatrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
  return out;
}

// Single-term model with unit mix; the best real scale is applied in closed form.
struct GridPoint {
  double loss = std::numeric_limits<double>::infinity();
  double t = 1.0;
  double theta = 0.0;
  double scale = 1.0;
};

GridPoint grid_search(const RingProblem& problem, RingModelKind kind, const RMatrix& x, const RMatrix& y) {
  const auto n = static_cast<double>(x.size());
  std::vector<double> thetas{0.0};
  double lt_min = 0.0, lt_max = 4.5;
  if (kind == RingModelKind::Modulated) {
    const int limit = static_cast<int>(problem.n_nodes() / 4);
    thetas.clear();
    for (int th = -limit; th <= limit; ++th) thetas.push_back(th);
  } else if (kind == RingModelKind::Diffusion) {
    lt_min = -3.0;
    lt_max = 3.0;
  }
  const CMatrix xc = x.cast<Complex>();
  GridPoint best;
  const int steps = static_cast<int>(std::lround((lt_max - lt_min) / 0.05));
  for (const double theta : thetas) {
    for (int i = 0; i <= steps; ++i) {
      FilterTerm term;
      term.t = std::pow(10.0, lt_min + (lt_max - lt_min) * i / steps);
      term.theta = theta;
      term.direction = RVector::Unit(3, kAngle);
      term.mix = CMatrix::Identity(1, 1);
      const RMatrix a = problem.predict(kind, FilterParams{{term}}, xc);
      const double aa = a.squaredNorm();
      if (!(aa > 0.0)) continue;
      const double ay = (a.array() * y.array()).sum();
      const double scale = ay / aa;
      const double loss = (scale * a - y).squaredNorm() / n;
      if (loss < best.loss) best = {loss, term.t, theta, scale};
    }
  }
  return best;
}

std::string shift_mean(const ShiftReport& r) { return r.mean ? fmt(*r.mean) : std::string("missing"); }

}  // namespace

std::string to_string(RingModelKind kind) {
  switch (kind) {
    case RingModelKind::Modulated: return "modulated";
    case RingModelKind::Unmodulated: return "unmodulated";
    case RingModelKind::Diffusion: return "diffusion";
  }
  return "?";
}

// ---- config ----------------------------------------------------------------------

RingConfig RingConfig::from_json(const json& j) {
  ConfigReader r(j, "ring config");
  RingConfig c;
  const auto count = [&](const char* key, std::size_t fallback, std::size_t min) {
    const long v = r.integer(key, static_cast<long>(fallback));
    if (v < static_cast<long>(min)) config_error(std::string("ring ") + key + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  };
  c.nodes = count("nodes", c.nodes, 8);
  c.shift = static_cast<int>(r.integer("shift", c.shift));
  c.samples = count("samples", c.samples, 10);
  c.var_min = r.number("var_min", c.var_min);
  c.var_max = r.number("var_max", c.var_max);
  c.noise = r.number("noise", c.noise);
  c.channels = count("channels", c.channels, 1);
  c.iterations = static_cast<int>(r.integer("iterations", c.iterations));
  c.learning_rate = r.number("learning_rate", c.learning_rate);
  c.batch = count("batch", c.batch, 1);
  c.fd_step = r.number("fd_step", c.fd_step);
  c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long>(c.seed)));
  c.bins = count("bins", c.bins, 2);
  c.min_energy_fraction = r.number("min_energy_fraction", c.min_energy_fraction);
  c.probe_variance = r.number("probe_variance", c.probe_variance);
  if (r.has("evolution")) c.evolution = evolution_from_json(r.object("evolution"), "ring config.evolution");
  r.finish();
  if (!(c.var_min > 0.0 && c.var_max >= c.var_min)) config_error("ring variance range must satisfy 0 < var_min <= var_max");
  if (c.noise < 0.0) config_error("ring noise must be >= 0");
  if (c.channels > 8) config_error("ring channels must be <= 8");
  if (c.iterations < 0) config_error("ring iterations must be >= 0");
  if (!(c.learning_rate > 0.0) || !(c.fd_step > 0.0)) config_error("ring learning_rate and fd_step must be > 0");
  if (c.min_energy_fraction < 0.0 || c.min_energy_fraction >= 1.0) {
    config_error("ring min_energy_fraction must be in [0, 1)");
  }
  if (!(c.probe_variance > 0.0)) config_error("ring probe_variance must be > 0");
  return c;
}

json RingConfig::to_json() const {
  return {{"nodes", nodes},
          {"shift", shift},
          {"samples", samples},
          {"var_min", var_min},
          {"var_max", var_max},
          {"noise", noise},
          {"channels", channels},
          {"iterations", iterations},
          {"learning_rate", learning_rate},
          {"batch", batch},
          {"fd_step", fd_step},
          {"seed", seed},
          {"bins", bins},
          {"min_energy_fraction", min_energy_fraction},
          {"probe_variance", probe_variance},
          {"evolution", tools::to_json(evolution)}};
}

// ---- data ------------------------------------------------------------------------

RingData make_ring_data(const RingConfig& cfg) {
  const std::size_t n = cfg.nodes;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> var_dist(cfg.var_min, cfg.var_max);
  std::uniform_int_distribution<std::size_t> shift_dist(0, n - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  RMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.samples));
  RMatrix y(x.rows(), x.cols());
  const auto roll = ((cfg.shift % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    const double var = var_dist(rng);
    const std::size_t centre = shift_dist(rng);
    RVector v(x.rows());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t dist = std::min(i, n - i);
      const double a = 2.0 * kPi * static_cast<double>(dist) / static_cast<double>(n);
      v(static_cast<Eigen::Index>((i + centre) % n)) = std::exp(-a * a / (2.0 * var));
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += cfg.noise * noise(rng);
    v /= v.norm();
    x.col(s) = v;
    for (std::size_t i = 0; i < n; ++i) {
      y(static_cast<Eigen::Index>((i + static_cast<std::size_t>(roll)) % n), s) = v(static_cast<Eigen::Index>(i));
    }
  }

  const auto n_train = static_cast<Eigen::Index>(cfg.samples * 8 / 10);
  const auto n_val = static_cast<Eigen::Index>(cfg.samples / 10);
  const auto n_test = x.cols() - n_train - n_val;
  RingData d;
  d.train_x = x.leftCols(n_train);
  d.train_y = y.leftCols(n_train);
  d.val_x = x.middleCols(n_train, n_val);
  d.val_y = y.middleCols(n_train, n_val);
  d.test_x = x.rightCols(n_test);
  d.test_y = y.rightCols(n_test);
  return d;
}

// ---- problem ---------------------------------------------------------------------

RingProblem::RingProblem(const RingConfig& cfg) : n_(cfg.nodes) {
  auto [graph, features] = ring_graph(cfg.nodes);
  graph_ = std::move(graph);
  features_ = std::move(features);
  modulation_basis_ = features_;
  // The angle column jumps by 2 pi at the seam, so the Laplacian only sees
  // the smooth (cos, sin) embedding.
  const std::size_t smooth[] = {0, 1};
  schrodinger_ = make_propagator(schrodinger_laplacian(graph_, features_.select(smooth)), cfg.evolution);
  heat_ = std::make_unique<HeatPropagator>(graph_laplacian(graph_));
}

RMatrix RingProblem::predict(RingModelKind kind, const FilterParams& params, const CMatrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_) fail(ErrorCode::Contract, "ring input has the wrong node count");
  if (kind == RingModelKind::Diffusion) {
    CMatrix acc = CMatrix::Zero(x.rows(), x.cols());
    for (const auto& term : params.terms) acc += term.mix(0, 0).real() * heat_->evolve(term.t, x);
    return acc.cwiseAbs();
  }
  // Samples share one scalar mix per term, so widen it to w I_S and treat
  // the batch as S channels.
  FilterParams wide = params;
  const auto s = x.cols();
  for (auto& term : wide.terms) {
    const Complex w = term.mix(0, 0);
    term.mix = w * CMatrix::Identity(s, s);
    if (kind == RingModelKind::Unmodulated) term.theta = 0.0;
  }
  return schrodinger_filter(*schrodinger_, modulation_basis_, wide, x).cwiseAbs();
}

double RingProblem::mse(RingModelKind kind, const FilterParams& params, const RMatrix& x, const RMatrix& y) const {
  const RMatrix out = predict(kind, params, x.cast<Complex>());
  return (out - y).squaredNorm() / static_cast<double>(y.size());
}

// ---- trainer ---------------------------------------------------------------------

RingFit fit_ring_model(const RingProblem& problem, const RingData& data, RingModelKind kind, const RingConfig& cfg) {
  const GridPoint init = grid_search(problem, kind, data.train_x, data.train_y);
  if (!std::isfinite(init.loss)) fail(ErrorCode::Numerical, "ring grid search found no finite loss for " + to_string(kind));

  FilterParams params;
  for (std::size_t m = 0; m < cfg.channels; ++m) {
    FilterTerm term;
    term.t = init.t * (1.0 + 0.1 * static_cast<double>(m));
    term.theta = kind == RingModelKind::Modulated ? init.theta : 0.0;
    term.direction = kind == RingModelKind::Modulated ? RVector(RVector::Unit(3, kAngle)) : RVector(RVector::Zero(3));
    term.mix = CMatrix::Constant(1, 1, m == 0 ? Complex(init.scale, 0.0) : Complex(0.0, 0.0));
    params.terms.push_back(std::move(term));
  }

  RVector p = encode(kind, params);
  RVector best_p = p;
  double best_val = problem.mse(kind, decode(kind, p), data.val_x, data.val_y);

  std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(kind) + 1);
  std::vector<std::size_t> order(static_cast<std::size_t>(data.train_x.cols()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::min(cfg.batch, order.size());

  RVector m1 = RVector::Zero(p.size());
  RVector m2 = RVector::Zero(p.size());
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::deque<double> recent;
  RingFit fit;
  for (int it = 1; it <= cfg.iterations; ++it) {
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(batch));
    const RMatrix bx = columns(data.train_x, idx);
    const RMatrix by = columns(data.train_y, idx);
    const auto loss = [&](const RVector& q) { return problem.mse(kind, decode(kind, q), bx, by); };

    const double value = loss(p);
    recent.push_back(value);
    if (recent.size() > 5) recent.pop_front();
    const RVector grad = fd_gradient(loss, p, cfg.fd_step);
    if (!std::isfinite(value) || !grad.allFinite()) {
      std::string tail;
      for (const double v : recent) tail += " " + fmt(v);
      fail(ErrorCode::Numerical, "ring " + to_string(kind) + " training diverged at iteration " +
                                     std::to_string(it) + "; recent losses:" + tail);
    }
    fit.trace.emplace_back(it, value);

    m1 = b1 * m1 + (1.0 - b1) * grad;
    m2 = b2 * m2 + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, it);
    const double c2 = 1.0 - std::pow(b2, it);
    p.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);

    const double val = problem.mse(kind, decode(kind, p), data.val_x, data.val_y);
    if (std::isfinite(val) && val < best_val) {
      best_val = val;
      best_p = p;
    }
  }

  fit.params = decode(kind, best_p);
  fit.train_mse = problem.mse(kind, fit.params, data.train_x, data.train_y);
  fit.val_mse = best_val;
  fit.test_mse = problem.mse(kind, fit.params, data.test_x, data.test_y);
  return fit;
}

// ---- command ---------------------------------------------------------------------

ExperimentOutput run_ring(const RingConfig& cfg) {
  ExperimentOutput out;
  out.command = "ring";
  out.config = cfg.to_json();

  const RingData data = make_ring_data(cfg);
  const RingProblem problem(cfg);
  const RingModelKind kinds[] = {RingModelKind::Modulated, RingModelKind::Unmodulated, RingModelKind::Diffusion};

  // Probe: a Gaussian bump on the mirror axis of the window layout. The ring
  // reflection n -> N-1-n maps the angle affinely about that axis and swaps
  // the windows, so a reflection-equivariant layer (any diffusion) has zero
  // mean shift and a nonzero value means directed transport.
  const WindowSet windows = build_windows(problem.features(), kAngle, cfg.bins);
  const auto& centers = windows.axes.front().centers;
  const double axis = 0.5 * (centers.front() + centers.back());
  const RVector angle = problem.features().column(kAngle);
  RVector probe(angle.size());
  const auto n = static_cast<Eigen::Index>(cfg.nodes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = std::remainder(angle(i) - axis, 2.0 * kPi);
    probe(i) = std::exp(-d * d / (2.0 * cfg.probe_variance));
  }
  const Signal probe_signal = Signal::from_real(probe / probe.norm());

  std::string table = "model,train_mse,val_mse,test_mse,mean_shift,missing_windows,parameters\n";
  json models = json::object();
  std::vector<RingFit> fits;
  std::vector<ShiftReport> shifts;
  for (const auto kind : kinds) {
    RingFit fit = fit_ring_model(problem, data, kind, cfg);
    const LayerFn layer = [&](const CMatrix& x) { return CMatrix(problem.predict(kind, fit.params, x).cast<Complex>()); };
    ShiftReport shift = relative_shift(layer, probe_signal, problem.features(), windows, {cfg.min_energy_fraction});
    const std::string name = to_string(kind);
    const std::size_t n_params = stride(kind) * fit.params.n_terms();

    table += name + "," + fmt(fit.train_mse) + "," + fmt(fit.val_mse) + "," + fmt(fit.test_mse) + "," +
             shift_mean(shift) + "," + std::to_string(shift.missing) + "," + std::to_string(n_params) + "\n";
    models[name] = {{"train_mse", fit.train_mse},
                    {"val_mse", fit.val_mse},
                    {"test_mse", fit.test_mse},
                    {"mean_shift", shift.mean ? json(*shift.mean) : json(nullptr)},
                    {"missing_windows", shift.missing},
                    {"parameters", n_params}};
    std::string trace = "iteration,loss\n";
    for (const auto& [it, v] : fit.trace) trace += std::to_string(it) + "," + fmt(v) + "\n";
    out.files.emplace_back("trace_" + name + ".csv", trace);
    out.files.emplace_back("shifts_" + name + ".csv", format_shift_csv(shift));
    out.files.emplace_back("params_" + name + ".json", to_json(fit.params).dump(2) + "\n");
    fits.push_back(std::move(fit));
    shifts.push_back(std::move(shift));
  }
  out.files.emplace_back("models.csv", table);

  {
    std::string pred = "node,input,target,modulated,unmodulated,diffusion\n";
    const CMatrix x0 = data.test_x.col(0).cast<Complex>();
    RMatrix cols(n, 3);
    for (std::size_t k = 0; k < 3; ++k) cols.col(static_cast<Eigen::Index>(k)) = problem.predict(kinds[k], fits[k].params, x0);
    for (Eigen::Index i = 0; i < n; ++i) {
      pred += std::to_string(i) + "," + fmt(data.test_x(i, 0)) + "," + fmt(data.test_y(i, 0)) + "," +
              fmt(cols(i, 0)) + "," + fmt(cols(i, 1)) + "," + fmt(cols(i, 2)) + "\n";
    }
    out.files.emplace_back("predictions.csv", pred);
  }

  const double mod = fits[0].test_mse, abl = fits[1].test_mse, dif = fits[2].test_mse;
  out.metrics = {{"models", models},
                 {"ratio_to_ablation", mod / abl},
                 {"ratio_to_diffusion", mod / dif},
                 {"identity_mse", (data.test_x - data.test_y).squaredNorm() / static_cast<double>(data.test_y.size())}};
  out.check("beats_ablation", mod <= 0.1 * abl, "modulated " + fmt(mod) + " vs ablation " + fmt(abl));
  out.check("beats_diffusion", mod <= 0.1 * dif, "modulated " + fmt(mod) + " vs diffusion " + fmt(dif));
  out.check("modulated_shift", shifts[0].mean && std::abs(*shifts[0].mean) > 0.1,
            "mean relative shift " + shift_mean(shifts[0]) + ", need |.| > 0.1");
  out.check("diffusion_static", shifts[2].mean && std::abs(*shifts[2].mean) < 0.02,
            "mean relative shift " + shift_mean(shifts[2]) + ", need |.| < 0.02");
  return out;
}

}  // namespace schro::tools
