#include "schro/filter.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "schro/error.hpp"

namespace schro {

std::size_t FilterParams::n_directions() const {
  return terms.empty() ? 0 : static_cast<std::size_t>(terms.front().direction.size());
}
std::size_t FilterParams::n_in() const {
  return terms.empty() ? 0 : static_cast<std::size_t>(terms.front().mix.rows());
}
std::size_t FilterParams::n_out() const {
  return terms.empty() ? 0 : static_cast<std::size_t>(terms.front().mix.cols());
}

void FilterParams::validate() const {
  if (terms.empty()) fail(ErrorCode::Contract, "filter needs at least one term");
  const auto k = terms.front().direction.size();
  const auto j = terms.front().mix.rows();
  const auto d = terms.front().mix.cols();
  if (j == 0 || d == 0) fail(ErrorCode::Contract, "filter mix must be non-empty");
  for (std::size_t m = 0; m < terms.size(); ++m) {
    const auto& term = terms[m];
    const std::string where = "filter term " + std::to_string(m);
    if (term.direction.size() != k || term.mix.rows() != j || term.mix.cols() != d) {
      fail(ErrorCode::Contract, where + " has inconsistent shape");
    }
    if (!std::isfinite(term.t) || !std::isfinite(term.theta) || !term.direction.allFinite() ||
        !term.mix.allFinite()) {
      fail(ErrorCode::Contract, where + " has non-finite entries");
    }
  }
}

std::size_t FilterParams::real_parameter_count() const {
  std::size_t count = 0;
  for (const auto& term : terms) {
    count += 2 + static_cast<std::size_t>(term.direction.size()) +
             2 * static_cast<std::size_t>(term.mix.size());
  }
  return count;
}

RVector FilterParams::flatten() const {
  RVector flat(static_cast<Eigen::Index>(real_parameter_count()));
  Eigen::Index at = 0;
  for (const auto& term : terms) {
    flat(at++) = term.t;
    flat(at++) = term.theta;
    for (Eigen::Index i = 0; i < term.direction.size(); ++i) flat(at++) = term.direction(i);
    for (Eigen::Index i = 0; i < term.mix.size(); ++i) {
      flat(at++) = term.mix.data()[i].real();
      flat(at++) = term.mix.data()[i].imag();
    }
  }
  return flat;
}

FilterParams FilterParams::unflatten(const RVector& flat, const FilterParams& shape) {
  if (static_cast<std::size_t>(flat.size()) != shape.real_parameter_count()) {
    fail(ErrorCode::Contract, "flat parameter vector has the wrong length");
  }
  FilterParams out = shape;
  Eigen::Index at = 0;
  for (auto& term : out.terms) {
    term.t = flat(at++);
    term.theta = flat(at++);
    for (Eigen::Index i = 0; i < term.direction.size(); ++i) term.direction(i) = flat(at++);
    for (Eigen::Index i = 0; i < term.mix.size(); ++i) {
      const double re = flat(at++);
      const double im = flat(at++);
      term.mix.data()[i] = Complex(re, im);
    }
  }
  return out;
}

FilterParams FilterParams::identity(std::size_t k, std::size_t j) {
  FilterTerm term;
  term.direction = RVector::Zero(static_cast<Eigen::Index>(k));
  term.mix = CMatrix::Identity(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  return FilterParams{{term}};
}

void InputModulationParams::validate() const {
  if (amp_map.rows() != phase_map.rows() || amp_map.cols() != phase_map.cols()) {
    fail(ErrorCode::Contract, "amplitude and phase maps must have the same shape");
  }
  if (!amp_map.allFinite() || !phase_map.allFinite()) {
    fail(ErrorCode::Contract, "input modulation maps must be finite");
  }
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::SplitRelu: return "split-relu";
    case Activation::Modulus: return "modulus";
    case Activation::None: return "none";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "split-relu") return Activation::SplitRelu;
  if (name == "modulus") return Activation::Modulus;
  if (name == "none") return Activation::None;
  fail(ErrorCode::Config, "unknown activation '" + name + "' (split-relu, modulus, none)");
}

CMatrix schrodinger_filter(const Propagator& propagator, const FeatureLocations& modulation_basis,
                           const FilterParams& params, const CMatrix& g) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(propagator.dimension());
  if (g.rows() != n) fail(ErrorCode::Contract, "signal node count does not match the propagator");
  if (static_cast<std::size_t>(g.cols()) != params.n_in()) {
    fail(ErrorCode::Contract, "signal channels (" + std::to_string(g.cols()) +
                                  ") do not match the filter input width (" +
                                  std::to_string(params.n_in()) + ")");
  }
  if (static_cast<Eigen::Index>(modulation_basis.n_nodes()) != n ||
      modulation_basis.n_features() != params.n_directions()) {
    fail(ErrorCode::Contract, "modulation basis does not match the filter directions");
  }

  CMatrix out = CMatrix::Zero(n, static_cast<Eigen::Index>(params.n_out()));
  for (const auto& term : params.terms) {
    CMatrix modulated = g;
    if (term.theta != 0.0 && term.direction.size() > 0) {
      const RVector h = modulation_basis.values() * term.direction;
      for (Eigen::Index v = 0; v < n; ++v) modulated.row(v) *= std::polar(1.0, term.theta * h(v));
    }
    out.noalias() += propagator.evolve(term.t, modulated) * term.mix;
  }
  return out;
}

Signal schrodinger_filter(const Graph& graph, const FeatureLocations& f, const FilterParams& params,
                          const Signal& g, const EvolutionConfig& cfg) {
  params.validate();
  if (g.n_nodes() != graph.n_nodes()) fail(ErrorCode::Contract, "signal node count does not match the graph");
  const auto prop = make_propagator(schrodinger_laplacian(graph, f), cfg);
  return Signal(schrodinger_filter(*prop, f, params, g.values()));
}

Signal schrodinger_layer(const Graph& graph, const FeatureLocations& f, const FilterParams& params,
                         const Signal& g, const LayerConfig& cfg) {
  return activation(schrodinger_filter(graph, f, params, g, cfg.evolution), cfg.activation);
}

Signal input_modulation(const FeatureLocations& q, const InputModulationParams& p) {
  p.validate();
  if (static_cast<std::size_t>(p.amp_map.rows()) != q.n_features()) {
    fail(ErrorCode::Contract, "input modulation maps need one row per raw feature");
  }
  const RMatrix amp = q.values() * p.amp_map;
  const RMatrix phase = q.values() * p.phase_map;
  CMatrix out(amp.rows(), amp.cols());
  for (Eigen::Index c = 0; c < amp.cols(); ++c) {
    for (Eigen::Index r = 0; r < amp.rows(); ++r) out(r, c) = std::polar(1.0, phase(r, c)) * amp(r, c);
  }
  return Signal(std::move(out));
}

CMatrix activation(const CMatrix& g, Activation kind) {
  switch (kind) {
    case Activation::None:
      return g;
    case Activation::Modulus:
      return g.cwiseAbs().cast<Complex>();
    case Activation::SplitRelu:
      return g.unaryExpr([](const Complex& z) {
        return Complex(std::max(0.0, z.real()), std::max(0.0, z.imag()));
      });
  }
  return g;
}

Signal activation(const Signal& g, Activation kind) { return Signal(activation(g.values(), kind)); }

std::vector<double> init_times(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.5);
  std::vector<double> out(n);
  for (auto& t : out) {
    do {
      t = uniform(rng);
    } while (t >= 1.5);  // guard against rounding up to the upper bound
  }
  return out;
}

RVector fd_gradient(const std::function<double(const RVector&)>& loss, const RVector& x, double step) {
  if (!(step > 0.0)) fail(ErrorCode::Argument, "finite-difference step must be positive");
  RVector grad(x.size());
  RVector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double up = loss(probe);
    probe(i) = x(i) - step;
    const double down = loss(probe);
    probe(i) = x(i);
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace schro
