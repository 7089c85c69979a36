#include "schro/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "schro/error.hpp"

namespace schro {

namespace {

double quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CoordinateWindows hat_windows(const RVector& values, std::size_t k, std::size_t n_bins) {
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) {
    fail(ErrorCode::Degenerate, "feature " + std::to_string(k) + " is constant; cannot build windows");
  }

  CoordinateWindows axis;
  axis.coordinate = k;
  const auto b_count = static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    axis.centers.push_back(quantile(sorted, (static_cast<double>(b) + 0.5) / b_count));
  }
  bool strict = true;
  for (std::size_t b = 1; b < n_bins; ++b) strict = strict && axis.centers[b] > axis.centers[b - 1];
  if (!strict) {
    for (std::size_t b = 0; b < n_bins; ++b) {
      axis.centers[b] = lo + (hi - lo) * (static_cast<double>(b) + 0.5) / b_count;
    }
  }

  const Eigen::Index n = values.size();
  axis.weights.assign(n_bins, RVector::Zero(n));
  for (Eigen::Index v = 0; v < n; ++v) {
    const double x = values(v);
    if (x <= axis.centers.front()) {
      axis.weights.front()(v) = 1.0;
    } else if (x >= axis.centers.back()) {
      axis.weights.back()(v) = 1.0;
    } else {
      const auto upper = std::upper_bound(axis.centers.begin(), axis.centers.end(), x);
      const auto b = static_cast<std::size_t>(upper - axis.centers.begin()) - 1;
      const double frac = (x - axis.centers[b]) / (axis.centers[b + 1] - axis.centers[b]);
      axis.weights[b](v) = 1.0 - frac;
      axis.weights[b + 1](v) = frac;
    }
  }
  return axis;
}

}  // namespace

std::size_t WindowSet::n_nodes() const {
  return axes.empty() || axes.front().weights.empty()
             ? 0
             : static_cast<std::size_t>(axes.front().weights.front().size());
}

std::vector<std::size_t> WindowSet::coordinates() const {
  std::vector<std::size_t> out;
  for (const auto& axis : axes) out.push_back(axis.coordinate);
  return out;
}

std::vector<Window> WindowSet::windows() const {
  std::vector<Window> out;
  if (axes.empty()) return out;
  const auto n = static_cast<Eigen::Index>(n_nodes());
  out.push_back(Window{"", {}, RVector::Ones(n)});
  for (const auto& axis : axes) {
    std::vector<Window> next;
    for (const auto& partial : out) {
      for (std::size_t b = 0; b < axis.weights.size(); ++b) {
        Window w;
        w.id = partial.id.empty() ? std::to_string(b) : partial.id + "_" + std::to_string(b);
        w.bins = partial.bins;
        w.bins.push_back(b);
        w.weight = partial.weight.cwiseProduct(axis.weights[b]);
        next.push_back(std::move(w));
      }
    }
    out = std::move(next);
  }
  return out;
}

double WindowSet::partition_defect() const {
  double worst = 0.0;
  for (const auto& axis : axes) {
    RVector total = RVector::Zero(static_cast<Eigen::Index>(n_nodes()));
    for (const auto& w : axis.weights) total += w;
    worst = std::max(worst, (total.array() - 1.0).abs().maxCoeff());
  }
  return worst;
}

WindowSet build_windows(const FeatureLocations& f, std::span<const std::size_t> coordinates,
                        std::size_t n_bins) {
  if (n_bins < 2) fail(ErrorCode::Argument, "window count must be >= 2");
  if (coordinates.empty()) fail(ErrorCode::Argument, "need at least one window coordinate");
  if (f.n_nodes() == 0) fail(ErrorCode::Argument, "no nodes to window");
  WindowSet set;
  for (const std::size_t k : coordinates) {
    if (k >= f.n_features()) fail(ErrorCode::Argument, "window coordinate out of range");
    set.axes.push_back(hat_windows(f.column(k), k, n_bins));
  }
  return set;
}

WindowSet build_windows(const FeatureLocations& f, std::size_t k, std::size_t n_bins) {
  const std::size_t coords[] = {k};
  return build_windows(f, std::span<const std::size_t>(coords), n_bins);
}

CMatrix window_signal(const CMatrix& g, const RVector& w) {
  if (g.rows() != w.size()) fail(ErrorCode::Contract, "window length does not match the signal");
  if ((w.array() < 0.0).any()) fail(ErrorCode::Argument, "window weights must be nonnegative");
  CMatrix out = w.cwiseSqrt().cast<Complex>().asDiagonal() * g;
  const double norm = out.norm();
  if (!(norm > kNormFloor)) fail(ErrorCode::Degenerate, "windowed signal has no mass");
  return out / norm;
}

CVector window_signal(const CVector& g, const RVector& w) {
  return window_signal(CMatrix(g), w).col(0);
}

std::pair<double, double> energy_moments(const CMatrix& g, const RVector& f) {
  const RVector energy = g.cwiseAbs2().rowwise().sum();
  const double total = energy.sum();
  if (!(total > kNormFloor * kNormFloor)) fail(ErrorCode::Degenerate, "signal has no energy");
  const RVector p = energy / total;
  const double m = p.dot(f);
  const double v = p.dot((f.array() - m).square().matrix());
  return {m, v};
}

ShiftReport relative_shift(const LayerFn& layer, const Signal& g, const FeatureLocations& f,
                           const WindowSet& windows, const ShiftOptions& options) {
  if (f.n_nodes() != g.n_nodes() || windows.n_nodes() != g.n_nodes()) {
    fail(ErrorCode::Contract, "signal, features and windows disagree on the node count");
  }
  const double total_energy = g.values().squaredNorm();
  if (!(total_energy > kNormFloor * kNormFloor)) fail(ErrorCode::Degenerate, "input signal is zero");

  std::vector<double> scales;
  for (const std::size_t k : windows.coordinates()) {
    const RVector fk = f.column(k);
    const double sd = std::sqrt((fk.array() - fk.mean()).square().mean());
    if (!(sd > 0.0)) fail(ErrorCode::Degenerate, "feature " + std::to_string(k) + " is constant");
    scales.push_back(sd);
  }

  ShiftReport report;
  double sum = 0.0;
  std::size_t present = 0;
  for (const auto& window : windows.windows()) {
    const CMatrix raw = window.weight.cwiseSqrt().cast<Complex>().asDiagonal() * g.values();
    const double energy = raw.squaredNorm() / total_energy;
    const bool enough = raw.norm() > kNormFloor && energy >= options.min_energy_fraction;

    CMatrix input;
    CMatrix output;
    bool measured = false;
    if (enough) {
      input = raw / raw.norm();
      output = layer(input);
      if (output.rows() != input.rows()) {
        fail(ErrorCode::Contract, "layer output node count does not match its input");
      }
      measured = output.norm() > kNormFloor && output.allFinite();
    }

    const auto coords = windows.coordinates();
    for (std::size_t a = 0; a < coords.size(); ++a) {
      ShiftEntry entry;
      entry.window_id = window.id;
      entry.coordinate = coords[a];
      entry.input_energy = energy;
      if (measured) {
        const RVector fk = f.column(coords[a]);
        const auto [pre_m, pre_v] = energy_moments(input, fk);
        const auto [post_m, post_v] = energy_moments(output, fk);
        entry.pre_mean = pre_m;
        entry.pre_variance = pre_v;
        entry.post_mean = post_m;
        entry.post_variance = post_v;
        entry.shift = (post_m - pre_m) / scales[a];
        sum += *entry.shift;
        ++present;
      } else {
        ++report.missing;
      }
      report.entries.push_back(std::move(entry));
    }
  }
  if (present > 0) report.mean = sum / static_cast<double>(present);
  return report;
}

std::string format_shift_csv(const ShiftReport& report) {
  std::string out = "window_id,coordinate,shift,pre_mean,post_mean,pre_variance,post_variance\n";
  char buf[256];
  for (const auto& e : report.entries) {
    if (e.shift) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.window_id.c_str(),
                    e.coordinate, *e.shift, e.pre_mean, e.post_mean, e.pre_variance, e.post_variance);
    } else {
      std::snprintf(buf, sizeof(buf), "%s,%zu,missing,,,,\n", e.window_id.c_str(), e.coordinate);
    }
    out += buf;
  }
  return out;
}

void write_shift_csv(const ShiftReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << format_shift_csv(report);
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace schro
