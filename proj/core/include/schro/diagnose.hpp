#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schro/graph.hpp"

namespace schro {

/// Hat windows along one coordinate; weights sum to 1 at every node.
struct CoordinateWindows {
  std::size_t coordinate = 0;
  std::vector<double> centers;  // strictly increasing
  std::vector<RVector> weights;  // B vectors over nodes, entries in [0, 1]
};

struct Window {
  std::string id;                 // "b" or "b0_b1"
  std::vector<std::size_t> bins;  // one bin per axis
  RVector weight;
};

struct WindowSet {
  std::vector<CoordinateWindows> axes;

  std::size_t n_nodes() const;
  std::vector<std::size_t> coordinates() const;
  /// Per-axis windows for one axis, product windows w_{b0} w_{b1} ... otherwise.
  std::vector<Window> windows() const;
  /// max_v |sum_b w_{b,k}(v) - 1| over all axes.
  double partition_defect() const;
};

/// B hat windows centred at the quantiles (b + 1/2) / B of f_k, flat beyond
/// the outer centres. Falls back to evenly spaced centres on [min, max] when
/// quantiles tie. Throws Error(Argument) for B < 2, Error(Degenerate) for a
/// constant f_k.
WindowSet build_windows(const FeatureLocations& f, std::size_t k, std::size_t n_bins = 4);
/// Product windows over several coordinates, B bins each.
WindowSet build_windows(const FeatureLocations& f, std::span<const std::size_t> coordinates,
                        std::size_t n_bins = 4);

/// sqrt(w) .* g, normalized. Throws Error(Degenerate) when the windowed mass
/// is at or below kNormFloor.
CVector window_signal(const CVector& g, const RVector& w);
/// Row-wise version for N x J signals (Frobenius normalization).
CMatrix window_signal(const CMatrix& g, const RVector& w);

using LayerFn = std::function<CMatrix(const CMatrix&)>;

struct ShiftEntry {
  std::string window_id;
  std::size_t coordinate = 0;
  std::optional<double> shift;  // empty when the window is missing
  double pre_mean = 0.0;
  double post_mean = 0.0;
  double pre_variance = 0.0;
  double post_variance = 0.0;
  double input_energy = 0.0;  // ||sqrt(w) g||^2 / ||g||^2
};

struct ShiftReport {
  std::vector<ShiftEntry> entries;
  std::optional<double> mean;  // over present entries
  std::size_t missing = 0;
};

struct ShiftOptions {
  /// Windows holding less than this fraction of the input energy are reported
  /// missing rather than measured.
  double min_energy_fraction = 0.0;
};

/// Location mean and variance of the per-node energy of g along f.
std::pair<double, double> energy_moments(const CMatrix& g, const RVector& f);

/// Per window and coordinate: (E_post - E_pre) / std(f_k), with expectations
/// taken against the normalized per-node L2 energy across channels.
ShiftReport relative_shift(const LayerFn& layer, const Signal& g, const FeatureLocations& f,
                           const WindowSet& windows, const ShiftOptions& options = {});

/// window_id,coordinate,shift,pre_mean,post_mean,pre_variance,post_variance
std::string format_shift_csv(const ShiftReport& report);
void write_shift_csv(const ShiftReport& report, const std::filesystem::path& path);

}  // namespace schro
