#include "schro/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "schro/error.hpp"

namespace schro {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& token, std::size_t line) {
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    fail(ErrorCode::Format,
         "line " + std::to_string(line) + ": cannot parse real '" + token + "'");
  }
  if (!std::isfinite(value)) {
    fail(ErrorCode::Format, "line " + std::to_string(line) + ": non-finite value");
  }
  return value;
}

std::size_t parse_index(const std::string& token, std::size_t line) {
  std::size_t value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    fail(ErrorCode::Format,
         "line " + std::to_string(line) + ": cannot parse node index '" + token + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

// ---- Graph -----------------------------------------------------------------

Graph::Graph(std::size_t n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes) {
  if (n_nodes == 0) fail(ErrorCode::Format, "graph must have at least one node");
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  for (auto& e : edges) {
    if (e.u >= n_nodes || e.v >= n_nodes) {
      fail(ErrorCode::Format, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                  ") out of range for " + std::to_string(n_nodes) + " nodes");
    }
    if (e.u == e.v) fail(ErrorCode::Format, "self-loop at node " + std::to_string(e.u));
    if (!std::isfinite(e.w)) fail(ErrorCode::Format, "non-finite edge weight");
    if (e.u > e.v) std::swap(e.u, e.v);
    auto [it, inserted] = seen.emplace(std::make_pair(e.u, e.v), e.w);
    if (!inserted) {
      fail(ErrorCode::Format,
           std::string(it->second == e.w ? "duplicate" : "asymmetric duplicate") + " edge (" +
               std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
  }
  edges_ = std::move(edges);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges_.size());
  for (const auto& e : edges_) {
    triplets.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), e.w);
    triplets.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), e.w);
  }
  const auto n = static_cast<Eigen::Index>(n_nodes_);
  adjacency_.resize(n, n);
  adjacency_.setFromTriplets(triplets.begin(), triplets.end());
  adjacency_.makeCompressed();
}

double Graph::weight(std::size_t n, std::size_t m) const {
  if (n >= n_nodes_ || m >= n_nodes_) fail(ErrorCode::Argument, "node index out of range");
  return adjacency_.coeff(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
}

std::size_t Graph::degree(std::size_t n) const {
  if (n >= n_nodes_) fail(ErrorCode::Argument, "node index out of range");
  const auto row = static_cast<Eigen::Index>(n);
  return static_cast<std::size_t>(adjacency_.outerIndexPtr()[row + 1] -
                                  adjacency_.outerIndexPtr()[row]);
}

bool Graph::is_connected() const {
  std::vector<char> visited(n_nodes_, 0);
  std::vector<Eigen::Index> stack{0};
  visited[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(adjacency_, v); it; ++it) {
      if (!visited[static_cast<std::size_t>(it.col())]) {
        visited[static_cast<std::size_t>(it.col())] = 1;
        ++count;
        stack.push_back(it.col());
      }
    }
  }
  return count == n_nodes_;
}

// ---- Signal / FeatureLocations --------------------------------------------

Signal::Signal(CMatrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) fail(ErrorCode::Numerical, "signal contains non-finite entries");
}

Signal Signal::from_channel(const CVector& channel) { return Signal(CMatrix(channel)); }

Signal Signal::from_real(const RMatrix& values) { return Signal(values.cast<Complex>()); }

CVector Signal::channel(std::size_t j) const {
  if (j >= n_channels()) fail(ErrorCode::Argument, "channel index out of range");
  return values_.col(static_cast<Eigen::Index>(j));
}

FeatureLocations::FeatureLocations(RMatrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) fail(ErrorCode::Numerical, "feature locations contain non-finite entries");
}

RVector FeatureLocations::column(std::size_t k) const {
  if (k >= n_features()) fail(ErrorCode::Argument, "feature index out of range");
  return values_.col(static_cast<Eigen::Index>(k));
}

FeatureLocations FeatureLocations::select(std::span<const std::size_t> columns) const {
  RMatrix out(values_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = column(columns[i]);
  }
  return FeatureLocations(std::move(out));
}

CVector normalized(const CVector& g) {
  const double norm = g.norm();
  if (!(norm > kNormFloor)) fail(ErrorCode::Degenerate, "signal norm is at or below the norm floor");
  return g / norm;
}

Signal normalize_channel(const Signal& g, std::size_t j) {
  CMatrix values = g.values();
  const auto col = static_cast<Eigen::Index>(j);
  if (j >= g.n_channels()) fail(ErrorCode::Argument, "channel index out of range");
  const double norm = values.col(col).norm();
  if (!(norm > kNormFloor)) {
    fail(ErrorCode::Degenerate, "channel " + std::to_string(j) + " has norm at or below the norm floor");
  }
  values.col(col) /= norm;
  return Signal(std::move(values));
}

// ---- generators ------------------------------------------------------------

ClusterInstance cluster_graph(std::uint64_t seed) {
  constexpr std::size_t kPerCloud = 30;
  constexpr std::size_t kNodes = 2 * kPerCloud;
  constexpr double kStd = 0.5;
  constexpr double kRadius = 1.5;
  constexpr int kMaxAttempts = 100;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kStd);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RMatrix pos(kNodes, 2);
    for (std::size_t n = 0; n < kNodes; ++n) {
      const double cx = n < kPerCloud ? -1.0 : 1.0;
      pos(static_cast<Eigen::Index>(n), 0) = cx + noise(rng);
      pos(static_cast<Eigen::Index>(n), 1) = noise(rng);
    }
    std::vector<Edge> edges;
    for (std::size_t n = 0; n < kNodes; ++n) {
      for (std::size_t m = n + 1; m < kNodes; ++m) {
        const double d = (pos.row(static_cast<Eigen::Index>(n)) - pos.row(static_cast<Eigen::Index>(m))).norm();
        if (d < kRadius) edges.push_back({n, m, 1.0});
      }
    }
    Graph graph(kNodes, std::move(edges));
    if (!graph.is_connected()) continue;

    // Nonnegative bump around the left cloud center.
    RVector g(kNodes);
    for (std::size_t n = 0; n < kNodes; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      const double dx = pos(i, 0) + 1.0;
      const double dy = pos(i, 1);
      g(i) = std::exp(-(dx * dx + dy * dy) / (2.0 * kStd * kStd));
    }
    g /= g.norm();
    return ClusterInstance{std::move(graph), FeatureLocations(RMatrix(pos.col(0))),
                           Signal::from_real(RMatrix(g)), std::move(pos)};
  }
  fail(ErrorCode::Numerical, "cluster_graph: no connected sample after 100 attempts");
}

std::tuple<Graph, FeatureLocations> ring_graph(std::size_t n) {
  if (n < 3) fail(ErrorCode::Argument, "ring_graph needs at least 3 nodes");
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  RMatrix f(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 static_cast<double>(n);
    const auto r = static_cast<Eigen::Index>(i);
    f(r, 0) = std::cos(angle);
    f(r, 1) = std::sin(angle);
    f(r, 2) = angle;
  }
  return {Graph(n, std::move(edges)), FeatureLocations(std::move(f))};
}

std::tuple<Graph, FeatureLocations> grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) fail(ErrorCode::Argument, "grid_graph needs positive dimensions");
  const auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  std::vector<Edge> edges;
  RMatrix f(static_cast<Eigen::Index>(rows * cols), 2);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      f(static_cast<Eigen::Index>(id(r, c)), 0) = static_cast<double>(c);
      f(static_cast<Eigen::Index>(id(r, c)), 1) = static_cast<double>(r);
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  }
  return {Graph(rows * cols, std::move(edges)), FeatureLocations(std::move(f))};
}

// ---- file I/O --------------------------------------------------------------

std::string format_graph(const Graph& graph) {
  std::string out = "#nodes=" + std::to_string(graph.n_nodes()) + "\n";
  for (const auto& e : graph.edges()) {
    out += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\t" + format_double(e.w) + "\n";
  }
  return out;
}

Graph parse_graph(const std::string& text) {
  std::size_t n_nodes = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> seen;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#nodes=", 0) == 0) {
        if (have_header) fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": repeated #nodes header");
        n_nodes = parse_index(line.substr(7), lineno);
        have_header = true;
      }
      continue;
    }
    if (!have_header) fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": edge before #nodes header");
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": expected u<TAB>v<TAB>w");
    }
    Edge e{parse_index(fields[0], lineno), parse_index(fields[1], lineno), parse_real(fields[2], lineno)};
    if (e.u >= n_nodes || e.v >= n_nodes) {
      fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": node index out of range");
    }
    if (e.u == e.v) fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": self-loop");
    const auto key = std::minmax(e.u, e.v);
    auto [it, inserted] = seen.emplace(key, std::make_pair(e.w, lineno));
    if (!inserted) {
      const bool same = it->second.first == e.w;
      fail(ErrorCode::Format, "line " + std::to_string(lineno) + ": " +
                                  (same ? "duplicate" : "asymmetric duplicate") + " of edge on line " +
                                  std::to_string(it->second.second));
    }
    edges.push_back(e);
  }
  if (!have_header) fail(ErrorCode::Format, "missing #nodes header");
  return Graph(n_nodes, std::move(edges));
}

Graph load_graph(const std::filesystem::path& path) {
  try {
    return parse_graph(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
  write_file(path, format_graph(graph));
}

std::string format_signal(const Signal& signal) {
  std::string out = "channels=" + std::to_string(signal.n_channels()) + "\n";
  for (std::size_t j = 0; j < signal.n_channels(); ++j) {
    if (j) out += ",";
    out += "re_" + std::to_string(j) + ",im_" + std::to_string(j);
  }
  out += "\n";
  const auto& v = signal.values();
  for (Eigen::Index n = 0; n < v.rows(); ++n) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out += ",";
      out += format_double(v(n, j).real()) + "," + format_double(v(n, j).imag());
    }
    out += "\n";
  }
  return out;
}

void save_signal(const Signal& signal, const std::filesystem::path& path) { write_file(path, format_signal(signal)); }

Signal load_signal(const std::filesystem::path& path) {
  const auto lines = lines_of(read_file(path));
  const auto where = [&](std::size_t line) { return path.string() + ":" + std::to_string(line) + ": "; };
  if (lines.size() < 2 || lines[0].rfind("channels=", 0) != 0) {
    fail(ErrorCode::Format, where(1) + "expected 'channels=J' header");
  }
  const std::size_t channels = parse_index(trim(lines[0].substr(9)), 1);
  if (split(trim(lines[1]), ',').size() != 2 * channels) {
    fail(ErrorCode::Format, where(2) + "column header does not match channel count");
  }
  std::vector<std::vector<Complex>> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 * channels) fail(ErrorCode::Format, where(i + 1) + "wrong column count");
    std::vector<Complex> row(channels);
    for (std::size_t j = 0; j < channels; ++j) {
      row[j] = {parse_real(fields[2 * j], i + 1), parse_real(fields[2 * j + 1], i + 1)};
    }
    rows.push_back(std::move(row));
  }
  CMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(channels));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t j = 0; j < channels; ++j) {
      values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = rows[n][j];
    }
  }
  return Signal(std::move(values));
}

std::string format_features(const FeatureLocations& features) {
  std::string out;
  for (std::size_t k = 0; k < features.n_features(); ++k) {
    if (k) out += ",";
    out += "f_" + std::to_string(k);
  }
  out += "\n";
  const auto& v = features.values();
  for (Eigen::Index n = 0; n < v.rows(); ++n) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      if (k) out += ",";
      out += format_double(v(n, k));
    }
    out += "\n";
  }
  return out;
}

void save_features(const FeatureLocations& features, const std::filesystem::path& path) {
  write_file(path, format_features(features));
}

FeatureLocations load_features(const std::filesystem::path& path) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty()) fail(ErrorCode::Format, path.string() + ": empty feature file");
  const std::size_t width = split(trim(lines[0]), ',').size();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != width) {
      fail(ErrorCode::Format, path.string() + ":" + std::to_string(i + 1) + ": wrong column count");
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_real(f, i + 1));
    rows.push_back(std::move(row));
  }
  RMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t k = 0; k < width; ++k) {
      values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = rows[n][k];
    }
  }
  return FeatureLocations(std::move(values));
}

}  // namespace schro
