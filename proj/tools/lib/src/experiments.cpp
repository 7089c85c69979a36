#include "schro_tools/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "schro/diagnose.hpp"
#include "schro/error.hpp"
#include "schro/observe.hpp"
#include "schro/operators.hpp"
#include "schro/serialize.hpp"
#include "schro_tools/config.hpp"
#include "schro_tools/suites.hpp"

namespace schro::tools {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string out;
  for (const double v : values) {
    if (!out.empty()) out += ",";
    out += fmt(v);
  }
  return out + "\n";
}

std::vector<std::size_t> index_list(const json& j, const std::string& where) {
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long>() < 0) config_error(where + " entries must be non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

// ---- output ----------------------------------------------------------------------

bool ExperimentOutput::passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

void ExperimentOutput::check(const std::string& name, bool ok, const std::string& detail) {
  assertions.push_back({name, ok, detail});
}

json ExperimentOutput::summary() const {
  json asserts = json::array();
  for (const auto& a : assertions) asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  return {{"command", command}, {"config", config}, {"metrics", metrics}, {"assertions", asserts}, {"passed", passed()}};
}

void ExperimentOutput::write(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  const auto put = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << content;
    if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
  };
  put("summary.json", summary().dump(2) + "\n");
  for (const auto& [name, content] : files) put(name, content);
}

// ---- verify ----------------------------------------------------------------------

VerifyConfig VerifyConfig::from_json(const json& j) {
  ConfigReader r(j, "verify config");
  VerifyConfig c;
  c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long>(c.seed)));
  c.filter = r.string("filter", "");
  r.finish();
  return c;
}

json VerifyConfig::to_json() const { return {{"seed", seed}, {"filter", filter}}; }

ExperimentOutput run_verify(const VerifyConfig& cfg) {
  const auto selected = select_suites(cfg.filter);
  if (selected.empty()) {
    std::string names;
    for (const auto& s : all_suites()) names += "\n  " + s.name;
    config_error("no suite matches '" + cfg.filter + "'; available suites:" + names);
  }
  ExperimentOutput out;
  out.command = "verify";
  out.config = cfg.to_json();
  json results = json::array();
  std::string csv = "suite,passed,cases,worst,tolerance\n";
  for (const Suite* suite : selected) {
    const SuiteResult r = run_suite(*suite, cfg.seed);
    results.push_back(to_json(r));
    csv += r.name + "," + (r.passed ? "1" : "0") + "," + std::to_string(r.cases) + "," + fmt(r.worst) + "," +
           fmt(r.tolerance) + "\n";
    out.check(r.name, r.passed, r.detail);
    out.files.emplace_back("suite_" + r.name + ".json", to_json(r).dump(2) + "\n");
  }
  out.metrics = {{"suites", results.size()}, {"results", results}};
  out.files.emplace_back("suites.csv", csv);
  return out;
}

// ---- clusters --------------------------------------------------------------------

ClustersConfig ClustersConfig::from_json(const json& j) {
  ConfigReader r(j, "clusters config");
  ClustersConfig c;
  c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long>(c.seed)));
  c.theta_min = r.number("theta_min", c.theta_min);
  c.theta_max = r.number("theta_max", c.theta_max);
  c.theta_points = static_cast<int>(r.integer("theta_points", c.theta_points));
  c.time = r.number("time", c.time);
  c.repeats = static_cast<int>(r.integer("repeats", c.repeats));
  c.target = r.number("target", c.target);
  c.evolution = evolution_from_json(r.object("evolution"), "clusters config.evolution");
  r.finish();
  if (!(c.theta_max > c.theta_min)) config_error("clusters theta range is empty or reversed");
  if (c.theta_points < 2) config_error("clusters theta_points must be >= 2");
  if (c.repeats < 1) config_error("clusters repeats must be >= 1");
  return c;
}

json ClustersConfig::to_json() const {
  return {{"seed", seed},         {"theta_min", theta_min}, {"theta_max", theta_max},
          {"theta_points", theta_points}, {"time", time}, {"repeats", repeats},
          {"target", target},     {"evolution", tools::to_json(evolution)}};
}

ExperimentOutput run_clusters(const ClustersConfig& cfg) {
  ExperimentOutput out;
  out.command = "clusters";
  out.config = cfg.to_json();

  const ClusterInstance inst = cluster_graph(cfg.seed);
  const RVector f = inst.features.column(0);
  const CVector g0 = inst.signal.channel(0);
  const auto x = location_observable(f);
  const auto prop = make_propagator(schrodinger_laplacian(inst.graph, f), cfg.evolution);

  struct Row {
    double theta, mean, var, routing, norm, mean_single, routing_single;
  };
  const auto sweep_point = [&](double theta) {
    const CVector modulated = modulation(f, theta).apply(g0);
    CVector single = prop->evolve(cfg.time, CMatrix(modulated)).col(0);
    CVector g = single;
    for (int rep = 1; rep < cfg.repeats; ++rep) g = prop->evolve(cfg.time, CMatrix(g)).col(0);
    const double norm = g.norm();
    const CVector gn = normalized(g);
    const CVector sn = normalized(single);
    const RoutingReport rep = routing_measure(x, g0, gn, cfg.target);
    const RoutingReport rep_single = routing_measure(x, g0, sn, cfg.target);
    return Row{theta, rep.final_mean, rep.final_variance, rep.measure, norm, rep_single.final_mean,
               rep_single.measure};
  };

  const Row baseline = sweep_point(0.0);
  std::vector<Row> rows;
  for (int i = 0; i < cfg.theta_points; ++i) {
    const double theta = cfg.theta_min + (cfg.theta_max - cfg.theta_min) * i / (cfg.theta_points - 1);
    rows.push_back(sweep_point(theta));
  }

  std::string csv = "theta,mean,variance,routing,norm_before_renorm,mean_single,routing_single,mean_baseline\n";
  const Row* best = &rows.front();
  bool moved = false;
  for (const auto& row : rows) {
    csv += csv_row({row.theta, row.mean, row.var, row.routing, row.norm, row.mean_single, row.routing_single,
                    baseline.mean});
    if (row.routing < best->routing) best = &row;
    if (row.mean > baseline.mean && row.routing < baseline.routing) moved = true;
  }
  out.files.emplace_back("sweep.csv", csv);

  const double input_mean = mean(x, g0);
  out.metrics = {{"nodes", inst.graph.n_nodes()},
                 {"edges", inst.graph.n_edges()},
                 {"input_mean", input_mean},
                 {"input_variance", variance(x, g0)},
                 {"baseline_mean", baseline.mean},
                 {"baseline_routing", baseline.routing},
                 {"best_theta", best->theta},
                 {"best_routing", best->routing},
                 {"best_mean", best->mean},
                 {"routing_identity_worst_residual", routing_identity_worst_residual()}};

  out.check("input_mean_in_range", input_mean >= -1.1 && input_mean <= -0.9,
            "E_X(g0) = " + fmt(input_mean) + ", expected in [-1.1, -0.9]");
  out.check("argmin_improves_routing", best->routing < baseline.routing,
            "P(theta*) = " + fmt(best->routing) + " vs P(0) = " + fmt(baseline.routing));
  out.check("mass_moves_toward_target", moved,
            "some theta has E_X above the unmodulated value and lower P");

  // Artifacts for the diagnose command.
  FilterTerm term;
  term.t = cfg.time * cfg.repeats;
  term.theta = best->theta;
  term.direction = RVector::Ones(1);
  term.mix = CMatrix::Identity(1, 1);
  out.files.emplace_back("optimum_params.json", to_json(FilterParams{{term}}).dump(2) + "\n");
  out.files.emplace_back("graph.tsv", format_graph(inst.graph));
  out.files.emplace_back("features.csv", format_features(inst.features));
  out.files.emplace_back("signal.csv", format_signal(inst.signal));
  return out;
}

// ---- pmo-grid --------------------------------------------------------------------

PmoGridConfig PmoGridConfig::from_json(const json& j) {
  ConfigReader r(j, "pmo-grid config");
  PmoGridConfig c;
  const long rows = r.integer("rows", static_cast<long>(c.rows));
  const long cols = r.integer("cols", static_cast<long>(c.cols));
  if (rows < 2 || cols < 2) config_error("pmo-grid rows and cols must be >= 2");
  c.rows = static_cast<std::size_t>(rows);
  c.cols = static_cast<std::size_t>(cols);
  c.pmo.lambda = r.number("lambda", c.pmo.lambda);
  c.pmo.learning_rate = r.number("learning_rate", c.pmo.learning_rate);
  c.pmo.max_iters = static_cast<int>(r.integer("max_iters", c.pmo.max_iters));
  c.pmo.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long>(c.pmo.seed)));
  c.pmo.norm_tol = r.number("norm_tol", c.pmo.norm_tol);
  c.pmo.fd_step = r.number("fd_step", c.pmo.fd_step);
  const std::string mode = r.string("grad_mode", "finite-difference");
  if (mode == "finite-difference") {
    c.pmo.grad_mode = GradMode::FiniteDifference;
  } else if (mode == "spectral-pair") {
    c.pmo.grad_mode = GradMode::SpectralPair;
  } else {
    config_error("pmo-grid grad_mode must be 'finite-difference' or 'spectral-pair'");
  }
  r.finish();
  try {
    c.pmo.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

json PmoGridConfig::to_json() const {
  return {{"rows", rows},
          {"cols", cols},
          {"lambda", pmo.lambda},
          {"learning_rate", pmo.learning_rate},
          {"max_iters", pmo.max_iters},
          {"seed", pmo.seed},
          {"norm_tol", pmo.norm_tol},
          {"fd_step", pmo.fd_step},
          {"grad_mode", pmo.grad_mode == GradMode::FiniteDifference ? "finite-difference" : "spectral-pair"}};
}

ExperimentOutput run_pmo_grid(const PmoGridConfig& cfg) {
  ExperimentOutput out;
  out.command = "pmo-grid";
  out.config = cfg.to_json();

  const auto [graph, xy] = grid_graph(cfg.rows, cfg.cols);
  RMatrix raw(xy.values().rows(), 2);
  raw.col(0) = xy.values().col(0);
  raw.col(1) = xy.values().col(0) + xy.values().col(1);
  const FeatureLocations q(raw);

  PMOConfig pmo = cfg.pmo;
  pmo.out_features = 2;
  const PMOResult result = pmo_fit(graph, q, pmo);
  const PMOProblem problem(graph, q, pmo.lambda, pmo.norm_tol);
  const RMatrix identity = RMatrix::Identity(2, 2);
  const FeatureLocations f = problem.features(result.transform);

  const double corr = centered_cosine(q.column(0), q.column(1));
  const double cosine = centered_cosine(f.column(0), f.column(1));
  const double def0 = commuting_deficiency(graph, q);
  const double def1 = result.final_deficiency;
  const double mass0 = problem.cross_mass(identity);
  const double mass1 = problem.cross_mass(result.transform);
  const double reduction = def0 > 0.0 ? 1.0 - def1 / def0 : 0.0;
  const double mass_reduction = mass0 > 0.0 ? 1.0 - mass1 / mass0 : 0.0;
  json inf_norms = json::array();
  bool norms_ok = true;
  for (std::size_t k = 0; k < 2; ++k) {
    const double v = infinity_norm(derivative_matrix(graph, f.column(k)));
    inf_norms.push_back(v);
    norms_ok = norms_ok && v >= 0.5 && v <= 2.0;
  }

  out.metrics = {{"input_correlation", corr},
                 {"centered_cosine", cosine},
                 {"deficiency_initial", def0},
                 {"deficiency_final", def1},
                 {"deficiency_reduction", reduction},
                 {"cross_mass_initial", mass0},
                 {"cross_mass_final", mass1},
                 {"cross_mass_reduction", mass_reduction},
                 {"objective_initial", result.initial_objective},
                 {"objective_final", result.final_objective},
                 {"derivative_inf_norms", inf_norms},
                 {"iterations", result.objective_trace.size()},
                 {"restarted", result.restarted},
                 {"transform", matrix_to_json(result.transform)}};

  out.check("input_correlated", corr > 0.5, "corr(x, x+y) = " + fmt(corr));
  out.check("directions_orthogonal", cosine <= 0.1, "|cos| = " + fmt(cosine));
  out.check("deficiency_reduced", reduction >= 0.9, "reduction = " + fmt(reduction));
  out.check("cross_mass_reduced", mass_reduction >= 0.9, "reduction = " + fmt(mass_reduction));
  out.check("derivative_scale_kept", norms_ok, "||grad_k||_inf within [0.5, 2]");

  std::string feats = "node,x,y,q_0,q_1,f_0,f_1\n";
  for (Eigen::Index v = 0; v < raw.rows(); ++v) {
    feats += std::to_string(v) + "," +
             csv_row({xy.values()(v, 0), xy.values()(v, 1), raw(v, 0), raw(v, 1), f.values()(v, 0), f.values()(v, 1)});
  }
  out.files.emplace_back("features.csv", feats);
  std::string trace = "iteration,objective\n";
  for (const auto& [it, value] : result.objective_trace) trace += std::to_string(it) + "," + fmt(value) + "\n";
  out.files.emplace_back("trace.csv", trace);
  out.files.emplace_back("pmo_result.json", to_json(result).dump(2) + "\n");
  return out;
}

// ---- diagnose --------------------------------------------------------------------

DiagnoseConfig DiagnoseConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  ConfigReader r(j, "diagnose config");
  DiagnoseConfig c;
  const auto path = [&](const std::string& key) {
    const std::string value = r.string(key, "");
    if (value.empty()) config_error("diagnose config needs '" + key + "'");
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base_dir / p;
  };
  c.graph = path("graph");
  c.features = path("features");
  c.signal = path("signal");
  c.params = path("params");
  c.coordinates = index_list(r.array("coordinates", json::array({0})), "diagnose coordinates");
  c.laplacian_columns = index_list(r.array("laplacian_columns", json::array()), "diagnose laplacian_columns");
  const long bins = r.integer("bins", static_cast<long>(c.bins));
  if (bins < 2) config_error("diagnose bins must be >= 2");
  c.bins = static_cast<std::size_t>(bins);
  try {
    c.activation = parse_activation(r.string("activation", "none"));
  } catch (const Error& e) {
    config_error(e.what());
  }
  c.min_energy_fraction = r.number("min_energy_fraction", 0.0);
  if (c.min_energy_fraction < 0.0 || c.min_energy_fraction >= 1.0) {
    config_error("diagnose min_energy_fraction must be in [0, 1)");
  }
  c.evolution = evolution_from_json(r.object("evolution"), "diagnose config.evolution");
  r.finish();
  if (c.coordinates.empty()) config_error("diagnose coordinates must not be empty");
  return c;
}

json DiagnoseConfig::to_json() const {
  return {{"graph", graph.string()},
          {"features", features.string()},
          {"signal", signal.string()},
          {"params", params.string()},
          {"coordinates", coordinates},
          {"laplacian_columns", laplacian_columns},
          {"bins", bins},
          {"activation", schro::to_string(activation)},
          {"min_energy_fraction", min_energy_fraction},
          {"evolution", tools::to_json(evolution)}};
}

ExperimentOutput run_diagnose(const DiagnoseConfig& cfg) {
  ExperimentOutput out;
  out.command = "diagnose";
  out.config = cfg.to_json();

  const Graph graph = load_graph(cfg.graph);
  const FeatureLocations f = load_features(cfg.features);
  const Signal g = load_signal(cfg.signal);
  const FilterParams params = load_filter_params(cfg.params);
  if (f.n_nodes() != graph.n_nodes() || g.n_nodes() != graph.n_nodes()) {
    fail(ErrorCode::Contract, "graph, features and signal disagree on the node count");
  }

  FeatureLocations lap_features = f;
  if (!cfg.laplacian_columns.empty()) {
    for (const auto c : cfg.laplacian_columns) {
      if (c >= f.n_features()) config_error("diagnose laplacian_columns entry out of range");
    }
    lap_features = f.select(cfg.laplacian_columns);
  }
  const auto prop = make_propagator(schrodinger_laplacian(graph, lap_features), cfg.evolution);
  const LayerFn layer = [&](const CMatrix& x) {
    return activation(schrodinger_filter(*prop, f, params, x), cfg.activation);
  };
  const WindowSet windows = build_windows(f, cfg.coordinates, cfg.bins);
  const ShiftReport report = relative_shift(layer, g, f, windows, {cfg.min_energy_fraction});

  out.metrics = {{"windows", windows.windows().size()},
                 {"missing", report.missing},
                 {"mean_shift", report.mean ? json(*report.mean) : json(nullptr)},
                 {"partition_defect", windows.partition_defect()}};
  out.check("some_window_measured", report.mean.has_value(), "at least one window has output energy");
  out.files.emplace_back("shifts.csv", format_shift_csv(report));
  return out;
}

}  // namespace schro::tools
