#include "nrhc/config.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <ostream>
#include <system_error>

#include "nrhc/errors.hpp"

namespace nrhc::config {

using nlohmann::json;

namespace {

constexpr double kDwell = 2.5;

std::vector<Vector> benchmark_initial_states() {
  const std::array<std::array<double, 3>, 4> columns{{
      {-1.0, 10.0, 2.0},
      {2.0, -1.0, 5.0},
      {-10.0, 20.0, 8.0},
      {9.0, -10.0, -2.0},
  }};
  std::vector<Vector> states;
  for (const auto& c : columns) states.push_back(Eigen::Map<const Vector>(c.data(), 3));
  return states;
}

// JSON access with the field path carried into every error.

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  return v.get<double>();
}

std::size_t index_value(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

/// n entries: diagonal. n*n entries: full matrix, row-major.
Matrix matrix_value(const json& v, std::size_t n, const std::string& path) {
  const std::vector<double> values = number_array(v, path);
  const auto k = static_cast<Eigen::Index>(n);
  if (values.size() == n) {
    return Eigen::Map<const Vector>(values.data(), k).asDiagonal();
  }
  if (values.size() == n * n) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), k, k);
  }
  throw ValidationError(path, "expected " + std::to_string(n) + " (diagonal) or " +
                                  std::to_string(n * n) + " (row-major) numbers, got " +
                                  std::to_string(values.size()));
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

/// Diagonal matrices are written in their short form.
json weight_json(const Matrix& m) {
  const bool diagonal = m.rows() == m.cols() && (m - Matrix(m.diagonal().asDiagonal())).isZero(0.0);
  if (!diagonal) return matrix_json(m);
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, i));
  return out;
}

ocp::CostWeights weights_value(const json& v, std::size_t n, const std::string& path) {
  Matrix q = matrix_value(member(v, "Q", path), n, join(path, "Q"));
  Matrix qn = matrix_value(member(v, "QN", path), n, join(path, "QN"));
  Matrix r = matrix_value(member(v, "R", path), n, join(path, "R"));
  try {
    return ocp::CostWeights(std::move(q), std::move(qn), std::move(r));
  } catch (const ArgumentError& e) {
    throw ValidationError(path, e.what());
  }
}

template <typename Fn>
auto rethrow_as_validation(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ArgumentError& e) {
    throw ValidationError(field, e.what());
  }
}

}  // namespace

std::vector<std::string> preset_names() { return {"example1", "example2", "example3"}; }

sim::SimConfig preset(std::string_view name, std::optional<double> t_end,
                      std::optional<double> delay) {
  sim::SimConfig cfg;
  cfg.name = std::string(name);
  cfg.model = "lorenz";
  cfg.initial_states = benchmark_initial_states();
  cfg.weights.assign(cfg.initial_states.size(), ocp::CostWeights::identity(3));
  cfg.horizon = ocp::HorizonSchedule(1.0, 0.01);
  cfg.ts = 0.01;
  cfg.tau_step = 0.005;
  cfg.As = Vector::Constant(3, -50.0).asDiagonal();
  cfg.scheme = sweep::Scheme::Rk4;

  if (name == "example1") {
    cfg.t_end = t_end.value_or(20.0);
    cfg.delay = delay.value_or(0.0);
    cfg.schedule = graph::round_robin(graph::example_topologies(), kDwell, cfg.t_end);
  } else if (name == "example2") {
    cfg.t_end = t_end.value_or(20.0);
    cfg.delay = delay.value_or(0.0);
    cfg.schedule = graph::SwitchingSchedule::automatic(graph::example_topologies(), 0);
  } else if (name == "example3") {
    cfg.t_end = t_end.value_or(30.0);
    cfg.delay = delay.value_or(0.2);
    if (!(cfg.delay > 0.0)) throw ValidationError("delay", "example3 requires a positive delay");
    cfg.schedule = graph::SwitchingSchedule::fixed({graph::delay_example_topology()}, {{0.0, 0}});
  } else {
    throw ValidationError("preset", "unknown preset '" + std::string(name) + "'");
  }
  cfg.validate();
  return cfg;
}

sim::SimConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("(root)", "expected a JSON object");
  sim::SimConfig cfg;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ValidationError("name", "expected a string");
    cfg.name = doc["name"].get<std::string>();
  }
  const json& model = member(doc, "model", "");
  if (!model.is_string()) throw ValidationError("model", "expected a string");
  cfg.model = model.get<std::string>();
  if (doc.contains("gauss_newton")) {
    if (!doc["gauss_newton"].is_boolean()) throw ValidationError("gauss_newton", "expected a boolean");
    cfg.gauss_newton = doc["gauss_newton"].get<bool>();
  }

  const json& states = member(doc, "initial_states", "");
  if (!states.is_array() || states.empty()) {
    throw ValidationError("initial_states", "expected a non-empty array of state vectors");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::vector<double> x = number_array(states[i], "initial_states[" + std::to_string(i) + "]");
    cfg.initial_states.push_back(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
  }
  const std::size_t m = cfg.initial_states.size();
  const std::size_t n = cfg.state_dim();
  if (n == 0) throw ValidationError("initial_states[0]", "state dimension must be positive");
  for (std::size_t i = 0; i < m; ++i) {
    if (static_cast<std::size_t>(cfg.initial_states[i].size()) != n) {
      throw ValidationError("initial_states[" + std::to_string(i) + "]",
                            "all agents must share the state dimension");
    }
  }

  const json& weights = member(doc, "weights", "");
  if (weights.is_object()) {
    cfg.weights.assign(m, weights_value(weights, n, "weights"));
  } else if (weights.is_array()) {
    if (weights.size() != m) throw ValidationError("weights", "need one entry per agent");
    for (std::size_t i = 0; i < m; ++i) {
      cfg.weights.push_back(weights_value(weights[i], n, "weights[" + std::to_string(i) + "]"));
    }
  } else {
    throw ValidationError("weights", "expected an object or an array of objects");
  }

  const json& horizon = member(doc, "horizon", "");
  const double tf = number(member(horizon, "Tf", "horizon"), "horizon.Tf");
  const double alpha = number(member(horizon, "alpha", "horizon"), "horizon.alpha");
  cfg.horizon = rethrow_as_validation("horizon", [&] { return ocp::HorizonSchedule(tf, alpha); });

  cfg.ts = number(member(doc, "ts", ""), "ts");
  cfg.tau_step = number(member(doc, "tau_step", ""), "tau_step");
  cfg.As = matrix_value(member(doc, "As", ""), n, "As");
  if (doc.contains("scheme")) {
    const json& s = doc["scheme"];
    if (s == "rk4") {
      cfg.scheme = sweep::Scheme::Rk4;
    } else if (s == "euler") {
      cfg.scheme = sweep::Scheme::Euler;
    } else {
      throw ValidationError("scheme", "expected \"rk4\" or \"euler\"");
    }
  }
  cfg.t_end = number(member(doc, "t_end", ""), "t_end");
  cfg.delay = doc.contains("delay") ? number(doc["delay"], "delay") : 0.0;

  const json& topologies = member(doc, "topologies", "");
  if (!topologies.is_array() || topologies.empty()) {
    throw ValidationError("topologies", "expected a non-empty array of adjacency matrices");
  }
  std::vector<graph::Topology> topos;
  for (std::size_t k = 0; k < topologies.size(); ++k) {
    const std::string path = "topologies[" + std::to_string(k) + "]";
    const std::vector<double> values = number_array(topologies[k], path);
    topos.push_back(rethrow_as_validation(path, [&] { return graph::Topology::from_row_major(m, values); }));
  }

  const json& switching = member(doc, "switching", "");
  const json& mode = member(switching, "mode", "switching");
  if (mode == "auto") {
    const std::size_t initial = switching.contains("initial")
                                    ? index_value(switching["initial"], "switching.initial")
                                    : 0;
    cfg.schedule = rethrow_as_validation(
        "switching", [&] { return graph::SwitchingSchedule::automatic(topos, initial); });
  } else if (mode == "fixed") {
    const json& events = member(switching, "events", "switching");
    if (!events.is_array()) throw ValidationError("switching.events", "expected an array");
    std::vector<graph::SwitchEvent> list;
    for (std::size_t k = 0; k < events.size(); ++k) {
      const std::string path = "switching.events[" + std::to_string(k) + "]";
      list.push_back({number(member(events[k], "t", path), path + ".t"),
                      index_value(member(events[k], "topology", path), path + ".topology")});
    }
    cfg.schedule = rethrow_as_validation(
        "switching", [&] { return graph::SwitchingSchedule::fixed(topos, list); });
  } else {
    throw ValidationError("switching.mode", "expected \"fixed\" or \"auto\"");
  }

  cfg.validate();
  return cfg;
}

sim::SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("(file)", e.what());
  }
  return parse_config(doc);
}

json to_json(const sim::SimConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["model"] = cfg.model;
  doc["gauss_newton"] = cfg.gauss_newton;
  doc["initial_states"] = json::array();
  for (const auto& x : cfg.initial_states) {
    doc["initial_states"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  doc["weights"] = json::array();
  for (const auto& w : cfg.weights) {
    doc["weights"].push_back({{"Q", weight_json(w.Q())}, {"QN", weight_json(w.QN())}, {"R", weight_json(w.R())}});
  }
  doc["horizon"] = {{"Tf", cfg.horizon.final_length()}, {"alpha", cfg.horizon.alpha()}};
  doc["ts"] = cfg.ts;
  doc["tau_step"] = cfg.tau_step;
  doc["As"] = weight_json(cfg.As);
  doc["scheme"] = cfg.scheme == sweep::Scheme::Rk4 ? "rk4" : "euler";
  doc["t_end"] = cfg.t_end;
  doc["delay"] = cfg.delay;
  doc["topologies"] = json::array();
  for (const auto& t : cfg.schedule.topologies()) doc["topologies"].push_back(matrix_json(t.adjacency()));
  if (cfg.schedule.is_auto()) {
    doc["switching"] = {{"mode", "auto"}, {"initial", cfg.schedule.initial_index()}};
  } else {
    json events = json::array();
    for (const auto& e : cfg.schedule.events()) events.push_back({{"t", e.time}, {"topology", e.index}});
    doc["switching"] = {{"mode", "fixed"}, {"events", events}};
  }
  return doc;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), end);
}

void write_trajectory_csv(std::ostream& out, const sim::TrajectoryLog& log) {
  const std::size_t n =
      log.samples.empty() || log.samples.front().x.empty() ? 0 : static_cast<std::size_t>(log.samples.front().x.front().size());
  out << "t,agent";
  for (std::size_t k = 1; k <= n; ++k) out << ",x" << k;
  for (std::size_t k = 1; k <= n; ++k) out << ",u" << k;
  out << ",sigma,J,P_norm,consensus_err\n";
  for (const auto& rec : log.samples) {
    for (std::size_t i = 0; i < rec.x.size(); ++i) {
      out << format_number(rec.t) << ',' << i;
      for (Eigen::Index k = 0; k < rec.x[i].size(); ++k) out << ',' << format_number(rec.x[i](k));
      for (Eigen::Index k = 0; k < rec.u[i].size(); ++k) out << ',' << format_number(rec.u[i](k));
      out << ',' << rec.sigma << ',' << format_number(rec.cost[i]) << ','
          << format_number(rec.residual_norm[i]) << ',' << format_number(rec.consensus_err) << '\n';
    }
  }
}

void write_switching_csv(std::ostream& out, const sim::TrajectoryLog& log) {
  out << "t,sigma\n";
  for (const auto& e : log.switches) out << format_number(e.time) << ',' << e.index << '\n';
}

json metrics_json(const sim::SimConfig& config, const sim::TrajectoryLog& log,
                  const RunSummary& summary) {
  json m;
  m["name"] = config.name;
  m["agents"] = config.agent_count();
  m["samples"] = log.samples.size();
  m["t_end"] = config.t_end;
  m["delay"] = config.delay;
  m["status"] = summary.diverged ? "diverged" : "ok";
  if (summary.diverged) m["error"] = summary.error;
  m["initial_consensus_error"] = summary.initial_consensus_error;
  m["final_consensus_error"] = summary.final_consensus_error;
  m["final_total_cost"] = summary.final_total_cost;
  m["wall_time_s"] = summary.wall_time_s;
  m["switch_events"] = json::array();
  for (const auto& e : log.switches) m["switch_events"].push_back({{"t", e.time}, {"sigma", e.index}});
  m["switch_decisions"] = log.decisions.size();
  return m;
}

namespace {

bool write_file(const std::filesystem::path& path, const auto& writer, std::ostream& err) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    err << "error: cannot write " << path.string() << '\n';
    return false;
  }
  writer(f);
  f.flush();
  if (!f) {
    err << "error: failed writing " << path.string() << '\n';
    return false;
  }
  return true;
}

}  // namespace

int run_and_emit(const sim::SimConfig& config, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err, sim::RunOptions options) {
  try {
    config.validate();
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kValidation;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kIo;
  }

  RunSummary summary;
  sim::TrajectoryLog log;
  const auto start = std::chrono::steady_clock::now();
  try {
    log = sim::run(config, options);
  } catch (const sim::RunDiverged& e) {
    log = e.partial_log();
    summary.diverged = true;
    summary.error = e.what();
  }
  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!log.samples.empty()) {
    summary.initial_consensus_error = log.samples.front().consensus_err;
    summary.final_consensus_error = log.samples.back().consensus_err;
    summary.final_total_cost = log.samples.back().total_cost();
  }

  const bool written =
      write_file(out_dir / "trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, log); }, err) &&
      write_file(out_dir / "switching.csv", [&](std::ostream& f) { write_switching_csv(f, log); }, err) &&
      write_file(out_dir / "metrics.json",
                 [&](std::ostream& f) { f << metrics_json(config, log, summary).dump(2) << '\n'; }, err);

  out << config.name << ": " << log.samples.size() << " samples, consensus error "
      << format_number(summary.initial_consensus_error) << " -> "
      << format_number(summary.final_consensus_error) << ", total cost "
      << format_number(summary.final_total_cost) << ", wall time " << summary.wall_time_s << " s\n";
  if (summary.diverged) {
    err << "solver diverged: " << summary.error << '\n';
    return kDivergence;
  }
  return written ? kOk : kIo;
}

}  // namespace nrhc::config
