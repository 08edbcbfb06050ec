#include "nrhc/sim.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <string>

namespace nrhc::sim {

namespace {

constexpr double kGridTolerance = 1e-9;

bool is_whole_multiple(double value, double step) {
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) <= kGridTolerance * std::max(1.0, ratio);
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ValidationError(field, message);
}

Vector plant_step(const dynamics::DynamicsModel& model, const Vector& x, const Vector& u, double h) {
  auto f = [&](const Vector& s) -> Vector { return model.eval_f(s) + u; };
  const Vector k1 = f(x);
  const Vector k2 = f(x + 0.5 * h * k1);
  const Vector k3 = f(x + 0.5 * h * k2);
  const Vector k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::size_t SimConfig::delay_samples() const {
  return static_cast<std::size_t>(std::llround(delay / ts));
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::floor(t_end / ts + kGridTolerance));
}

void SimConfig::validate() const {
  require(!initial_states.empty(), "initial_states", "at least one agent is required");
  const std::size_t n = state_dim();
  require(n > 0, "initial_states", "state dimension must be positive");
  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    require(static_cast<std::size_t>(initial_states[i].size()) == n,
            "initial_states[" + std::to_string(i) + "]", "all agents must share the state dimension");
    require(initial_states[i].allFinite(), "initial_states[" + std::to_string(i) + "]",
            "entries must be finite");
  }
  dynamics::ModelPtr m;
  try {
    m = dynamics::make_model(model, gauss_newton);
  } catch (const ArgumentError& e) {
    throw ValidationError("model", e.what());
  }
  require(m->dim() == n, "model", "model dimension " + std::to_string(m->dim()) +
                                      " does not match state dimension " + std::to_string(n));
  require(weights.size() == agent_count(), "weights", "need one weight set per agent");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i].dim() == n, "weights[" + std::to_string(i) + "]",
            "weight dimension must match the state dimension");
  }
  require(std::isfinite(ts) && ts > 0.0, "ts", "must be positive");
  require(std::isfinite(tau_step) && tau_step > 0.0, "tau_step", "must be positive");
  require(std::isfinite(t_end) && t_end >= 0.0, "t_end", "must be non-negative");
  require(std::isfinite(delay) && delay >= 0.0, "delay", "must be non-negative");
  require(is_whole_multiple(delay, ts), "delay", "must be an integer multiple of ts");
  require(static_cast<std::size_t>(As.rows()) == n && As.cols() == As.rows(), "As",
          "must be an n x n matrix");
  try {
    sweep::IntegratorConfig(tau_step, ts, As, scheme);
  } catch (const ArgumentError& e) {
    throw ValidationError("As", e.what());
  }
  require(schedule.agent_count() == agent_count(), "topologies",
          "node count must equal the number of agents");
}

bool SimConfig::operator==(const SimConfig& o) const {
  return name == o.name && model == o.model && gauss_newton == o.gauss_newton &&
         initial_states == o.initial_states && weights == o.weights && horizon == o.horizon &&
         ts == o.ts && tau_step == o.tau_step && As == o.As && scheme == o.scheme &&
         t_end == o.t_end && delay == o.delay && schedule == o.schedule;
}

DelayBuffer::DelayBuffer(std::vector<Vector> initial, std::size_t delay_samples)
    : delay_(delay_samples), history_(delay_samples + 1, std::move(initial)) {}

void DelayBuffer::push(std::vector<Vector> states) {
  history_.push_back(std::move(states));
  while (history_.size() > delay_ + 1) history_.pop_front();
}

const Vector& DelayBuffer::delayed(std::size_t agent) const {
  if (agent >= history_.front().size()) throw ArgumentError("agent index out of range");
  return history_.front()[agent];
}

ocp::NeighborSnapshot snapshot_neighbors(std::size_t i, const graph::Topology& topo,
                                         std::span<const Vector> states) {
  if (states.size() != topo.size()) throw ArgumentError("state count does not match topology");
  ocp::NeighborSnapshot nb;
  for (std::size_t j : graph::neighbors(topo, i)) {
    nb.entries.push_back({j, topo.weight(i, j), states[j]});
  }
  return nb;
}

ocp::NeighborSnapshot snapshot_neighbors(std::size_t i, const graph::Topology& topo,
                                         const DelayBuffer& buffer) {
  return snapshot_neighbors(i, topo, std::span<const Vector>(buffer.delayed_states()));
}

ConsensusError consensus_error(std::span<const Vector> states) {
  ConsensusError out{Vector(), 0.0};
  if (states.empty()) return out;
  const auto n = states.front().size();
  out.stacked.resize(static_cast<Eigen::Index>(states.size() - 1) * n);
  for (std::size_t i = 1; i < states.size(); ++i) {
    const Vector d = states[i] - states[0];
    out.stacked.segment(static_cast<Eigen::Index>(i - 1) * n, n) = d;
    out.max_norm = std::max(out.max_norm, d.norm());
  }
  return out;
}

double SampleRecord::total_cost() const {
  double s = 0.0;
  for (double c : cost) s += c;
  return s;
}

World::World(SimConfig config, RunOptions options)
    : config_((config.validate(), std::move(config))),
      options_(options),
      model_(dynamics::make_model(config_.model, config_.gauss_newton)),
      integrator_(config_.tau_step, config_.ts, config_.As, config_.scheme),
      states_(config_.initial_states),
      buffer_(config_.initial_states, config_.delay_samples()) {
  sigma_ = config_.schedule.is_auto() ? config_.schedule.initial_index()
                                      : graph::sigma_at(config_.schedule, 0.0);
  const graph::Topology& topo = config_.schedule.topologies()[sigma_];
  solvers_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    solvers_.push_back(sweep::initialize(states_[i], snapshot(i, topo), config_.weights[i]));
  }
}

ocp::NeighborSnapshot World::snapshot(std::size_t i, const graph::Topology& topo) const {
  if (options_.bypass_buffer_without_delay && buffer_.delay_samples() == 0) {
    return snapshot_neighbors(i, topo, std::span<const Vector>(states_));
  }
  return snapshot_neighbors(i, topo, buffer_);
}

std::size_t World::resolve_sigma() const {
  if (config_.schedule.is_auto()) return sigma_;
  // Sample times are k * ts in floating point; nudge so that a sample that
  // nominally coincides with a switch time lands on the new segment.
  return graph::sigma_at(config_.schedule, time() + kGridTolerance * config_.ts);
}

std::vector<sweep::AdvanceResult> World::solve_all(
    const std::vector<ocp::NeighborSnapshot>& snapshots) {
  const std::size_t m = states_.size();
  const double t = time();
  auto solve_one = [&](std::size_t i) {
    try {
      return sweep::advance(solvers_[i], states_[i], snapshots[i], config_.weights[i], *model_, t,
                            integrator_, config_.horizon);
    } catch (const DivergenceError& e) {
      throw e.with_context(i, t);
    }
  };

  std::vector<sweep::AdvanceResult> results;
  results.reserve(m);
  if (options_.workers <= 1 || m == 1) {
    for (std::size_t i = 0; i < m; ++i) results.push_back(solve_one(i));
    return results;
  }
  std::vector<std::future<sweep::AdvanceResult>> pending;
  pending.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    pending.push_back(std::async(std::launch::async, solve_one, i));
  }
  for (auto& f : pending) results.push_back(f.get());
  return results;
}

void World::step(bool integrate_plant) {
  const double t = time();
  const std::size_t m = states_.size();
  sigma_ = resolve_sigma();
  const graph::Topology& topo = config_.schedule.topologies()[sigma_];

  std::vector<ocp::NeighborSnapshot> snapshots;
  snapshots.reserve(m);
  for (std::size_t i = 0; i < m; ++i) snapshots.push_back(snapshot(i, topo));

  const std::vector<sweep::AdvanceResult> results = solve_all(snapshots);

  SampleRecord rec;
  rec.t = t;
  rec.sigma = sigma_;
  rec.x = states_;
  for (const auto& r : results) {
    rec.u.push_back(r.u);
    rec.cost.push_back(r.cost);
    rec.residual_norm.push_back(r.residual.norm());
  }
  rec.consensus_err = consensus_error(states_).max_norm;
  if (log_.switches.empty() || log_.switches.back().index != sigma_) {
    log_.switches.push_back({t, sigma_});
  }
  log_.samples.push_back(std::move(rec));

  if (config_.schedule.is_auto()) {
    const auto& candidates = config_.schedule.topologies();
    SwitchDecision decision{t, {}, 0};
    for (const auto& c : candidates) decision.candidate_costs.push_back(network_cost(*this, c));
    decision.chosen = argmin_cost(decision.candidate_costs);
    sigma_ = decision.chosen;
    log_.decisions.push_back(std::move(decision));
  }

  if (!integrate_plant) return;
  for (std::size_t i = 0; i < m; ++i) {
    states_[i] = plant_step(*model_, states_[i], results[i].u, config_.ts);
    if (!states_[i].allFinite()) {
      throw DivergenceError("plant", 0.0, i, t);
    }
  }
  buffer_.push(states_);
  ++sample_;
}

double network_cost(const World& world, const graph::Topology& candidate) {
  if (candidate.size() != world.states().size()) {
    throw ArgumentError("candidate topology has the wrong node count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < world.solvers().size(); ++i) {
    total += sweep::horizon_cost(world.solvers()[i], world.snapshot(i, candidate),
                                 world.config().weights[i]);
  }
  return total;
}

std::size_t argmin_cost(std::span<const double> costs) {
  if (costs.empty()) throw ArgumentError("no candidate topologies");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (costs[k] < best_cost) {
      best_cost = costs[k];
      best = k;
    }
  }
  return best;
}

std::size_t select_topology(const World& world, std::span<const graph::Topology> candidates) {
  std::vector<double> costs;
  for (const auto& c : candidates) costs.push_back(network_cost(world, c));
  return argmin_cost(costs);
}

TrajectoryLog run(const SimConfig& config, RunOptions options) {
  World world(config, options);
  const std::size_t steps = world.config().step_count();
  try {
    for (std::size_t k = 0; k < steps; ++k) world.step(true);
    world.step(false);
  } catch (const DivergenceError& e) {
    throw RunDiverged(e, world.release_log());
  }
  return world.release_log();
}

}  // namespace nrhc::sim
