#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "nrhc/dynamics.hpp"
#include "nrhc/errors.hpp"
#include "nrhc/graph.hpp"
#include "nrhc/ocp.hpp"
#include "nrhc/sweep.hpp"

namespace nrhc::sim {

/// Everything needed to reproduce a closed-loop run. Runs are deterministic.
struct SimConfig {
  std::string name = "custom";
  std::string model = "lorenz";
  bool gauss_newton = false;
  std::vector<Vector> initial_states;
  /// One entry per agent.
  std::vector<ocp::CostWeights> weights;
  ocp::HorizonSchedule horizon{1.0, 0.01};
  double ts = 0.01;
  double tau_step = 0.005;
  Matrix As;
  sweep::Scheme scheme = sweep::Scheme::Rk4;
  double t_end = 20.0;
  /// Communication delay; a whole number of samples.
  double delay = 0.0;
  graph::SwitchingSchedule schedule =
      graph::SwitchingSchedule::fixed({graph::Topology::empty(1)}, {{0.0, 0}});

  std::size_t agent_count() const noexcept { return initial_states.size(); }
  std::size_t state_dim() const noexcept {
    return initial_states.empty() ? 0 : static_cast<std::size_t>(initial_states.front().size());
  }
  std::size_t delay_samples() const;
  /// Number of plant steps: floor(t_end / ts).
  std::size_t step_count() const;

  /// Throws ValidationError naming the first offending field.
  void validate() const;

  bool operator==(const SimConfig& other) const;
};

/// Per-agent state history long enough to look `delay_samples` samples back.
/// Before that much history exists the initial states stand in.
class DelayBuffer {
 public:
  DelayBuffer(std::vector<Vector> initial, std::size_t delay_samples);

  void push(std::vector<Vector> states);
  /// x_agent(t - t_d) for the newest pushed sample t.
  const Vector& delayed(std::size_t agent) const;
  const std::vector<Vector>& delayed_states() const { return history_.front(); }
  std::size_t delay_samples() const noexcept { return delay_; }

 private:
  std::size_t delay_;
  std::deque<std::vector<Vector>> history_;
};

/// (j, a_ij, x_j(t - t_d)) for every neighbor j of agent i.
ocp::NeighborSnapshot snapshot_neighbors(std::size_t i, const graph::Topology& topo,
                                         const DelayBuffer& buffer);
ocp::NeighborSnapshot snapshot_neighbors(std::size_t i, const graph::Topology& topo,
                                         std::span<const Vector> states);

struct ConsensusError {
  Vector stacked;  ///< x_i - x_1 for i = 2..m
  double max_norm;
};

ConsensusError consensus_error(std::span<const Vector> states);

struct SampleRecord {
  double t;
  std::size_t sigma;
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<double> cost;
  std::vector<double> residual_norm;
  double consensus_err;

  double total_cost() const;
};

/// One automatic-switching decision taken after the solve at time t.
struct SwitchDecision {
  double t;
  std::vector<double> candidate_costs;
  std::size_t chosen;
};

struct TrajectoryLog {
  std::vector<SampleRecord> samples;
  /// Times where the active topology changed, starting with t = 0.
  std::vector<graph::SwitchEvent> switches;
  std::vector<SwitchDecision> decisions;
};

struct RunOptions {
  /// Agents solved concurrently within a sample when > 1.
  std::size_t workers = 1;
  /// Read current states directly when there is no delay.
  bool bypass_buffer_without_delay = true;
};

/// Closed-loop network: plant states, solver memories, delay line and log.
class World {
 public:
  explicit World(SimConfig config, RunOptions options = {});

  /// Solve every agent at the current sample, log it, and (optionally)
  /// integrate the plants over one sampling interval.
  void step(bool integrate_plant = true);

  const SimConfig& config() const noexcept { return config_; }
  std::size_t sample() const noexcept { return sample_; }
  double time() const noexcept { return static_cast<double>(sample_) * config_.ts; }
  const std::vector<Vector>& states() const noexcept { return states_; }
  const std::vector<sweep::AgentSolverState>& solvers() const noexcept { return solvers_; }
  const DelayBuffer& buffer() const noexcept { return buffer_; }
  const TrajectoryLog& log() const noexcept { return log_; }
  TrajectoryLog release_log() { return std::move(log_); }
  const dynamics::DynamicsModel& model() const noexcept { return *model_; }
  const sweep::IntegratorConfig& integrator() const noexcept { return integrator_; }
  /// Topology index used by the next (or current, inside step) solve.
  std::size_t active_sigma() const noexcept { return sigma_; }

  /// Snapshot agent i would receive at the current sample under `topo`.
  ocp::NeighborSnapshot snapshot(std::size_t i, const graph::Topology& topo) const;

 private:
  std::size_t resolve_sigma() const;
  std::vector<sweep::AdvanceResult> solve_all(const std::vector<ocp::NeighborSnapshot>& snapshots);

  SimConfig config_;
  RunOptions options_;
  dynamics::ModelPtr model_;
  sweep::IntegratorConfig integrator_;
  std::vector<Vector> states_;
  std::vector<sweep::AgentSolverState> solvers_;
  DelayBuffer buffer_;
  std::size_t sample_ = 0;
  std::size_t sigma_ = 0;
  TrajectoryLog log_;
};

/// Sum over agents of each agent's cost along its latest horizon solution,
/// re-evaluated with neighbor snapshots taken from `candidate`.
double network_cost(const World& world, const graph::Topology& candidate);

/// Index of the smallest cost (lowest index on ties).
std::size_t argmin_cost(std::span<const double> costs);

/// Index of the cheapest candidate (lowest index on ties).
std::size_t select_topology(const World& world, std::span<const graph::Topology> candidates);

/// Divergence during a run; carries the log recorded up to the failure.
class RunDiverged : public DivergenceError {
 public:
  RunDiverged(const DivergenceError& cause, TrajectoryLog partial)
      : DivergenceError(cause), partial_(std::move(partial)) {}
  const TrajectoryLog& partial_log() const noexcept { return partial_; }

 private:
  TrajectoryLog partial_;
};

/// Runs from t = 0 to t_end and returns one record per sample, both ends included.
TrajectoryLog run(const SimConfig& config, RunOptions options = {});

}  // namespace nrhc::sim
