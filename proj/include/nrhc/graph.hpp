#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nrhc::graph {

/// Weighted directed communication graph over `m` agents.
///
/// `weight(i, j) > 0` means agent i receives agent j's state, so information
/// flows along the edge j -> i. The diagonal is always zero.
class Topology {
 public:
  explicit Topology(Eigen::MatrixXd adjacency);

  /// Builds an `m`-node graph from (source, receiver) pairs with a common weight.
  static Topology from_edges(std::size_t m,
                             std::span<const std::pair<std::size_t, std::size_t>> edges,
                             double weight = 1.0);
  static Topology from_row_major(std::size_t m, std::span<const double> values);
  static Topology empty(std::size_t m);

  std::size_t size() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }
  const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }

  bool operator==(const Topology& other) const { return adjacency_ == other.adjacency_; }

 private:
  Eigen::MatrixXd adjacency_;
};

/// Indices j with a_ij > 0, ascending.
std::vector<std::size_t> neighbors(const Topology& topo, std::size_t i);

struct DegreeLaplacian {
  Eigen::MatrixXd degree;
  Eigen::MatrixXd laplacian;
};

/// D = diag(row sums), L = D - A.
DegreeLaplacian degree_laplacian(const Topology& topo);

/// Entrywise-max union. Throws ArgumentError on an empty list or mixed sizes.
Topology union_graph(std::span<const Topology> topologies);

/// True iff the union contains a directed spanning tree along information flow.
bool is_jointly_connected(std::span<const Topology> topologies);

struct SwitchEvent {
  double time;
  std::size_t index;

  bool operator==(const SwitchEvent&) const = default;
};

/// Piecewise-constant switching signal over a fixed family of topologies.
///
/// In fixed mode the signal is given as (time, index) events starting at t=0.
/// In automatic mode the simulator picks the index every sample; only the
/// initial index is stored here.
class SwitchingSchedule {
 public:
  static SwitchingSchedule fixed(std::vector<Topology> topologies, std::vector<SwitchEvent> events);
  static SwitchingSchedule automatic(std::vector<Topology> topologies, std::size_t initial = 0);

  bool is_auto() const noexcept { return auto_; }
  std::size_t agent_count() const noexcept { return topologies_.front().size(); }
  const std::vector<Topology>& topologies() const noexcept { return topologies_; }
  const std::vector<SwitchEvent>& events() const noexcept { return events_; }
  std::size_t initial_index() const noexcept { return initial_; }

  bool operator==(const SwitchingSchedule&) const = default;

 private:
  SwitchingSchedule(std::vector<Topology> topologies, std::vector<SwitchEvent> events,
                    bool automatic, std::size_t initial);

  std::vector<Topology> topologies_;
  std::vector<SwitchEvent> events_;
  bool auto_ = false;
  std::size_t initial_ = 0;
};

/// Index active at time t (last event with time <= t). Fixed schedules only.
std::size_t sigma_at(const SwitchingSchedule& schedule, double t);

/// Cycles through every topology with a constant dwell time, covering [0, t_end].
SwitchingSchedule round_robin(std::vector<Topology> topologies, double dwell, double t_end);

/// Four single-edge subgraphs 1->2, 2->3, 3->4, 4->1 over four agents.
std::vector<Topology> ring_edge_topologies();

/// Four-agent switching family shipped with the example presets: the three
/// perfect matchings {12,34}, {13,24}, {14,23}, each pair coupled both ways.
/// No member has a spanning tree; their union is the complete graph.
std::vector<Topology> example_topologies();

/// Fixed graph of the delayed-communication example.
Topology delay_example_topology();

}  // namespace nrhc::graph
