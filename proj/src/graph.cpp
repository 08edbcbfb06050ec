#include "nrhc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nrhc/errors.hpp"

namespace nrhc::graph {

Topology::Topology(Eigen::MatrixXd adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() < 1 || adjacency_.rows() != adjacency_.cols()) {
    throw ArgumentError("adjacency must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
    for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
      const double a = adjacency_(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        throw ArgumentError("adjacency weights must be finite and non-negative");
      }
    }
    if (adjacency_(i, i) != 0.0) {
      throw ArgumentError("adjacency diagonal must be zero (no self loops)");
    }
  }
}

Topology Topology::from_edges(std::size_t m,
                              std::span<const std::pair<std::size_t, std::size_t>> edges,
                              double weight) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto& [source, receiver] : edges) {
    if (source >= m || receiver >= m) {
      throw ArgumentError("edge endpoint out of range");
    }
    a(static_cast<Eigen::Index>(receiver), static_cast<Eigen::Index>(source)) = weight;
  }
  return Topology(std::move(a));
}

Topology Topology::from_row_major(std::size_t m, std::span<const double> values) {
  if (values.size() != m * m) {
    throw ArgumentError("adjacency needs m*m = " + std::to_string(m * m) + " entries, got " +
                        std::to_string(values.size()));
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * m + j];
    }
  }
  return Topology(std::move(a));
}

Topology Topology::empty(std::size_t m) {
  return Topology(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
}

std::vector<std::size_t> neighbors(const Topology& topo, std::size_t i) {
  if (i >= topo.size()) {
    throw ArgumentError("node index " + std::to_string(i) + " out of range");
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < topo.size(); ++j) {
    if (topo.weight(i, j) > 0.0) {
      out.push_back(j);
    }
  }
  return out;
}

DegreeLaplacian degree_laplacian(const Topology& topo) {
  DegreeLaplacian out;
  out.degree = topo.adjacency().rowwise().sum().asDiagonal();
  out.laplacian = out.degree - topo.adjacency();
  return out;
}

Topology union_graph(std::span<const Topology> topologies) {
  if (topologies.empty()) {
    throw ArgumentError("union of an empty topology list");
  }
  Eigen::MatrixXd a = topologies.front().adjacency();
  for (const auto& t : topologies.subspan(1)) {
    if (t.size() != topologies.front().size()) {
      throw ArgumentError("topologies have different node counts");
    }
    a = a.cwiseMax(t.adjacency());
  }
  return Topology(std::move(a));
}

bool is_jointly_connected(std::span<const Topology> topologies) {
  const Topology u = union_graph(topologies);
  const auto m = static_cast<Eigen::Index>(u.size());

  // reach(r, i): information from r reaches i. Closure by Warshall.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index i = 0; i < m; ++i) {
      reach(r, i) = (r == i) || u.adjacency()(i, r) > 0.0;
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index r = 0; r < m; ++r) {
      if (!reach(r, k)) continue;
      for (Eigen::Index i = 0; i < m; ++i) {
        reach(r, i) = reach(r, i) || reach(k, i);
      }
    }
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    if (reach.row(r).all()) return true;
  }
  return false;
}

SwitchingSchedule::SwitchingSchedule(std::vector<Topology> topologies,
                                     std::vector<SwitchEvent> events, bool automatic,
                                     std::size_t initial)
    : topologies_(std::move(topologies)),
      events_(std::move(events)),
      auto_(automatic),
      initial_(initial) {
  if (topologies_.empty()) {
    throw ArgumentError("switching schedule needs at least one topology");
  }
  for (const auto& t : topologies_) {
    if (t.size() != topologies_.front().size()) {
      throw ArgumentError("all topologies in a schedule must share the node count");
    }
  }
  if (initial_ >= topologies_.size()) {
    throw ArgumentError("initial topology index out of range");
  }
  if (auto_) return;

  if (events_.empty() || events_.front().time != 0.0) {
    throw ArgumentError("fixed schedule must start with an event at t=0");
  }
  for (std::size_t k = 0; k < events_.size(); ++k) {
    if (events_[k].index >= topologies_.size()) {
      throw ArgumentError("switch event references topology " + std::to_string(events_[k].index) +
                          " of " + std::to_string(topologies_.size()));
    }
    if (k > 0 && !(events_[k].time > events_[k - 1].time)) {
      throw ArgumentError("switch times must be strictly increasing");
    }
  }
  initial_ = events_.front().index;
}

SwitchingSchedule SwitchingSchedule::fixed(std::vector<Topology> topologies,
                                           std::vector<SwitchEvent> events) {
  return SwitchingSchedule(std::move(topologies), std::move(events), false, 0);
}

SwitchingSchedule SwitchingSchedule::automatic(std::vector<Topology> topologies,
                                               std::size_t initial) {
  return SwitchingSchedule(std::move(topologies), {}, true, initial);
}

std::size_t sigma_at(const SwitchingSchedule& schedule, double t) {
  if (schedule.is_auto()) {
    throw StateError("automatic schedules are resolved by the simulator");
  }
  if (!(t >= 0.0)) {
    throw ArgumentError("sigma_at requires t >= 0");
  }
  const auto& ev = schedule.events();
  auto it = std::upper_bound(ev.begin(), ev.end(), t,
                             [](double value, const SwitchEvent& e) { return value < e.time; });
  return std::prev(it)->index;
}

SwitchingSchedule round_robin(std::vector<Topology> topologies, double dwell, double t_end) {
  if (!(dwell > 0.0)) {
    throw ArgumentError("dwell time must be positive");
  }
  std::vector<SwitchEvent> events;
  const std::size_t count = topologies.size();
  for (std::size_t k = 0;; ++k) {
    const double time = static_cast<double>(k) * dwell;
    if (k > 0 && time > t_end) break;
    events.push_back({time, k % count});
  }
  return SwitchingSchedule::fixed(std::move(topologies), std::move(events));
}

namespace {

Topology edges4(std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
  const std::vector<std::pair<std::size_t, std::size_t>> list(edges);
  return Topology::from_edges(4, list);
}

}  // namespace

std::vector<Topology> ring_edge_topologies() {
  return {edges4({{0, 1}}), edges4({{1, 2}}), edges4({{2, 3}}), edges4({{3, 0}})};
}

std::vector<Topology> example_topologies() {
  return {
      edges4({{0, 1}, {1, 0}, {2, 3}, {3, 2}}),
      edges4({{0, 2}, {2, 0}, {1, 3}, {3, 1}}),
      edges4({{0, 3}, {3, 0}, {1, 2}, {2, 1}}),
  };
}

Topology delay_example_topology() {
  const double values[] = {0, 0, 1, 0,  //
                           1, 0, 1, 0,  //
                           0, 1, 0, 1,  //
                           1, 0, 0, 0};
  return Topology::from_row_major(4, values);
}

}  // namespace nrhc::graph
