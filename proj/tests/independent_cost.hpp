#pragma once

#include <vector>

#include "nrhc/sim.hpp"

namespace nrhc::fixture {

/// Neighbor states agents received at the world's current sample.
inline std::vector<Vector> received_states(const sim::World& world) {
  return world.config().delay > 0.0 ? world.buffer().delayed_states() : world.states();
}

// Network horizon cost recomputed from the stored solutions and raw neighbor
// states, without the snapshot or cost helpers of the library.
inline double independent_cost(const sim::World& world, const std::vector<Vector>& states,
                               const graph::Topology& topo) {
  double total = 0.0;
  for (std::size_t i = 0; i < world.solvers().size(); ++i) {
    const auto& s = world.solvers()[i];
    const auto& w = world.config().weights[i];
    auto disagreement = [&](const Vector& x, const Matrix& weight) {
      double v = 0.0;
      for (std::size_t j = 0; j < states.size(); ++j) {
        const double a = topo.adjacency()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (a > 0.0) {
          const Vector d = x - states[j];
          v += a * d.dot(weight * d);
        }
      }
      return v;
    };
    auto running = [&](std::size_t k) {
      const Vector u = -w.R().llt().solve(s.lam_star[k]);
      return 0.5 * (disagreement(s.x_star[k], w.Q()) + u.dot(w.R() * u));
    };
    double j_i = 0.5 * disagreement(s.x_star.back(), w.QN());
    for (std::size_t k = 1; k < s.tau.size(); ++k) {
      j_i += 0.5 * (s.tau[k] - s.tau[k - 1]) * (running(k - 1) + running(k));
    }
    total += j_i;
  }
  return total;
}

}  // namespace nrhc::fixture
