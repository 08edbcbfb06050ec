#pragma once

#include <cstddef>
#include <cstdint>

#include "nrhc/sim.hpp"

namespace nrhc::certify {

/// Largest relative deviation between an analytic derivative and its central
/// finite-difference estimate, |a - b|_inf / max(|b|_inf, 1), over all points.
struct GradientReport {
  std::size_t points = 0;
  double grad_H_x = 0.0;
  double grad_H_u = 0.0;
  double terminal_gradient = 0.0;
  double jacobian = 0.0;
  double hessian_contract = 0.0;
  double variational_C = 0.0;

  double worst_first_order() const;
};

/// Samples states, costates, controls and neighbor states uniformly in
/// [-bound, bound] for agent 0 of `config` and compares every derivative the
/// solver uses against finite differences.
GradientReport certify_gradients(const sim::SimConfig& config, std::size_t points,
                                 std::uint64_t seed, double bound = 20.0);

struct RiccatiReport {
  double sweep_vs_reference = 0.0;  ///< max relative deviation over the grid
  double scalar_vs_closed_form = 0.0;
  double scalar_S0 = 0.0;
};

/// LTI agent with A0 = Lorenz Jacobian at the origin, B = C = I on a T = 1
/// grid: backward_sweep against riccati_reference, plus the scalar tanh case.
RiccatiReport certify_riccati(double tau_step = 0.005);

}  // namespace nrhc::certify
