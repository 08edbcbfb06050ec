#pragma once

#include <cstddef>
#include <vector>

#include "nrhc/dynamics.hpp"
#include "nrhc/ocp.hpp"

namespace nrhc::sweep {

enum class Scheme { Rk4, Euler };

/// Step sizes and continuation gain of the real-time solver.
class IntegratorConfig {
 public:
  /// Throws ArgumentError unless both steps are positive and `As` is Hurwitz.
  IntegratorConfig(double tau_step, double ts, Matrix as, Scheme scheme = Scheme::Rk4);

  double tau_step() const noexcept { return tau_step_; }
  double ts() const noexcept { return ts_; }
  const Matrix& As() const noexcept { return as_; }
  Scheme scheme() const noexcept { return scheme_; }

 private:
  double tau_step_;
  double ts_;
  Matrix as_;
  Scheme scheme_;
};

struct SweepCounters {
  std::size_t forward = 0;
  std::size_t backward = 0;
  std::size_t costate = 0;
};

/// Per-agent solver memory: the costate at the start of the horizon plus the
/// most recent horizon solution on the artificial-time grid.
struct AgentSolverState {
  Vector lam;

  std::vector<double> tau;
  std::vector<Vector> x_star;
  std::vector<Vector> lam_star;
  std::vector<Matrix> S;
  std::vector<Vector> c;

  /// Residual lam*(T) - phi_x(x*(T)) of the last forward pass.
  Vector residual;
  SweepCounters counters;

  double horizon() const { return tau.empty() ? 0.0 : tau.back(); }
};

/// Costate start value with zero residual at T = 0: lam = phi_x(x0).
AgentSolverState initialize(const Vector& x0, const ocp::NeighborSnapshot& nb,
                            const ocp::CostWeights& w);

/// Grid points 0 = tau_0 < ... < tau_N = T with spacing `tau_step` (last one
/// may be shorter). A horizon shorter than one step collapses to {0}.
std::vector<double> horizon_grid(double T, double tau_step);

/// Integrates state and costate forward over [0, T] from (x_now, state.lam).
void forward_horizon(AgentSolverState& state, const Vector& x_now, const ocp::NeighborSnapshot& nb,
                     const ocp::CostWeights& w, const dynamics::DynamicsModel& model, double T,
                     const IntegratorConfig& cfg);

struct TerminalConditions {
  Matrix S;
  Vector c;
};

/// S(T) = phi_xx and c(T) = (H_x + phi_xx f)(1 + dT/dt) + As P, evaluated at
/// the end of the stored forward solution.
TerminalConditions terminal_sweep_conditions(const AgentSolverState& state,
                                             const ocp::NeighborSnapshot& nb,
                                             const ocp::CostWeights& w,
                                             const dynamics::DynamicsModel& model, double dTdt,
                                             const Vector& P, const Matrix& As);

/// Integrates S and c from tau = T back to 0 along the stored trajectory. RK4
/// takes eight substeps per grid interval on a cubic Hermite interpolant of
/// x* and lambda*; Euler takes one step per interval.
void backward_sweep(AgentSolverState& state, const ocp::NeighborSnapshot& nb,
                    const ocp::CostWeights& w, const dynamics::DynamicsModel& model,
                    const TerminalConditions& terminal, Scheme scheme = Scheme::Rk4);

/// d(lam)/dt = -H_x(x_now, u_now, lam) + c(0).
Vector costate_rate(const AgentSolverState& state, const Vector& x_now, const Vector& u_now,
                    const ocp::NeighborSnapshot& nb, const ocp::CostWeights& w,
                    const dynamics::DynamicsModel& model);

/// Cost phi(x*(T)) + int L(x*, u*) dtau along the stored horizon solution,
/// evaluated against `nb` (which need not be the snapshot used to solve).
double horizon_cost(const AgentSolverState& state, const ocp::NeighborSnapshot& nb,
                    const ocp::CostWeights& w);

struct AdvanceResult {
  Vector u;         ///< control applied over [t, t + ts]
  Vector residual;  ///< P at the start of the sample
  double cost;      ///< J_i along this sample's horizon solution
  double horizon;   ///< T(t)
};

/// One sampling instant: forward pass, backward sweep, one explicit costate
/// step over ts, then u = -R^{-1} lam(t + ts). Never iterates.
AdvanceResult advance(AgentSolverState& state, const Vector& x_now, const ocp::NeighborSnapshot& nb,
                      const ocp::CostWeights& w, const dynamics::DynamicsModel& model, double t,
                      const IntegratorConfig& cfg, const ocp::HorizonSchedule& hs);

}  // namespace nrhc::sweep
