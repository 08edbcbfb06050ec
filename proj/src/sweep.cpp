#include "nrhc/sweep.hpp"

#include <cmath>
#include <string>

#include "nrhc/errors.hpp"

namespace nrhc::sweep {

using ocp::CostWeights;
using ocp::NeighborSnapshot;

IntegratorConfig::IntegratorConfig(double tau_step, double ts, Matrix as, Scheme scheme)
    : tau_step_(tau_step), ts_(ts), as_(std::move(as)), scheme_(scheme) {
  if (!(tau_step_ > 0.0) || !std::isfinite(tau_step_)) {
    throw ArgumentError("tau_step must be positive");
  }
  if (!(ts_ > 0.0) || !std::isfinite(ts_)) {
    throw ArgumentError("ts must be positive");
  }
  if (as_.rows() < 1 || as_.rows() != as_.cols() || !as_.allFinite()) {
    throw ArgumentError("As must be a finite square matrix");
  }
  Eigen::EigenSolver<Matrix> eig(as_, false);
  if (!(eig.eigenvalues().real().maxCoeff() < 0.0)) {
    throw ArgumentError("As must be Hurwitz");
  }
}

AgentSolverState initialize(const Vector& x0, const NeighborSnapshot& nb, const CostWeights& w) {
  AgentSolverState s;
  s.lam = ocp::terminal_gradient(x0, nb, w);
  s.residual = Vector::Zero(x0.size());
  return s;
}

std::vector<double> horizon_grid(double T, double tau_step) {
  std::vector<double> tau{0.0};
  if (!(T >= tau_step)) return tau;
  // Guard against an extra sliver interval when T is a multiple of the step.
  const auto intervals = static_cast<std::size_t>(std::ceil(T / tau_step * (1.0 - 1e-12)));
  for (std::size_t k = 1; k < intervals; ++k) {
    tau.push_back(static_cast<double>(k) * tau_step);
  }
  tau.push_back(T);
  return tau;
}

namespace {

struct StateCostate {
  Vector x;
  Vector lam;
};

/// Right-hand side of the optimality system along tau with u* = -R^{-1} lam.
StateCostate horizon_rhs(const Vector& x, const Vector& lam, const NeighborSnapshot& nb,
                         const CostWeights& w, const dynamics::DynamicsModel& model) {
  const Vector u = ocp::control_from_costate(lam, w);
  return {model.eval_f(x) + u, -ocp::grad_H_x(x, u, lam, nb, w, model)};
}

struct SweepPair {
  Matrix S;
  Vector c;
};

SweepPair sweep_rhs(const Matrix& S, const Vector& c, const ocp::VariationalMatrices& m) {
  const Matrix SB = S * m.B;
  return {-m.A.transpose() * S - S * m.A + SB * S - m.C, -(m.A.transpose() - SB) * c};
}

constexpr int kSweepSubsteps = 8;

void require_finite(bool ok, const char* stage, double tau) {
  if (!ok) throw DivergenceError(stage, tau);
}

}  // namespace

void forward_horizon(AgentSolverState& state, const Vector& x_now, const NeighborSnapshot& nb,
                     const CostWeights& w, const dynamics::DynamicsModel& model, double T,
                     const IntegratorConfig& cfg) {
  if (!(T >= 0.0)) throw ArgumentError("horizon length must be non-negative");
  if (static_cast<std::size_t>(state.lam.size()) != w.dim()) {
    throw StateError("solver state costate is not initialized");
  }
  state.tau = horizon_grid(T, cfg.tau_step());
  const std::size_t points = state.tau.size();
  state.x_star.assign(points, Vector());
  state.lam_star.assign(points, Vector());
  state.x_star[0] = x_now;
  state.lam_star[0] = state.lam;

  for (std::size_t k = 0; k + 1 < points; ++k) {
    const double h = state.tau[k + 1] - state.tau[k];
    const Vector& x = state.x_star[k];
    const Vector& l = state.lam_star[k];
    const StateCostate k1 = horizon_rhs(x, l, nb, w, model);
    if (cfg.scheme() == Scheme::Euler) {
      state.x_star[k + 1] = x + h * k1.x;
      state.lam_star[k + 1] = l + h * k1.lam;
    } else {
      const StateCostate k2 = horizon_rhs(x + 0.5 * h * k1.x, l + 0.5 * h * k1.lam, nb, w, model);
      const StateCostate k3 = horizon_rhs(x + 0.5 * h * k2.x, l + 0.5 * h * k2.lam, nb, w, model);
      const StateCostate k4 = horizon_rhs(x + h * k3.x, l + h * k3.lam, nb, w, model);
      state.x_star[k + 1] = x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
      state.lam_star[k + 1] = l + (h / 6.0) * (k1.lam + 2.0 * k2.lam + 2.0 * k3.lam + k4.lam);
    }
    require_finite(state.x_star[k + 1].allFinite() && state.lam_star[k + 1].allFinite(),
                   "forward_horizon", state.tau[k + 1]);
  }
  state.residual = ocp::residual_P(state.lam_star.back(), state.x_star.back(), nb, w);
  ++state.counters.forward;
}

TerminalConditions terminal_sweep_conditions(const AgentSolverState& state,
                                             const NeighborSnapshot& nb, const CostWeights& w,
                                             const dynamics::DynamicsModel& model, double dTdt,
                                             const Vector& P, const Matrix& As) {
  if (state.x_star.empty()) throw StateError("forward_horizon has not run");
  const Vector& xT = state.x_star.back();
  const Vector& lT = state.lam_star.back();
  const Vector uT = ocp::control_from_costate(lT, w);
  const Matrix phi_xx = ocp::terminal_hessian(nb, w);
  const Vector f = model.eval_f(xT) + uT;
  const Vector hx = ocp::grad_H_x(xT, uT, lT, nb, w, model);
  if (static_cast<std::size_t>(P.size()) != w.dim() || As.rows() != P.size()) {
    throw ArgumentError("residual / As dimension mismatch");
  }
  return {phi_xx, (hx + phi_xx * f) * (1.0 + dTdt) + As * P};
}

void backward_sweep(AgentSolverState& state, const NeighborSnapshot& nb, const CostWeights& w,
                    const dynamics::DynamicsModel& model, const TerminalConditions& terminal,
                    Scheme scheme) {
  const std::size_t points = state.tau.size();
  if (points == 0 || state.x_star.size() != points) throw StateError("forward_horizon has not run");
  state.S.assign(points, Matrix());
  state.c.assign(points, Vector());
  state.S[points - 1] = terminal.S;
  state.c[points - 1] = terminal.c;

  auto matrices_at = [&](const Vector& x, const Vector& lam) {
    return ocp::abc_matrices(x, ocp::control_from_costate(lam, w), lam, nb, w, model);
  };

  StateCostate d_hi = horizon_rhs(state.x_star[points - 1], state.lam_star[points - 1], nb, w, model);
  ocp::VariationalMatrices m_hi = matrices_at(state.x_star[points - 1], state.lam_star[points - 1]);

  for (std::size_t k = points - 1; k-- > 0;) {
    const double h = state.tau[k + 1] - state.tau[k];
    const Matrix& S = state.S[k + 1];
    const Vector& c = state.c[k + 1];
    const ocp::VariationalMatrices m_lo = matrices_at(state.x_star[k], state.lam_star[k]);
    const StateCostate d_lo = horizon_rhs(state.x_star[k], state.lam_star[k], nb, w, model);

    Matrix S_new;
    Vector c_new;
    if (scheme == Scheme::Euler) {
      const SweepPair k1 = sweep_rhs(S, c, m_hi);
      S_new = S - h * k1.S;
      c_new = c - h * k1.c;
    } else {
      // Cubic Hermite interpolation of the stored trajectory inside the interval.
      auto matrices_between = [&](double theta) {
        const double t2 = theta * theta;
        const double t3 = t2 * theta;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + theta;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        const Vector x = h00 * state.x_star[k] + h10 * h * d_lo.x + h01 * state.x_star[k + 1] +
                         h11 * h * d_hi.x;
        const Vector l = h00 * state.lam_star[k] + h10 * h * d_lo.lam + h01 * state.lam_star[k + 1] +
                         h11 * h * d_hi.lam;
        return matrices_at(x, l);
      };
      const double hs = h / kSweepSubsteps;
      S_new = S;
      c_new = c;
      ocp::VariationalMatrices m_a = m_hi;
      for (int sub = 0; sub < kSweepSubsteps; ++sub) {
        const double theta_a = 1.0 - static_cast<double>(sub) / kSweepSubsteps;
        const double theta_b = 1.0 - static_cast<double>(sub + 1) / kSweepSubsteps;
        const ocp::VariationalMatrices m_mid = matrices_between(0.5 * (theta_a + theta_b));
        const ocp::VariationalMatrices m_b = sub + 1 == kSweepSubsteps ? m_lo : matrices_between(theta_b);

        const SweepPair k1 = sweep_rhs(S_new, c_new, m_a);
        const SweepPair k2 = sweep_rhs(S_new - 0.5 * hs * k1.S, c_new - 0.5 * hs * k1.c, m_mid);
        const SweepPair k3 = sweep_rhs(S_new - 0.5 * hs * k2.S, c_new - 0.5 * hs * k2.c, m_mid);
        const SweepPair k4 = sweep_rhs(S_new - hs * k3.S, c_new - hs * k3.c, m_b);
        S_new -= (hs / 6.0) * (k1.S + 2.0 * k2.S + 2.0 * k3.S + k4.S);
        c_new -= (hs / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
        m_a = m_b;
      }
    }
    require_finite(S_new.allFinite() && c_new.allFinite(), "backward_sweep", state.tau[k]);
    state.S[k] = 0.5 * (S_new + S_new.transpose());
    state.c[k] = std::move(c_new);
    m_hi = m_lo;
    d_hi = d_lo;
  }
  ++state.counters.backward;
}

Vector costate_rate(const AgentSolverState& state, const Vector& x_now, const Vector& u_now,
                    const NeighborSnapshot& nb, const CostWeights& w,
                    const dynamics::DynamicsModel& model) {
  if (state.c.empty()) throw StateError("backward_sweep has not run");
  return -ocp::grad_H_x(x_now, u_now, state.lam, nb, w, model) + state.c.front();
}

double horizon_cost(const AgentSolverState& state, const NeighborSnapshot& nb, const CostWeights& w) {
  if (state.x_star.empty()) throw StateError("forward_horizon has not run");
  double j = ocp::terminal_cost(state.x_star.back(), nb, w);
  auto running = [&](std::size_t k) {
    return ocp::running_cost(state.x_star[k], ocp::control_from_costate(state.lam_star[k], w), nb, w);
  };
  double prev = running(0);
  for (std::size_t k = 1; k < state.tau.size(); ++k) {
    const double next = running(k);
    j += 0.5 * (state.tau[k] - state.tau[k - 1]) * (prev + next);
    prev = next;
  }
  return j;
}

AdvanceResult advance(AgentSolverState& state, const Vector& x_now, const NeighborSnapshot& nb,
                      const CostWeights& w, const dynamics::DynamicsModel& model, double t,
                      const IntegratorConfig& cfg, const ocp::HorizonSchedule& hs) {
  const double T = hs.length(t);
  forward_horizon(state, x_now, nb, w, model, T, cfg);
  const Vector P = state.residual;
  const double cost = horizon_cost(state, nb, w);

  const TerminalConditions terminal =
      terminal_sweep_conditions(state, nb, w, model, hs.rate(t), P, cfg.As());
  backward_sweep(state, nb, w, model, terminal, cfg.scheme());

  const Vector u_now = ocp::control_from_costate(state.lam, w);
  const Vector rate = costate_rate(state, x_now, u_now, nb, w, model);
  state.lam += cfg.ts() * rate;
  ++state.counters.costate;
  require_finite(state.lam.allFinite(), "costate_update", 0.0);

  return {ocp::control_from_costate(state.lam, w), P, cost, T};
}

}  // namespace nrhc::sweep
