#include "nrhc/certify.hpp"

#include <algorithm>
#include <random>

#include "nrhc/oracle.hpp"

namespace nrhc::certify {

namespace {

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1.0);
}

}  // namespace

double GradientReport::worst_first_order() const {
  return std::max({grad_H_x, grad_H_u, terminal_gradient, jacobian});
}

GradientReport certify_gradients(const sim::SimConfig& config, std::size_t points,
                                 std::uint64_t seed, double bound) {
  config.validate();
  const auto model = dynamics::make_model(config.model, config.gauss_newton);
  const auto n = static_cast<Eigen::Index>(config.state_dim());
  const ocp::CostWeights& w = config.weights.front();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-bound, bound);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  auto random_vector = [&] {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = coord(rng);
    return v;
  };

  GradientReport rep;
  rep.points = points;
  for (std::size_t p = 0; p < points; ++p) {
    const Vector x = random_vector();
    const Vector u = random_vector();
    const Vector lam = random_vector();
    ocp::NeighborSnapshot nb;
    const std::size_t count = 1 + p % 3;
    for (std::size_t j = 0; j < count; ++j) nb.entries.push_back({j + 1, weight(rng), random_vector()});

    const Vector hx = oracle::fd_gradient(
        [&](const Vector& xx) { return ocp::hamiltonian(xx, u, lam, nb, w, *model); }, x);
    rep.grad_H_x = std::max(rep.grad_H_x, rel_err(ocp::grad_H_x(x, u, lam, nb, w, *model), hx));

    const Vector hu = oracle::fd_gradient(
        [&](const Vector& uu) { return ocp::hamiltonian(x, uu, lam, nb, w, *model); }, u);
    rep.grad_H_u = std::max(rep.grad_H_u, rel_err(ocp::grad_H_u(u, lam, w), hu));

    const Vector phix = oracle::fd_gradient(
        [&](const Vector& xx) { return ocp::terminal_cost(xx, nb, w); }, x);
    rep.terminal_gradient = std::max(rep.terminal_gradient, rel_err(ocp::terminal_gradient(x, nb, w), phix));

    const Matrix jac = oracle::fd_jacobian([&](const Vector& xx) { return model->eval_f(xx); }, x);
    rep.jacobian = std::max(rep.jacobian, rel_err(model->jacobian(x), jac));

    const Matrix hess = oracle::fd_jacobian(
        [&](const Vector& xx) -> Vector { return model->jacobian(xx).transpose() * lam; }, x);
    rep.hessian_contract = std::max(rep.hessian_contract, rel_err(model->hessian_contract(x, lam), hess));

    const Matrix c_fd = oracle::fd_jacobian(
        [&](const Vector& xx) -> Vector {
          return oracle::fd_gradient(
              [&](const Vector& x2) { return ocp::hamiltonian(x2, u, lam, nb, w, *model); }, xx,
              {1e-4});
        },
        x, {1e-4});
    const Matrix c = ocp::abc_matrices(x, u, lam, nb, w, *model).C;
    rep.variational_C = std::max(rep.variational_C, rel_err(c, c_fd));
  }
  return rep;
}

RiccatiReport certify_riccati(double tau_step) {
  RiccatiReport rep;
  const dynamics::LinearModel lti(dynamics::LorenzModel().jacobian(Vector::Zero(3)));
  // One neighbor with unit weight gives C = Q = I; R = I gives B = I.
  const ocp::CostWeights w = ocp::CostWeights::identity(3);
  ocp::NeighborSnapshot nb;
  nb.entries.push_back({1, 1.0, Vector::Zero(3)});
  const sweep::IntegratorConfig cfg(tau_step, 0.01, -50.0 * Matrix::Identity(3, 3));

  sweep::AgentSolverState s;
  s.lam = Vector::Zero(3);
  sweep::forward_horizon(s, Vector::Zero(3), nb, w, lti, 1.0, cfg);
  const sweep::TerminalConditions term{ocp::terminal_hessian(nb, w), Vector::Zero(3)};
  sweep::backward_sweep(s, nb, w, lti, term);
  const auto ref = oracle::riccati_reference(lti.matrix(), Matrix::Identity(3, 3),
                                             Matrix::Identity(3, 3), term.S, s.tau);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    rep.sweep_vs_reference = std::max(rep.sweep_vs_reference, rel_err(s.S[k], ref[k]));
  }

  // Scalar integrator agent: A0 = 0, B = R^{-1} = 1, C = weight * Q = 1, S(T) = 0.
  const dynamics::LinearModel integrator(Matrix::Zero(1, 1));
  const ocp::CostWeights w1 = ocp::CostWeights::identity(1);
  ocp::NeighborSnapshot nb1;
  nb1.entries.push_back({1, 1.0, Vector::Zero(1)});
  const sweep::IntegratorConfig cfg1(tau_step, 0.01, -50.0 * Matrix::Identity(1, 1));
  sweep::AgentSolverState s1;
  s1.lam = Vector::Zero(1);
  sweep::forward_horizon(s1, Vector::Zero(1), nb1, w1, integrator, 1.0, cfg1);
  sweep::backward_sweep(s1, nb1, w1, integrator, {Matrix::Zero(1, 1), Vector::Zero(1)});
  rep.scalar_S0 = s1.S.front()(0, 0);
  for (std::size_t k = 0; k < s1.tau.size(); ++k) {
    rep.scalar_vs_closed_form =
        std::max(rep.scalar_vs_closed_form,
                 std::abs(s1.S[k](0, 0) - oracle::scalar_riccati_closed_form(1.0, s1.tau[k])));
  }
  return rep;
}

}  // namespace nrhc::certify
