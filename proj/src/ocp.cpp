#include "nrhc/ocp.hpp"

#include <cmath>
#include <string>

#include "nrhc/errors.hpp"

namespace nrhc::ocp {

namespace {

void require_spd(const Matrix& m, const char* name) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ArgumentError(std::string(name) + " must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw ArgumentError(std::string(name) + " has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ArgumentError(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ArgumentError(std::string(name) + " must be positive definite");
  }
}

void require_dim(const Vector& v, std::size_t n, const char* name) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw ArgumentError(std::string(name) + " has dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(n));
  }
}

void require_snapshot(const NeighborSnapshot& nb, std::size_t n) {
  for (const auto& e : nb.entries) {
    require_dim(e.state, n, "neighbor state");
  }
}

}  // namespace

CostWeights::CostWeights(Matrix q, Matrix qn, Matrix r)
    : q_(std::move(q)), qn_(std::move(qn)), r_(std::move(r)) {
  require_spd(q_, "Q");
  require_spd(qn_, "QN");
  require_spd(r_, "R");
  if (qn_.rows() != q_.rows() || r_.rows() != q_.rows()) {
    throw ArgumentError("Q, QN and R must have the same dimension");
  }
  r_inv_ = r_.llt().solve(Matrix::Identity(r_.rows(), r_.cols()));
  r_inv_ = 0.5 * (r_inv_ + r_inv_.transpose()).eval();
}

CostWeights CostWeights::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return CostWeights(Matrix::Identity(k, k), Matrix::Identity(k, k), Matrix::Identity(k, k));
}

HorizonSchedule::HorizonSchedule(double final_length, double alpha)
    : tf_(final_length), alpha_(alpha) {
  if (!(tf_ > 0.0) || !std::isfinite(tf_)) throw ArgumentError("Tf must be positive");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ArgumentError("alpha must be positive");
}

double HorizonSchedule::length(double t) const { return -tf_ * std::expm1(-alpha_ * t); }

double HorizonSchedule::rate(double t) const { return tf_ * alpha_ * std::exp(-alpha_ * t); }

double NeighborSnapshot::weight_sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight;
  return s;
}

Vector NeighborSnapshot::weighted_disagreement(const Vector& x) const {
  Vector d = Vector::Zero(x.size());
  for (const auto& e : entries) d += e.weight * (x - e.state);
  return d;
}

double running_cost(const Vector& x, const Vector& u, const NeighborSnapshot& nb,
                    const CostWeights& w) {
  const std::size_t n = w.dim();
  require_dim(x, n, "state");
  require_dim(u, n, "control");
  require_snapshot(nb, n);
  double s = u.dot(w.R() * u);
  for (const auto& e : nb.entries) {
    const Vector d = x - e.state;
    s += e.weight * d.dot(w.Q() * d);
  }
  return 0.5 * s;
}

double terminal_cost(const Vector& x, const NeighborSnapshot& nb, const CostWeights& w) {
  require_dim(x, w.dim(), "state");
  require_snapshot(nb, w.dim());
  double s = 0.0;
  for (const auto& e : nb.entries) {
    const Vector d = x - e.state;
    s += e.weight * d.dot(w.QN() * d);
  }
  return 0.5 * s;
}

Vector terminal_gradient(const Vector& x, const NeighborSnapshot& nb, const CostWeights& w) {
  require_dim(x, w.dim(), "state");
  require_snapshot(nb, w.dim());
  return w.QN() * nb.weighted_disagreement(x);
}

Matrix terminal_hessian(const NeighborSnapshot& nb, const CostWeights& w) {
  return nb.weight_sum() * w.QN();
}

double hamiltonian(const Vector& x, const Vector& u, const Vector& lam, const NeighborSnapshot& nb,
                   const CostWeights& w, const dynamics::DynamicsModel& model) {
  require_dim(lam, w.dim(), "costate");
  return running_cost(x, u, nb, w) + lam.dot(model.eval_f(x) + u);
}

Vector grad_H_x(const Vector& x, const Vector& u, const Vector& lam, const NeighborSnapshot& nb,
                const CostWeights& w, const dynamics::DynamicsModel& model) {
  const std::size_t n = w.dim();
  require_dim(x, n, "state");
  require_dim(u, n, "control");
  require_dim(lam, n, "costate");
  require_snapshot(nb, n);
  return w.Q() * nb.weighted_disagreement(x) + model.jacobian(x).transpose() * lam;
}

Vector grad_H_u(const Vector& u, const Vector& lam, const CostWeights& w) {
  require_dim(u, w.dim(), "control");
  require_dim(lam, w.dim(), "costate");
  return w.R() * u + lam;
}

Vector control_from_costate(const Vector& lam, const CostWeights& w) {
  require_dim(lam, w.dim(), "costate");
  return -(w.R_inverse() * lam);
}

Vector residual_P(const Vector& lam_T, const Vector& x_T, const NeighborSnapshot& nb,
                  const CostWeights& w) {
  require_dim(lam_T, w.dim(), "costate");
  return lam_T - terminal_gradient(x_T, nb, w);
}

VariationalMatrices abc_matrices(const Vector& x, const Vector& u, const Vector& lam,
                                 const NeighborSnapshot& nb, const CostWeights& w,
                                 const dynamics::DynamicsModel& model) {
  const std::size_t n = w.dim();
  require_dim(x, n, "state");
  require_dim(u, n, "control");
  require_dim(lam, n, "costate");
  require_snapshot(nb, n);
  // f_u = I and H_ux = 0 because the control enters additively; H_uu = R.
  return {model.jacobian(x), w.R_inverse(),
          nb.weight_sum() * w.Q() + model.hessian_contract(x, lam)};
}

}  // namespace nrhc::ocp
