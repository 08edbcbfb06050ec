#pragma once

#include <cstddef>
#include <vector>

#include "nrhc/dynamics.hpp"

namespace nrhc::ocp {

/// Quadratic weights of one agent's consensus cost: running state weight Q,
/// terminal weight QN and control weight R. All three must be symmetric
/// positive definite; the constructor checks this.
class CostWeights {
 public:
  CostWeights(Matrix q, Matrix qn, Matrix r);

  /// Same weight matrix for all three terms.
  static CostWeights identity(std::size_t n);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  const Matrix& Q() const noexcept { return q_; }
  const Matrix& QN() const noexcept { return qn_; }
  const Matrix& R() const noexcept { return r_; }
  const Matrix& R_inverse() const noexcept { return r_inv_; }

  bool operator==(const CostWeights& o) const { return q_ == o.q_ && qn_ == o.qn_ && r_ == o.r_; }

 private:
  Matrix q_, qn_, r_, r_inv_;
};

/// Horizon length T(t) = Tf (1 - exp(-alpha t)), growing from zero.
class HorizonSchedule {
 public:
  HorizonSchedule(double final_length, double alpha);

  double length(double t) const;
  double rate(double t) const;
  double final_length() const noexcept { return tf_; }
  double alpha() const noexcept { return alpha_; }

  bool operator==(const HorizonSchedule&) const = default;

 private:
  double tf_;
  double alpha_;
};

struct Neighbor {
  std::size_t index;
  double weight;
  Vector state;
};

/// Neighbor states as received once at the sampling instant. They are held
/// constant over the whole prediction horizon.
struct NeighborSnapshot {
  std::vector<Neighbor> entries;

  double weight_sum() const;
  /// sum_j a_ij (x - x_j)
  Vector weighted_disagreement(const Vector& x) const;
};

/// 1/2 (sum_j a_ij |x - x_j|_Q^2 + |u|_R^2)
double running_cost(const Vector& x, const Vector& u, const NeighborSnapshot& nb,
                    const CostWeights& w);

/// phi = 1/2 sum_j a_ij |x - x_j|_QN^2
double terminal_cost(const Vector& x, const NeighborSnapshot& nb, const CostWeights& w);
Vector terminal_gradient(const Vector& x, const NeighborSnapshot& nb, const CostWeights& w);
Matrix terminal_hessian(const NeighborSnapshot& nb, const CostWeights& w);

/// H = L + lam^T (F(x) + u)
double hamiltonian(const Vector& x, const Vector& u, const Vector& lam, const NeighborSnapshot& nb,
                   const CostWeights& w, const dynamics::DynamicsModel& model);

/// dH/dx = sum_j a_ij Q (x - x_j) + F_x(x)^T lam. The control enters H
/// additively, so `u` only participates in the dimension check.
Vector grad_H_x(const Vector& x, const Vector& u, const Vector& lam, const NeighborSnapshot& nb,
                const CostWeights& w, const dynamics::DynamicsModel& model);

/// dH/du = R u + lam
Vector grad_H_u(const Vector& u, const Vector& lam, const CostWeights& w);

/// Stationary point of H in u: u = -R^{-1} lam.
Vector control_from_costate(const Vector& lam, const CostWeights& w);

/// Optimality residual lam(T) - phi_x(x(T)).
Vector residual_P(const Vector& lam_T, const Vector& x_T, const NeighborSnapshot& nb,
                  const CostWeights& w);

/// Coefficients of the linear variational system of the optimality conditions.
struct VariationalMatrices {
  Matrix A;
  Matrix B;
  Matrix C;
};

/// For x' = F(x) + u: A = F_x, B = R^{-1}, C = (sum_j a_ij) Q + lam^T F_xx.
VariationalMatrices abc_matrices(const Vector& x, const Vector& u, const Vector& lam,
                                 const NeighborSnapshot& nb, const CostWeights& w,
                                 const dynamics::DynamicsModel& model);

}  // namespace nrhc::ocp
