#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nrhc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace nrhc

namespace nrhc::dynamics {

/// Drift F of an agent with dynamics x' = F(x) + u.
///
/// Implementations supply F, its Jacobian and the costate-contracted Hessian
/// sum_k lam_k d^2F_k/dx^2. The public entry points check dimensions and then
/// dispatch to the protected hooks. Models are immutable.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::size_t dim() const noexcept = 0;
  virtual std::string name() const = 0;

  Vector eval_f(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;
  Matrix hessian_contract(const Vector& x, const Vector& lam) const;

 protected:
  virtual Vector f_impl(const Vector& x) const = 0;
  virtual Matrix jacobian_impl(const Vector& x) const = 0;
  virtual Matrix hessian_contract_impl(const Vector& x, const Vector& lam) const = 0;

 private:
  void check_dim(const Vector& v, const char* what) const;
};

using ModelPtr = std::shared_ptr<const DynamicsModel>;

/// x1' = 10(x2 - x1), x2' = 28 x1 - x1 x3 - x2, x3' = x1 x2 - (8/3) x3.
class LorenzModel final : public DynamicsModel {
 public:
  std::size_t dim() const noexcept override { return 3; }
  std::string name() const override { return "lorenz"; }

 protected:
  Vector f_impl(const Vector& x) const override;
  Matrix jacobian_impl(const Vector& x) const override;
  Matrix hessian_contract_impl(const Vector& x, const Vector& lam) const override;
};

/// F(x) = A0 x. With A0 = 0 this is a pure integrator agent.
class LinearModel final : public DynamicsModel {
 public:
  explicit LinearModel(Matrix a0);

  std::size_t dim() const noexcept override { return static_cast<std::size_t>(a0_.rows()); }
  std::string name() const override { return "linear"; }
  const Matrix& matrix() const noexcept { return a0_; }

 protected:
  Vector f_impl(const Vector& x) const override { return a0_ * x; }
  Matrix jacobian_impl(const Vector&) const override { return a0_; }
  Matrix hessian_contract_impl(const Vector&, const Vector&) const override {
    return Matrix::Zero(a0_.rows(), a0_.rows());
  }

 private:
  Matrix a0_;
};

/// Wraps another model and drops its second-derivative term.
class GaussNewtonModel final : public DynamicsModel {
 public:
  explicit GaussNewtonModel(ModelPtr inner);

  std::size_t dim() const noexcept override { return inner_->dim(); }
  std::string name() const override { return inner_->name(); }

 protected:
  Vector f_impl(const Vector& x) const override { return inner_->eval_f(x); }
  Matrix jacobian_impl(const Vector& x) const override { return inner_->jacobian(x); }
  Matrix hessian_contract_impl(const Vector&, const Vector&) const override {
    return Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  }

 private:
  ModelPtr inner_;
};

using ModelFactory = std::function<ModelPtr()>;

/// Adds (or replaces) a named model available to configuration files.
void register_model(std::string name, ModelFactory factory);

/// Looks up a registered model; throws ArgumentError for unknown names.
ModelPtr make_model(std::string_view name, bool gauss_newton = false);

std::vector<std::string> registered_models();

}  // namespace nrhc::dynamics
