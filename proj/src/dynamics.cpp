#include "nrhc/dynamics.hpp"

#include <map>
#include <mutex>

#include "nrhc/errors.hpp"

namespace nrhc::dynamics {

void DynamicsModel::check_dim(const Vector& v, const char* what) const {
  if (static_cast<std::size_t>(v.size()) != dim()) {
    throw ArgumentError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                        ", model " + name() + " expects " + std::to_string(dim()));
  }
}

Vector DynamicsModel::eval_f(const Vector& x) const {
  check_dim(x, "state");
  return f_impl(x);
}

Matrix DynamicsModel::jacobian(const Vector& x) const {
  check_dim(x, "state");
  return jacobian_impl(x);
}

Matrix DynamicsModel::hessian_contract(const Vector& x, const Vector& lam) const {
  check_dim(x, "state");
  check_dim(lam, "costate");
  return hessian_contract_impl(x, lam);
}

namespace {
constexpr double kSigma = 10.0;
constexpr double kRho = 28.0;
constexpr double kBeta = 8.0 / 3.0;
}  // namespace

Vector LorenzModel::f_impl(const Vector& x) const {
  Vector f(3);
  f << kSigma * (x(1) - x(0)),  //
      kRho * x(0) - x(0) * x(2) - x(1),  //
      x(0) * x(1) - kBeta * x(2);
  return f;
}

Matrix LorenzModel::jacobian_impl(const Vector& x) const {
  Matrix j(3, 3);
  j << -kSigma, kSigma, 0.0,  //
      kRho - x(2), -1.0, -x(0),  //
      x(1), x(0), -kBeta;
  return j;
}

Matrix LorenzModel::hessian_contract_impl(const Vector&, const Vector& lam) const {
  // Only the bilinear terms -x1 x3 (row 2) and x1 x2 (row 3) have curvature.
  Matrix h = Matrix::Zero(3, 3);
  h(0, 2) = h(2, 0) = -lam(1);
  h(0, 1) = h(1, 0) = lam(2);
  return h;
}

LinearModel::LinearModel(Matrix a0) : a0_(std::move(a0)) {
  if (a0_.rows() < 1 || a0_.rows() != a0_.cols()) {
    throw ArgumentError("linear model matrix must be square and non-empty");
  }
}

GaussNewtonModel::GaussNewtonModel(ModelPtr inner) : inner_(std::move(inner)) {
  if (!inner_) throw ArgumentError("GaussNewtonModel needs a model");
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, ModelFactory, std::less<>> factories{
      {"lorenz", [] { return std::make_shared<const LorenzModel>(); }},
  };
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_model(std::string name, ModelFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[std::move(name)] = std::move(factory);
}

ModelPtr make_model(std::string_view name, bool gauss_newton) {
  ModelFactory factory;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) {
      throw ArgumentError("unknown dynamics model '" + std::string(name) + "'");
    }
    factory = it->second;
  }
  ModelPtr model = factory();
  if (gauss_newton) {
    model = std::make_shared<const GaussNewtonModel>(std::move(model));
  }
  return model;
}

std::vector<std::string> registered_models() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : r.factories) names.push_back(name);
  return names;
}

}  // namespace nrhc::dynamics
