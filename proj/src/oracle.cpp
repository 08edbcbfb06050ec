#include "nrhc/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "nrhc/errors.hpp"

namespace nrhc::oracle {

namespace {

double step_for(double xk, const FiniteDifferenceSpec& spec) {
  return spec.h * std::max(1.0, std::abs(xk));
}

}  // namespace

Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x, FiniteDifferenceSpec spec) {
  if (!(spec.h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step_for(x(k), spec);
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(k) += h;
    xm(k) -= h;
    const double fp = f(xp);
    const double fm = f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw ArgumentError("function is not finite near the evaluation point");
    }
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x, FiniteDifferenceSpec spec) {
  if (!(spec.h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  Eigen::MatrixXd jac;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step_for(x(k), spec);
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(k) += h;
    xm(k) -= h;
    const Eigen::VectorXd fp = f(xp);
    const Eigen::VectorXd fm = f(xm);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw ArgumentError("function is not finite near the evaluation point");
    }
    if (jac.size() == 0) jac.resize(fp.size(), x.size());
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

std::vector<Eigen::MatrixXd> riccati_reference(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                               const Eigen::MatrixXd& C, const Eigen::MatrixXd& S_T,
                                               std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("empty grid");
  // dS/dtau; we march in s = T - tau so that dS/ds = -dS/dtau.
  auto dS_ds = [&](const Eigen::MatrixXd& S) -> Eigen::MatrixXd {
    return A.transpose() * S + S * A - S * B * S + C;
  };
  constexpr int kSubsteps = 64;
  std::vector<Eigen::MatrixXd> out(grid.size());
  out.back() = S_T;
  Eigen::MatrixXd S = S_T;
  for (std::size_t k = grid.size() - 1; k-- > 0;) {
    const double h = (grid[k + 1] - grid[k]) / kSubsteps;
    for (int sub = 0; sub < kSubsteps; ++sub) {
      const Eigen::MatrixXd k1 = dS_ds(S);
      const Eigen::MatrixXd k2 = dS_ds(S + 0.5 * h * k1);
      const Eigen::MatrixXd k3 = dS_ds(S + 0.5 * h * k2);
      const Eigen::MatrixXd k4 = dS_ds(S + h * k3);
      S += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!S.allFinite()) throw DivergenceError("riccati_reference", grid[k]);
    out[k] = S;
  }
  return out;
}

double scalar_riccati_closed_form(double T, double tau) { return std::tanh(T - tau); }

bool spanning_tree_bruteforce(const Eigen::MatrixXd& adjacency) {
  const auto m = adjacency.rows();
  if (m > 12) throw ArgumentError("brute-force spanning tree search is limited to 12 nodes");
  if (m == 0) return false;
  for (Eigen::Index root = 0; root < m; ++root) {
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    std::vector<Eigen::Index> stack{root};
    seen[static_cast<std::size_t>(root)] = true;
    while (!stack.empty()) {
      const Eigen::Index j = stack.back();
      stack.pop_back();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (adjacency(i, j) > 0.0 && !seen[static_cast<std::size_t>(i)]) {
          seen[static_cast<std::size_t>(i)] = true;
          stack.push_back(i);
        }
      }
    }
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) return true;
  }
  return false;
}

bool jointly_connected_bruteforce(std::span<const graph::Topology> family) {
  if (family.empty()) throw ArgumentError("empty topology family");
  Eigen::MatrixXd support = Eigen::MatrixXd::Zero(family.front().adjacency().rows(),
                                                  family.front().adjacency().cols());
  for (const auto& t : family) {
    if (t.adjacency().rows() != support.rows()) throw ArgumentError("mixed node counts");
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      for (Eigen::Index j = 0; j < support.cols(); ++j) {
        if (t.adjacency()(i, j) > 0.0) support(i, j) = 1.0;
      }
    }
  }
  return spanning_tree_bruteforce(support);
}

}  // namespace nrhc::oracle
