#pragma once

// Brute-force and closed-form references used to certify the solver. Nothing
// in here calls into graph algorithms, ocp, sweep or sim.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nrhc/graph.hpp"

namespace nrhc::oracle {

struct FiniteDifferenceSpec {
  /// Relative step: coordinate k is perturbed by h * max(1, |x_k|).
  double h = 1e-6;
};

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference gradient. Throws ArgumentError if f is not finite near x.
Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                            FiniteDifferenceSpec spec = {});

/// Central-difference Jacobian, column k = d f / d x_k.
Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                            FiniteDifferenceSpec spec = {});

/// Backward solution of S' = -A^T S - S A + S B S - C with constant matrices,
/// S(grid.back()) = S_T, using classical RK4 with 64 substeps per grid interval.
/// Returns S at every grid point. Throws DivergenceError on blow-up.
std::vector<Eigen::MatrixXd> riccati_reference(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                               const Eigen::MatrixXd& C, const Eigen::MatrixXd& S_T,
                                               std::span<const double> grid);

/// Closed form of the scalar case A = 0, B = C = 1, S(T) = 0: S(tau) = tanh(T - tau).
double scalar_riccati_closed_form(double T, double tau);

/// Tries every root and walks information-flow edges (j -> i when a_ij > 0)
/// depth first. Limited to 12 nodes.
bool spanning_tree_bruteforce(const Eigen::MatrixXd& adjacency);

inline bool spanning_tree_bruteforce(const graph::Topology& topo) {
  return spanning_tree_bruteforce(topo.adjacency());
}

/// Entrywise max over the family, then the brute-force test.
bool jointly_connected_bruteforce(std::span<const graph::Topology> family);

}  // namespace nrhc::oracle
