// oracles.hpp -- independent reference implementations for the test suite.
// Everything here recomputes quantities the library also produces, but by a
// different route (dense eigensolvers, Kosaraju instead of Tarjan, the full
// master equation instead of Monte Carlo, branch and bound instead of the
// barrier solver), so agreement is meaningful.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "asis/graph.hpp"
#include "asis/params.hpp"

namespace oracle {

Eigen::MatrixXd adjacency(const asis::Graph& g);

// Largest eigenvalue of a symmetric matrix.
double radius_dense_sym(const Eigen::MatrixXd& a);

// Max real part over all eigenvalues (general dense solver).
double abscissa_dense(const Eigen::MatrixXd& a);

// exp(A) * v through the dense Pade implementation.
Eigen::VectorXd expm_multiply(const Eigen::MatrixXd& a, const Eigen::VectorXd& v);

// Strong connectivity of the off-diagonal sparsity pattern, by Kosaraju's
// two-pass algorithm.
bool strongly_connected_kosaraju(const Eigen::MatrixXd& a);

// Exact marginals P[x_i(t) = 1] of the static-network SIS process (no
// cutting, no rewiring) started deterministically from x0, via the full
// 2^n master equation and a dense matrix exponential. n <= 12.
std::vector<std::vector<double>> sis_master_marginals(const asis::Graph& g,
                                                      const std::vector<double>& beta,
                                                      const std::vector<double>& delta,
                                                      const std::vector<std::uint8_t>& x0,
                                                      const std::vector<double>& grid);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Decay-rate feasibility eta(M(phi)) < -alpha decided without eigensolvers:
// -(M + alpha I) is a Z-matrix, and it is a nonsingular M-matrix (all
// eigenvalues of M + alpha I in the open left half plane) exactly when
// Gaussian elimination without pivoting meets only positive pivots. The
// phi-dependent entries sit on the q-block diagonal, so the phi-free part
// is prefactored once.
class FeasibilityTester {
  public:
    FeasibilityTester(const asis::Graph& g, const asis::ModelParams& base, double alpha);

    bool feasible(const std::vector<double>& phi) const;

  private:
    Eigen::MatrixXd e0_;          // -(M(phi=0) + alpha I)
    std::vector<int> row_node_;   // q-block row -> node whose phi enters
    int n_ = 0;
};

// Exact minimizer of sum_i node_cost(phi_i) over the uniform grid
// {lo + k (hi-lo)/(points-1)} ^ n subject to eta(M(phi)) < -alpha, by
// monotone branch and bound: more cutting never hurts feasibility and the
// per-node cost is nondecreasing, so a box is pruned when its upper corner
// is infeasible or its lower-corner cost cannot beat the incumbent, and it
// is resolved when its lower corner is feasible.
struct GridDesignResult {
    bool completed = false;   // search exhausted within the box budget
    double best_cost = 0.0;
    std::vector<double> best_phi;
    long long boxes = 0;
};

GridDesignResult grid_design_optimum(const asis::Graph& g, const asis::ModelParams& base,
                                     double alpha, double lo, double hi, int points,
                                     const std::function<double(double)>& node_cost,
                                     const std::vector<double>& seed_phi,
                                     long long max_boxes = 20'000'000);

} // namespace oracle
