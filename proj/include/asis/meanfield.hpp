// meanfield.hpp -- the (n+2m)x(n+2m) Metzler bounding matrix, its spectral
// abscissa, irreducibility check, and integration of the linear comparison
// system zdot = M z whose solution upper-bounds [p(t); q(t)] entrywise.
//
// State ordering: rows 0..n-1 carry the infection probabilities p_i; rows
// n..n+2m-1 carry q_ij = E[a_ij x_i] in EdgeIndexMap order (block of node i
// holds the pairs (i,j), j in N_i(0)).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "asis/graph.hpp"
#include "asis/params.hpp"

namespace asis {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct MeanFieldSystem {
    SpMat M;           // Metzler, sparse
    EdgeIndexMap map;  // fixes the q-block layout
    int n = 0;         // nodes
    int m = 0;         // initial edges (q-block has 2m rows)

    int dim() const { return n + 2 * m; }
};

// Columns (within the q-block) of the selector row T_i: one unit entry at
// the index of pair (k,i) for every k in N_i(0).
std::vector<int> ti_columns(const Graph& g, const EdgeIndexMap& map, int i);

// Assemble M = [[-D1, B1], [Psi1, B2 - D2 - Phi - Psi2]].
MeanFieldSystem assemble_meanfield(const Graph& g, const ModelParams& params);

enum class EigMethod { Auto, Power, Dense };

struct SpectralOptions {
    double tol = 1e-10;       // absolute Collatz-Wielandt bracket width
    int max_iter = 500000;
    EigMethod method = EigMethod::Auto;  // Auto: power iteration, dense fallback
    int dense_dim_cap = 800;             // largest dimension the dense path accepts
};

struct StabilityCertificate {
    double eta = 0.0;                 // spectral abscissa of M
    std::vector<double> perron_vector;  // nonnegative, unit max entry
    bool stable = false;              // eta < 0
    double alpha = 0.0;               // decay-rate target the caller asked about
    double shift = 0.0;               // c used for the Perron shift M + cI
    int iterations = 0;
    std::string method;               // "power" or "dense"

    std::string to_json(int dim) const;
};

// Spectral abscissa via the Perron shift: c = 1 + max|M_ii|, power-iterate
// M + cI >= 0 with Collatz-Wielandt bracketing, eta = perron - c. Falls
// back to a dense eigensolver when the bracket stalls (small dims only).
StabilityCertificate spectral_abscissa(const MeanFieldSystem& sys,
                                       const SpectralOptions& opts = {},
                                       double alpha = 0.0);

// Dense oracle: max real part of the eigenvalues, by a general eigensolver.
double spectral_abscissa_dense(const Eigen::MatrixXd& M);
double spectral_abscissa_dense(const SpMat& M);

// True iff the directed graph of M's off-diagonal sparsity pattern is
// strongly connected (iterative Tarjan SCC).
bool check_irreducible(const MeanFieldSystem& sys);
bool is_irreducible_pattern(const SpMat& M);

enum class IntegrateMethod { ExpmAction, RK45 };

struct IntegrateOptions {
    IntegrateMethod method = IntegrateMethod::ExpmAction;
    double rtol = 1e-10;
};

// Initial condition col(p(0), q(0)) implied by a deterministic start:
// p_i(0) = x_i(0), q_ij(0) = a_ij(0) x_i(0).
Vec bound_initial_state(const MeanFieldSystem& sys, const Graph& g,
                        const std::vector<std::uint8_t>& x0,
                        const std::vector<std::uint8_t>& a0);

// Solve zdot = M z on the given time grid (grid[0] >= 0, increasing);
// returns one state per grid point. z0 must be nonnegative.
std::vector<Vec> integrate_bound(const MeanFieldSystem& sys, const Vec& z0,
                                 const std::vector<double>& grid,
                                 const IntegrateOptions& opts = {});

// Coordinate text export (row col value per line) for external checks.
void export_coordinate_text(const SpMat& M, const std::string& path);

// Shared Perron machinery (also used by the tilde-shift feasibility checks):
// Collatz-Wielandt bracketing of the Perron root of a nonnegative matrix
// with strictly positive diagonal.
struct PerronResult {
    double value = 0.0;
    Vec v;
    int iterations = 0;
    bool converged = false;
};
PerronResult perron_root(const SpMat& A, double tol = 1e-12, int max_iter = 500000);

} // namespace asis
