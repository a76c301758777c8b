// hetero_design.hpp -- cost-optimal per-node cutting rates with fixed
// rewiring rates, via the affine shift to a nonnegative matrix and a
// geometric program on the shifted cutting rates.
#pragma once

#include <string>
#include <vector>

#include "asis/gp.hpp"
#include "asis/graph.hpp"
#include "asis/meanfield.hpp"
#include "asis/params.hpp"

namespace asis {

// Nonnegative reformulation of the mean-field matrix. With
// tilde_phi_i = r - phi_i the matrix satisfies
//   Mt = M + (bar_delta + r + bar_psi) I,
// so eta(M) <= -alpha iff eta(Mt + alpha I) <= bar_delta + r + bar_psi.
struct TildeSystem {
    double r = 0.0;
    double bar_delta = 0.0;
    double bar_psi = 0.0;
    double shift = 0.0;        // bar_delta + r + bar_psi
    SpMat Mt;                  // nonnegative, same layout as MeanFieldSystem::M
    EdgeIndexMap map;
    int n = 0, m = 0;

    int dim() const { return n + 2 * m; }
};

// Builds the shifted matrix for the phi in params and checks the shift
// identity against the assembled M entrywise (1e-12 absolute, a guard
// against layout drift between the two assemblies). Throws if
// r <= max_i phi_i.
TildeSystem tilde_shift(const Graph& g, const ModelParams& params, double r, double alpha);

// Normalized diminishing-returns cost on [phi_lo, phi_hi], 0 at phi_lo and
// 1 at phi_hi; requires phi_hi < r.
double normalized_cost(double x, double r, double phi_lo, double phi_hi);

// Per-node cost in the shifted variable: F(x) = constant + sum_t c_t x^{e_t}
// with c_t > 0, so the design objective is a posynomial.
struct HeteroCost {
    std::vector<std::pair<double, double>> monomials;  // (coefficient, exponent)
    double constant = 0.0;                             // reported, not optimized
    std::string name;

    // F(x) = c / x + s matching normalized_cost composed with phi = r - x.
    static HeteroCost normalized(double r, double phi_lo, double phi_hi);
    // F(x) = 1 / x, the unnormalized diminishing-returns cost (increasing
    // in phi); handy for tests.
    static HeteroCost reciprocal();
};

struct HeteroDesignProblem {
    double alpha = 0.0;
    double r = 0.0;
    double phi_lo = 0.0, phi_hi = 0.0;
    HeteroCost cost;
    GpSolveOptions solver;
    double cert_tol = 1e-6;  // posterior requirement eta <= -alpha + cert_tol
};

struct HeteroDesignResult {
    bool feasible = false;
    std::vector<double> phi;      // per node
    Eigen::VectorXd v;            // certifying vector, unit max entry
    double objective = 0.0;       // sum of cost monomials at the solution
    double total_cost = 0.0;      // objective + n * cost.constant
    double achievable_decay = 0.0;  // -eta at phi == phi_hi
    StabilityCertificate certificate;
    bool certificate_ok = false;  // eta <= -alpha + cert_tol
    int outer_iterations = 0;
    int newton_iterations = 0;
    double max_constraint = 0.0;  // max transformed constraint value (< 0 ok)
    bool boundary_solution = false;  // feasible only at phi == phi_hi
    std::string message;

    std::string to_json(const Graph& g, double alpha) const;
    std::string to_csv(const Graph& g) const;  // node,degree,phi
};

// Transformed convex program for the instance; exposed for the gradient
// and equivalence tests. Variable layout: y_i = log(tilde phi_i) for
// i < n, then u = log v.
LogConvexProgram build_design_program(const Graph& g, const ModelParams& base,
                                      const HeteroDesignProblem& prob);

HeteroDesignResult design_heterogeneous(const Graph& g, const ModelParams& base,
                                        const HeteroDesignProblem& prob);

// Reassembles M with the given rates and certifies the decay rate.
StabilityCertificate verify_design(const Graph& g, const ModelParams& params, double alpha);

} // namespace asis
