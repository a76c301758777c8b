// gp.hpp -- log-transformed geometric programming: minimize a log-sum-exp
// objective subject to (log-sum-exp minus affine) constraints and box
// bounds, via a primal barrier method with sparse Newton steps.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace asis {

using GpVec = Eigen::VectorXd;

// One monomial after the log transform: log_coef + sum_k coef[k] * w[var[k]].
// At most two variables appear per term in the programs built here.
struct GpTerm {
    double log_coef = 0.0;
    int nvars = 0;
    int var[2] = {-1, -1};
    double coef[2] = {0.0, 0.0};

    void add(int v, double c) {
        var[nvars] = v;
        coef[nvars] = c;
        ++nvars;
    }
    double affine(const GpVec& w) const {
        double s = log_coef;
        for (int k = 0; k < nvars; ++k) s += coef[k] * w[var[k]];
        return s;
    }
};

// lse(terms) - w[lin_var] - lin_const <= 0; lin_var < 0 leaves the affine
// part constant.
struct GpConstraint {
    std::vector<GpTerm> terms;
    int lin_var = -1;
    double lin_const = 0.0;
};

struct LogConvexProgram {
    int nvar = 0;
    std::vector<GpTerm> objective;       // objective = lse(objective terms)
    std::vector<GpConstraint> constraints;
    std::vector<double> lower, upper;    // per-variable box; +-inf disables a side
    // Variable whose quadratic penalty removes the scaling freedom of the
    // certifying vector (any common shift of the v-block leaves the program
    // invariant). < 0 disables.
    int gauge_var = -1;
};

struct GpSolveOptions {
    // Log-space duality gap bound; 1e-6 is far inside every tolerance the
    // designs are judged against and keeps the final barrier stages cheap.
    double tol = 1e-6;
    double newton_tol = 1e-9;  // on half the squared Newton decrement
    int max_newton = 400;      // per centering problem
    int max_outer = 60;
    double t0 = 1.0;
    double mu = 10.0;          // barrier parameter growth
};

struct GpSolution {
    GpVec w;
    double objective = 0.0;        // lse value at w
    int outer_iterations = 0;
    int newton_iterations = 0;
    double gap_bound = 0.0;        // rows/t at exit
    double max_constraint = 0.0;   // max constraint value at w (should be < 0)
    bool converged = false;
    std::string message;
};

double lse_value(const std::vector<GpTerm>& terms, const GpVec& w);
double objective_value(const LogConvexProgram& prog, const GpVec& w);
GpVec objective_gradient(const LogConvexProgram& prog, const GpVec& w);
double constraint_value(const GpConstraint& c, const GpVec& w);
GpVec constraint_gradient(const GpConstraint& c, const GpVec& w, int nvar);

// True when every constraint is strictly negative and w is strictly inside
// the box; the barrier needs such a starting point.
bool strictly_feasible(const LogConvexProgram& prog, const GpVec& w, double margin = 0.0);

GpSolution solve_log_convex(const LogConvexProgram& prog, const GpVec& w0,
                            const GpSolveOptions& opts = {});

} // namespace asis
