// homo_design.hpp -- closed-form stability threshold and cost-optimal
// (phi, psi) selection when all rates are homogeneous.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "asis/graph.hpp"
#include "asis/meanfield.hpp"
#include "asis/params.hpp"

namespace asis {

// Dominant eigenvalue of the homogeneous mean-field matrix:
//   lambda_plus = (beta*rho - 2 delta - phi - psi + sqrt(disc)) / 2,
//   disc = (beta*rho - phi)^2 + psi^2 + 2 psi (beta*rho + phi)
// (the expanded form of (beta*rho+phi+psi)^2 - 4 beta*rho*phi, which avoids
// cancellation and is nonnegative by construction). Equals the spectral
// abscissa of the assembled M for any connected initial graph.
double lambda_plus(const HomogeneousParams& p);

// True iff beta*rho == phi, where the closed form has a removable
// degeneracy; lambda_plus itself stays continuous through it.
bool lambda_plus_degenerate(const HomogeneousParams& p);

// Exponential stability of the infection-free equilibrium:
//   delta > (beta*rho - phi - psi)/2 + sqrt(disc)/2,
// which is equivalent to lambda_plus < 0.
bool is_stable(const HomogeneousParams& p);

// Smallest phi with lambda_plus(phi, psi) <= -alpha at fixed psi:
//   phi_req = (beta*rho - delta + alpha) * (psi/(delta - alpha) + 1).
// Requires alpha < delta. May be negative when the target is already met
// at phi = 0.
double required_phi(double beta, double delta, double rho, double psi, double alpha);

struct CostFunction {
    std::function<double(double)> eval;  // nondecreasing on the box
    std::string name;

    static CostFunction linear();
    // Normalized diminishing-returns cost: 0 at lo, 1 at hi, needs hi < r.
    static CostFunction normalized(double r, double lo, double hi);
};

struct HomoDesignProblem {
    double alpha = 0.0;            // required decay rate, > 0
    double phi_lo = 0.0, phi_hi = 0.0;
    double psi_lo = 0.0, psi_hi = 0.0;
    CostFunction cost_phi;         // f, weighted by n
    CostFunction cost_psi;         // g, weighted by m
};

struct HomoDesignResult {
    bool feasible = false;
    double phi = 0.0;
    double psi = 0.0;
    double cost = 0.0;             // n f(phi) + m g(psi)
    double lambda = 0.0;           // lambda_plus at the returned point
    double achievable_decay = 0.0; // -min lambda_plus over the box
    bool alpha_exceeds_delta = false;
    bool degenerate_warning = false;  // beta*rho == phi at the solution

    std::string to_json(double alpha) const;
};

// Minimize n f(phi) + m g(psi) over the box subject to
// lambda_plus(phi,psi) <= -alpha. Grid-plus-refinement search along the
// active-constraint curve phi = phi_req(psi) plus the corner candidates;
// exact at desk scale for nondecreasing costs.
HomoDesignResult design_homogeneous(const HomoDesignProblem& prob, double beta, double delta,
                                    double rho, int n, int m);

// Convenience wrapper: computes rho from the graph, runs the design, and
// attaches the certificate recomputed from the assembled M.
struct HomoDesignOutput {
    HomoDesignResult result;
    std::optional<StabilityCertificate> certificate;
};
HomoDesignOutput design_homogeneous(const HomoDesignProblem& prob, double beta, double delta,
                                    const Graph& g);

} // namespace asis
