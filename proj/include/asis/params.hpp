// params.hpp -- per-node and per-edge model rates.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "asis/graph.hpp"

namespace asis {

struct invalid_params_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rates of the adaptive SIS model. beta/delta/phi are per node; psi is per
// unordered initial edge in Graph::edges() order, so the symmetry
// psi_ij = psi_ji is structural.
struct ModelParams {
    std::vector<double> beta;   // infection rate of node i (applied per infected live neighbor)
    std::vector<double> delta;  // recovery rate of node i
    std::vector<double> phi;    // cutting rate of node i while infected
    std::vector<double> psi;    // rewiring rate of initial edge e

    static ModelParams homogeneous(const Graph& g, double beta, double delta, double phi,
                                   double psi);

    // Sizes match the graph and all rates are nonnegative; throws otherwise.
    void validate(const Graph& g) const;

    // beta_i > 0, delta_i > 0 and psi_e > 0 for every initial edge.
    bool strictly_positive_rates() const;

    // phi value for the ordered pair row (i,j): psi of the unordered edge.
    double psi_of(const Graph& g, int i, int j) const { return psi[g.edge_id(i, j)]; }
};

struct HomogeneousParams {
    double beta = 0.0;
    double delta = 0.0;
    double phi = 0.0;
    double psi = 0.0;
    double rho = 0.0;  // spectral radius of the initial adjacency matrix
};

} // namespace asis
