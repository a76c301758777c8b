#include "asis/params.hpp"

namespace asis {

ModelParams ModelParams::homogeneous(const Graph& g, double beta, double delta, double phi,
                                     double psi) {
    ModelParams p;
    int n = g.node_count();
    p.beta.assign(n, beta);
    p.delta.assign(n, delta);
    p.phi.assign(n, phi);
    p.psi.assign(g.edge_count(), psi);
    p.validate(g);
    return p;
}

void ModelParams::validate(const Graph& g) const {
    auto n = static_cast<std::size_t>(g.node_count());
    auto m = static_cast<std::size_t>(g.edge_count());
    if (beta.size() != n || delta.size() != n || phi.size() != n)
        throw invalid_params_error("per-node rate array size does not match node count " +
                                   std::to_string(n));
    if (psi.size() != m)
        throw invalid_params_error("psi array size does not match edge count " +
                                   std::to_string(m));
    auto check = [](const std::vector<double>& v, const char* name) {
        for (double x : v)
            if (!(x >= 0.0))
                throw invalid_params_error(std::string(name) + " rates must be nonnegative");
    };
    check(beta, "beta");
    check(delta, "delta");
    check(phi, "phi");
    check(psi, "psi");
}

bool ModelParams::strictly_positive_rates() const {
    for (double x : beta)
        if (!(x > 0.0)) return false;
    for (double x : delta)
        if (!(x > 0.0)) return false;
    for (double x : psi)
        if (!(x > 0.0)) return false;
    return true;
}

} // namespace asis
