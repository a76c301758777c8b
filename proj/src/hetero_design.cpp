#include "asis/hetero_design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace asis {
namespace {

std::string fmt_num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

TildeSystem tilde_shift(const Graph& g, const ModelParams& params, double r, double alpha) {
    params.validate(g);
    if (!(alpha > 0.0)) throw invalid_params_error("alpha must be positive");
    double phi_max = params.phi.empty() ? 0.0 : *std::max_element(params.phi.begin(), params.phi.end());
    if (!(r > phi_max)) throw invalid_params_error("shift constant r must exceed every phi_i");

    TildeSystem ts;
    ts.r = r;
    ts.bar_delta = *std::max_element(params.delta.begin(), params.delta.end());
    ts.bar_psi = *std::max_element(params.psi.begin(), params.psi.end());
    ts.shift = ts.bar_delta + r + ts.bar_psi;
    ts.map = EdgeIndexMap(g);
    ts.n = g.node_count();
    ts.m = g.edge_count();

    auto sys = assemble_meanfield(g, params);
    SpMat shifted = sys.M;
    SpMat ident(ts.dim(), ts.dim());
    ident.setIdentity();
    shifted = shifted + ts.shift * ident;
    ts.Mt = shifted;
    ts.Mt.makeCompressed();

    // Entrywise guards: the shifted matrix must be nonnegative, and its
    // diagonal must match the direct formulas for the tilde blocks.
    Eigen::MatrixXd dense(ts.Mt);
    for (int i = 0; i < ts.n; ++i) {
        double want = (ts.bar_delta - params.delta[i]) + ts.bar_psi + r;
        if (std::abs(dense(i, i) - want) > 1e-12 * std::max(1.0, std::abs(want)))
            throw convergence_error("tilde shift identity violated on a p row");
    }
    for (int idx = 0; idx < 2 * ts.m; ++idx) {
        auto [i, j] = ts.map.pair_at(idx);
        double psi_ij = params.psi_of(g, i, j);
        double want = (ts.bar_delta - params.delta[i]) + (r - params.phi[i]) +
                      (ts.bar_psi - psi_ij);
        if (std::abs(dense(ts.n + idx, ts.n + idx) - want) >
            1e-12 * std::max(1.0, std::abs(want)))
            throw convergence_error("tilde shift identity violated on a q row");
    }
    if (dense.minCoeff() < -1e-12)
        throw convergence_error("tilde matrix has a negative entry");
    return ts;
}

double normalized_cost(double x, double r, double phi_lo, double phi_hi) {
    if (!(phi_lo <= x && x <= phi_hi))
        throw invalid_params_error("cost argument outside [phi_lo, phi_hi]");
    if (!(phi_hi < r) || !(phi_lo < phi_hi))
        throw invalid_params_error("normalized cost needs phi_lo < phi_hi < r");
    double base = 1.0 / (r - phi_lo);
    double scale = 1.0 / (r - phi_hi) - base;
    return (1.0 / (r - x) - base) / scale;
}

HeteroCost HeteroCost::normalized(double r, double phi_lo, double phi_hi) {
    if (!(phi_hi < r) || !(phi_lo < phi_hi))
        throw invalid_params_error("normalized cost needs phi_lo < phi_hi < r");
    double c = 1.0 / (1.0 / (r - phi_hi) - 1.0 / (r - phi_lo));
    HeteroCost hc;
    hc.monomials = {{c, -1.0}};
    hc.constant = -c / (r - phi_lo);
    hc.name = "normalized";
    return hc;
}

HeteroCost HeteroCost::reciprocal() {
    HeteroCost hc;
    hc.monomials = {{1.0, -1.0}};
    hc.constant = 0.0;
    hc.name = "reciprocal";
    return hc;
}

LogConvexProgram build_design_program(const Graph& g, const ModelParams& base,
                                      const HeteroDesignProblem& prob) {
    base.validate(g);
    if (!base.strictly_positive_rates())
        throw invalid_params_error("design needs beta, delta, psi strictly positive");
    if (!(prob.alpha > 0.0)) throw invalid_params_error("alpha must be positive");
    if (!(prob.r > prob.phi_hi)) throw invalid_params_error("r must exceed phi_hi");
    if (!(prob.phi_lo >= 0.0 && prob.phi_lo < prob.phi_hi))
        throw invalid_params_error("need 0 <= phi_lo < phi_hi");
    if (prob.cost.monomials.empty()) throw invalid_params_error("cost has no monomials");
    for (auto [c, e] : prob.cost.monomials)
        if (!(c > 0.0)) throw invalid_params_error("cost coefficients must be positive");

    const int n = g.node_count();
    const int m = g.edge_count();
    EdgeIndexMap map(g);
    double bar_delta = *std::max_element(base.delta.begin(), base.delta.end());
    double bar_psi = *std::max_element(base.psi.begin(), base.psi.end());
    double K = bar_delta + prob.r + bar_psi;
    double logK = std::log(K);

    // Variables: y_i = log(tilde phi_i) for i < n, u_k = log v_k after.
    LogConvexProgram prog;
    prog.nvar = n + n + 2 * m;
    auto yvar = [](int i) { return i; };
    auto uvar = [&](int k) { return n + k; };

    prog.lower.assign(prog.nvar, -std::numeric_limits<double>::infinity());
    prog.upper.assign(prog.nvar, std::numeric_limits<double>::infinity());
    double y_lo = std::log(prob.r - prob.phi_hi);
    double y_hi = std::log(prob.r - prob.phi_lo);
    for (int i = 0; i < n; ++i) {
        prog.lower[i] = y_lo;
        prog.upper[i] = y_hi;
    }
    prog.gauge_var = uvar(0);

    for (int i = 0; i < n; ++i)
        for (auto [c, e] : prob.cost.monomials) {
            GpTerm t;
            t.log_coef = std::log(c);
            t.add(yvar(i), e);
            prog.objective.push_back(t);
        }

    // p row i: (bar_delta - delta_i + bar_psi + r + alpha) v_i
    //          + sum_{k in N_i} beta_i v_{(k,i)}  <=  K v_i.
    for (int i = 0; i < n; ++i) {
        GpConstraint con;
        con.lin_var = uvar(i);
        con.lin_const = logK;
        GpTerm diag;
        diag.log_coef =
            std::log(bar_delta - base.delta[i] + bar_psi + prob.r + prob.alpha);
        diag.add(uvar(i), 1.0);
        con.terms.push_back(diag);
        for (int k : g.neighbors(i)) {
            GpTerm t;
            t.log_coef = std::log(base.beta[i]);
            t.add(uvar(n + map.index_of(k, i)), 1.0);
            con.terms.push_back(t);
        }
        prog.constraints.push_back(std::move(con));
    }

    // q row (i,j): psi_ij v_i
    //            + (bar_delta - delta_i + bar_psi - psi_ij + alpha) v_{(i,j)}
    //            + tilde_phi_i v_{(i,j)}
    //            + sum_{k in N_i} beta_i v_{(k,i)}  <=  K v_{(i,j)}.
    for (int idx = 0; idx < 2 * m; ++idx) {
        auto [i, j] = map.pair_at(idx);
        double psi_ij = base.psi_of(g, i, j);
        GpConstraint con;
        con.lin_var = uvar(n + idx);
        con.lin_const = logK;

        GpTerm rewire;
        rewire.log_coef = std::log(psi_ij);
        rewire.add(uvar(i), 1.0);
        con.terms.push_back(rewire);

        double fixed = bar_delta - base.delta[i] + bar_psi - psi_ij + prob.alpha;
        GpTerm diag;
        diag.log_coef = std::log(fixed);
        diag.add(uvar(n + idx), 1.0);
        con.terms.push_back(diag);

        GpTerm cut;  // tilde phi enters multiplicatively: e^{y_i + u_row}
        cut.add(yvar(i), 1.0);
        cut.add(uvar(n + idx), 1.0);
        con.terms.push_back(cut);

        for (int k : g.neighbors(i)) {
            GpTerm t;
            t.log_coef = std::log(base.beta[i]);
            t.add(uvar(n + map.index_of(k, i)), 1.0);
            con.terms.push_back(t);
        }
        prog.constraints.push_back(std::move(con));
    }
    return prog;
}

namespace {

// eta of M with every phi_i set to the given value.
StabilityCertificate abscissa_at_uniform_phi(const Graph& g, const ModelParams& base,
                                             double phi, double alpha) {
    ModelParams p = base;
    p.phi.assign(g.node_count(), phi);
    auto sys = assemble_meanfield(g, p);
    return spectral_abscissa(sys, {}, alpha);
}

} // namespace

HeteroDesignResult design_heterogeneous(const Graph& g, const ModelParams& base,
                                        const HeteroDesignProblem& prob) {
    HeteroDesignResult res;
    const int n = g.node_count();
    const int m = g.edge_count();

    // Feasibility at maximum cutting effort decides the whole problem:
    // eta(M) is nonincreasing in every phi_i.
    auto corner_cert = abscissa_at_uniform_phi(g, base, prob.phi_hi, prob.alpha);
    res.achievable_decay = -corner_cert.eta;
    if (corner_cert.eta > -prob.alpha) {
        res.feasible = false;
        res.phi.assign(n, prob.phi_hi);
        res.certificate = corner_cert;
        res.message = "infeasible: decay target exceeds the achievable rate";
        return res;
    }

    auto prog = build_design_program(g, base, prob);
    const double y_lo = std::log(prob.r - prob.phi_hi);
    const double y_hi = std::log(prob.r - prob.phi_lo);

    // Starting point: geometric mean of the shifted box for y; v is the
    // Perron vector of Mt + alpha I so every spectral row has identical
    // slack log(perron / K). If the midpoint is infeasible, walk y toward
    // the feasible corner y_lo.
    auto spectral_part = [&](const GpVec& w) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& c : prog.constraints) worst = std::max(worst, constraint_value(c, w));
        return worst;
    };
    auto point_for = [&](double s) {
        double y = (1.0 - s) * 0.5 * (y_lo + y_hi) + s * y_lo;
        ModelParams p = base;
        p.phi.assign(n, prob.r - std::exp(y));
        auto ts = tilde_shift(g, p, prob.r, prob.alpha);
        SpMat A = ts.Mt;
        SpMat ident(ts.dim(), ts.dim());
        ident.setIdentity();
        A = A + prob.alpha * ident;
        auto pr = perron_root(A);
        GpVec w(prog.nvar);
        for (int i = 0; i < n; ++i) w[i] = y;
        Vec v = pr.v / pr.v.maxCoeff();
        for (int k = 0; k < n + 2 * m; ++k) w[n + k] = std::log(std::max(v[k], 1e-300));
        return w;
    };

    GpVec w0;
    bool started = false;
    double s = 0.0;
    for (int attempt = 0; attempt < 46; ++attempt) {
        GpVec w = point_for(s);
        bool in_box = true;
        for (int i = 0; i < n; ++i)
            if (!(w[i] > y_lo && w[i] < y_hi)) in_box = false;
        if (in_box && spectral_part(w) < -1e-12) {
            w0 = w;
            started = true;
            break;
        }
        s = (s == 0.0) ? 0.5 : 0.5 * (s + 1.0);
    }

    if (!started) {
        // Feasible only (numerically) at the corner itself.
        res.feasible = true;
        res.boundary_solution = true;
        res.phi.assign(n, prob.phi_hi);
        res.certificate = corner_cert;
        res.certificate_ok = corner_cert.eta <= -prob.alpha + prob.cert_tol;
        double tphi = prob.r - prob.phi_hi;
        res.objective = 0.0;
        for (auto [c, e] : prob.cost.monomials) res.objective += n * c * std::pow(tphi, e);
        res.total_cost = res.objective + n * prob.cost.constant;
        res.v = Eigen::Map<const Vec>(corner_cert.perron_vector.data(),
                                      static_cast<Eigen::Index>(corner_cert.perron_vector.size()));
        res.message = "no strictly feasible interior point; returning the box corner";
        return res;
    }

    auto sol = solve_log_convex(prog, w0, prob.solver);
    res.outer_iterations = sol.outer_iterations;
    res.newton_iterations = sol.newton_iterations;
    res.max_constraint = sol.max_constraint;
    if (!sol.converged) {
        res.message = "solver: " + sol.message;
    }

    res.phi.resize(n);
    for (int i = 0; i < n; ++i) res.phi[i] = prob.r - std::exp(sol.w[i]);
    res.v.resize(n + 2 * m);
    double umax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n + 2 * m; ++k) umax = std::max(umax, sol.w[n + k]);
    for (int k = 0; k < n + 2 * m; ++k) res.v[k] = std::exp(sol.w[n + k] - umax);

    res.objective = 0.0;
    for (int i = 0; i < n; ++i)
        for (auto [c, e] : prob.cost.monomials)
            res.objective += c * std::pow(std::exp(sol.w[i]), e);
    res.total_cost = res.objective + n * prob.cost.constant;

    ModelParams designed = base;
    designed.phi = res.phi;
    res.certificate = verify_design(g, designed, prob.alpha);
    res.certificate_ok = res.certificate.eta <= -prob.alpha + prob.cert_tol;
    res.feasible = true;
    if (!res.certificate_ok && res.message.empty())
        res.message = "posterior certificate failed";
    return res;
}

StabilityCertificate verify_design(const Graph& g, const ModelParams& params, double alpha) {
    auto sys = assemble_meanfield(g, params);
    return spectral_abscissa(sys, {}, alpha);
}

std::string HeteroDesignResult::to_json(const Graph& g, double alpha) const {
    std::string s = "{\n";
    s += std::string("  \"feasible\": ") + (feasible ? "true" : "false") + ",\n";
    s += "  \"alpha\": " + fmt_num(alpha) + ",\n";
    s += "  \"objective\": " + fmt_num(objective) + ",\n";
    s += "  \"cost\": " + fmt_num(total_cost) + ",\n";
    s += "  \"eta\": " + fmt_num(certificate.eta) + ",\n";
    s += "  \"achievable_decay\": " + fmt_num(achievable_decay) + ",\n";
    s += "  \"phi\": {";
    for (size_t i = 0; i < phi.size(); ++i) {
        if (i) s += ", ";
        s += "\"" + std::to_string(g.original_label(static_cast<int>(i))) + "\": " +
             fmt_num(phi[i]);
    }
    s += "}\n}\n";
    return s;
}

std::string HeteroDesignResult::to_csv(const Graph& g) const {
    std::string s = "node,degree,phi\n";
    for (size_t i = 0; i < phi.size(); ++i) {
        s += std::to_string(g.original_label(static_cast<int>(i))) + "," +
             std::to_string(g.degree(static_cast<int>(i))) + "," + fmt_num(phi[i]) + "\n";
    }
    return s;
}

} // namespace asis
