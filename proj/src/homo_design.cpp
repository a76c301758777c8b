#include "asis/homo_design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace asis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double discriminant(double br, double phi, double psi) {
    // (br+phi+psi)^2 - 4 br phi, expanded so no subtraction of close terms.
    double d = br - phi;
    return d * d + psi * psi + 2.0 * psi * (br + phi);
}

std::string json_escape_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Minimize fn over [lo, hi] by an equispaced grid refined around the best
// sample. Returns the argmin; ties keep the leftmost point. Endpoints are
// always sampled exactly, so boundary minima are hit without rounding.
double grid_minimize(double lo, double hi, const std::function<double(double)>& fn, int points,
                     int levels) {
    if (!(lo < hi)) return lo;
    double best_x = lo;
    double best_v = kInf;
    double a = lo, b = hi;
    for (int level = 0; level < levels; ++level) {
        double step = (b - a) / (points - 1);
        for (int i = 0; i < points; ++i) {
            double x = (i == points - 1) ? b : a + step * i;
            double v = fn(x);
            if (v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        double na = std::max(a, best_x - step);
        double nb = std::min(b, best_x + step);
        if (nb - na <= 1e-15 * (std::abs(a) + std::abs(b) + 1.0)) break;
        a = na;
        b = nb;
    }
    return best_x;
}

} // namespace

double lambda_plus(const HomogeneousParams& p) {
    double br = p.beta * p.rho;
    double disc = discriminant(br, p.phi, p.psi);
    return 0.5 * (br - 2.0 * p.delta - p.phi - p.psi + std::sqrt(disc));
}

bool lambda_plus_degenerate(const HomogeneousParams& p) { return p.beta * p.rho == p.phi; }

bool is_stable(const HomogeneousParams& p) {
    double br = p.beta * p.rho;
    double rhs = 0.5 * (br - p.phi - p.psi) + 0.5 * std::sqrt(discriminant(br, p.phi, p.psi));
    return p.delta > rhs;
}

double required_phi(double beta, double delta, double rho, double psi, double alpha) {
    if (!(alpha < delta))
        throw invalid_params_error("required_phi needs alpha < delta");
    double br = beta * rho;
    return (br - delta + alpha) * (psi / (delta - alpha) + 1.0);
}

CostFunction CostFunction::linear() {
    return {[](double x) { return x; }, "linear"};
}

CostFunction CostFunction::normalized(double r, double lo, double hi) {
    if (!(r > hi) || !(hi > lo))
        throw invalid_params_error("normalized cost needs lo < hi < r");
    double base = 1.0 / (r - lo);
    double scale = 1.0 / (r - hi) - base;
    return {[=](double x) { return (1.0 / (r - x) - base) / scale; }, "normalized"};
}

namespace {

// Smallest phi in [prob.phi_lo, prob.phi_hi] that meets the decay target at
// this psi, or +inf when none exists.
double feasible_phi_floor(const HomoDesignProblem& prob, double beta, double delta, double rho,
                          double psi) {
    double br = beta * rho;
    double req;
    if (prob.alpha < delta) {
        req = required_phi(beta, delta, rho, psi, prob.alpha);
    } else if (prob.alpha == delta && psi == 0.0) {
        req = br;  // lambda_plus = max(br - phi, 0) - delta at psi = 0
    } else {
        return kInf;  // lambda_plus > -delta whenever psi > 0
    }
    double floor = std::max(req, prob.phi_lo);
    return floor <= prob.phi_hi ? floor : kInf;
}

} // namespace

HomoDesignResult design_homogeneous(const HomoDesignProblem& prob, double beta, double delta,
                                    double rho, int n, int m) {
    if (!(prob.alpha > 0.0)) throw invalid_params_error("alpha must be positive");
    if (prob.phi_lo > prob.phi_hi || prob.psi_lo > prob.psi_hi || prob.phi_lo < 0.0 ||
        prob.psi_lo < 0.0)
        throw invalid_params_error("design box is empty or negative");
    if (!prob.cost_phi.eval || !prob.cost_psi.eval)
        throw invalid_params_error("cost functions not set");

    auto lam = [&](double phi, double psi) {
        return lambda_plus({beta, delta, phi, psi, rho});
    };
    auto total_cost = [&](double phi, double psi) {
        return n * prob.cost_phi.eval(phi) + m * prob.cost_psi.eval(psi);
    };

    HomoDesignResult res;
    res.alpha_exceeds_delta = prob.alpha >= delta;

    // The box-wide decay optimum sits at (phi_hi, psi_lo): lambda_plus is
    // nonincreasing in phi and nondecreasing in psi.
    double lam_best = lam(prob.phi_hi, prob.psi_lo);
    res.achievable_decay = -lam_best;
    if (lam_best > -prob.alpha) {
        res.feasible = false;
        res.phi = prob.phi_hi;
        res.psi = prob.psi_lo;
        res.lambda = lam_best;
        res.cost = total_cost(res.phi, res.psi);
        res.degenerate_warning = beta * rho == res.phi;
        return res;
    }

    // Cost of the best feasible phi at a fixed psi. The feasible phi set is
    // the interval [floor, phi_hi]; search it for general (not necessarily
    // monotone) f, with the floor itself sampled exactly so active-constraint
    // optima land on the curve lambda_plus = -alpha.
    auto best_phi_at = [&](double psi, double* phi_out) {
        double floor = feasible_phi_floor(prob, beta, delta, rho, psi);
        if (floor == kInf) {
            *phi_out = kInf;
            return kInf;
        }
        auto f = [&](double x) { return prob.cost_phi.eval(x); };
        double phi = grid_minimize(floor, prob.phi_hi, f, 257, 6);
        *phi_out = phi;
        return total_cost(phi, psi);
    };

    double phi_for_psi = 0.0;
    auto outer = [&](double psi) { return best_phi_at(psi, &phi_for_psi); };
    double psi = grid_minimize(prob.psi_lo, prob.psi_hi, outer, 257, 6);
    double cost = outer(psi);  // refresh phi_for_psi for the returned psi

    res.feasible = true;
    res.phi = phi_for_psi;
    res.psi = psi;
    res.cost = cost;
    res.lambda = lam(res.phi, res.psi);
    res.degenerate_warning = beta * rho == res.phi;
    return res;
}

HomoDesignOutput design_homogeneous(const HomoDesignProblem& prob, double beta, double delta,
                                    const Graph& g) {
    double rho = spectral_radius(g).rho;
    HomoDesignOutput out;
    out.result =
        design_homogeneous(prob, beta, delta, rho, g.node_count(), g.edge_count());
    if (out.result.feasible) {
        auto params = ModelParams::homogeneous(g, beta, delta, out.result.phi, out.result.psi);
        auto sys = assemble_meanfield(g, params);
        out.certificate = spectral_abscissa(sys, {}, prob.alpha);
    }
    return out;
}

std::string HomoDesignResult::to_json(double alpha) const {
    std::string s = "{\n";
    s += "  \"phi\": " + json_escape_number(phi) + ",\n";
    s += "  \"psi\": " + json_escape_number(psi) + ",\n";
    s += "  \"cost\": " + json_escape_number(cost) + ",\n";
    s += "  \"lambda_plus\": " + json_escape_number(lambda) + ",\n";
    s += "  \"alpha\": " + json_escape_number(alpha) + ",\n";
    s += std::string("  \"feasible\": ") + (feasible ? "true" : "false") + ",\n";
    s += "  \"achievable_decay\": " + json_escape_number(achievable_decay) + "\n";
    s += "}\n";
    return s;
}

} // namespace asis
