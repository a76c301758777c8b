#include "asis/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace asis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense-on-support derivatives of one log-sum-exp row.
struct RowWork {
    std::vector<int> support;  // global variable ids
    std::vector<double> grad;  // d lse / dw restricted to support
    std::vector<double> hess;  // row-major support x support block
    double value = 0.0;

    int local(int v) {
        for (size_t k = 0; k < support.size(); ++k)
            if (support[k] == v) return static_cast<int>(k);
        support.push_back(v);
        return static_cast<int>(support.size()) - 1;
    }
};

void lse_derivatives(const std::vector<GpTerm>& terms, const GpVec& w, RowWork& rw) {
    rw.support.clear();
    double mx = -kInf;
    for (const auto& t : terms) mx = std::max(mx, t.affine(w));
    double z = 0.0;
    std::vector<double> p(terms.size());
    for (size_t t = 0; t < terms.size(); ++t) {
        p[t] = std::exp(terms[t].affine(w) - mx);
        z += p[t];
        for (int k = 0; k < terms[t].nvars; ++k) rw.local(terms[t].var[k]);
    }
    rw.value = mx + std::log(z);
    size_t s = rw.support.size();
    rw.grad.assign(s, 0.0);
    rw.hess.assign(s * s, 0.0);
    for (size_t t = 0; t < terms.size(); ++t) {
        double pt = p[t] / z;
        int loc[2];
        for (int k = 0; k < terms[t].nvars; ++k) {
            loc[k] = rw.local(terms[t].var[k]);
            rw.grad[loc[k]] += pt * terms[t].coef[k];
        }
        for (int a = 0; a < terms[t].nvars; ++a)
            for (int b = 0; b < terms[t].nvars; ++b)
                rw.hess[loc[a] * s + loc[b]] += pt * terms[t].coef[a] * terms[t].coef[b];
    }
    for (size_t a = 0; a < s; ++a)
        for (size_t b = 0; b < s; ++b) rw.hess[a * s + b] -= rw.grad[a] * rw.grad[b];
}

double box_lo(const LogConvexProgram& prog, int i) {
    return prog.lower.empty() ? -kInf : prog.lower[i];
}
double box_hi(const LogConvexProgram& prog, int i) {
    return prog.upper.empty() ? kInf : prog.upper[i];
}

int barrier_rows(const LogConvexProgram& prog) {
    int rows = static_cast<int>(prog.constraints.size());
    for (int i = 0; i < prog.nvar; ++i) {
        if (std::isfinite(box_lo(prog, i))) ++rows;
        if (std::isfinite(box_hi(prog, i))) ++rows;
    }
    return rows;
}

// t * objective + barrier + gauge penalty; +inf outside the domain.
double merit(const LogConvexProgram& prog, const GpVec& w, double t) {
    double val = t * objective_value(prog, w);
    for (const auto& c : prog.constraints) {
        double cv = constraint_value(c, w);
        if (cv >= 0.0) return kInf;
        val -= std::log(-cv);
    }
    for (int i = 0; i < prog.nvar; ++i) {
        double lo = box_lo(prog, i), hi = box_hi(prog, i);
        if (std::isfinite(lo)) {
            if (w[i] <= lo) return kInf;
            val -= std::log(w[i] - lo);
        }
        if (std::isfinite(hi)) {
            if (w[i] >= hi) return kInf;
            val -= std::log(hi - w[i]);
        }
    }
    if (prog.gauge_var >= 0) val += 0.5 * w[prog.gauge_var] * w[prog.gauge_var];
    return val;
}

} // namespace

double lse_value(const std::vector<GpTerm>& terms, const GpVec& w) {
    double mx = -kInf;
    for (const auto& t : terms) mx = std::max(mx, t.affine(w));
    double z = 0.0;
    for (const auto& t : terms) z += std::exp(t.affine(w) - mx);
    return mx + std::log(z);
}

double objective_value(const LogConvexProgram& prog, const GpVec& w) {
    return lse_value(prog.objective, w);
}

GpVec objective_gradient(const LogConvexProgram& prog, const GpVec& w) {
    RowWork rw;
    lse_derivatives(prog.objective, w, rw);
    GpVec g = GpVec::Zero(prog.nvar);
    for (size_t k = 0; k < rw.support.size(); ++k) g[rw.support[k]] = rw.grad[k];
    return g;
}

double constraint_value(const GpConstraint& c, const GpVec& w) {
    double v = lse_value(c.terms, w) - c.lin_const;
    if (c.lin_var >= 0) v -= w[c.lin_var];
    return v;
}

GpVec constraint_gradient(const GpConstraint& c, const GpVec& w, int nvar) {
    RowWork rw;
    lse_derivatives(c.terms, w, rw);
    GpVec g = GpVec::Zero(nvar);
    for (size_t k = 0; k < rw.support.size(); ++k) g[rw.support[k]] = rw.grad[k];
    if (c.lin_var >= 0) g[c.lin_var] -= 1.0;
    return g;
}

bool strictly_feasible(const LogConvexProgram& prog, const GpVec& w, double margin) {
    for (const auto& c : prog.constraints)
        if (!(constraint_value(c, w) < -margin)) return false;
    for (int i = 0; i < prog.nvar; ++i) {
        double lo = box_lo(prog, i), hi = box_hi(prog, i);
        if (std::isfinite(lo) && !(w[i] > lo + margin)) return false;
        if (std::isfinite(hi) && !(w[i] < hi - margin)) return false;
    }
    return true;
}

GpSolution solve_log_convex(const LogConvexProgram& prog, const GpVec& w0,
                            const GpSolveOptions& opts) {
    using SpMat = Eigen::SparseMatrix<double>;
    GpSolution sol;
    sol.w = w0;
    if (!strictly_feasible(prog, w0)) {
        sol.message = "starting point not strictly feasible";
        return sol;
    }

    const int nv = prog.nvar;
    const int rows = barrier_rows(prog);
    const int ncon = static_cast<int>(prog.constraints.size());
    double t = opts.t0;
    GpVec grad(nv);
    RowWork rw;

    // The Hessian sparsity pattern never changes: build it once, map every
    // dense block entry to its slot in the compressed value array, and
    // scatter-add per iteration instead of re-sorting triplets.
    lse_derivatives(prog.objective, sol.w, rw);
    std::vector<int> obj_sup = rw.support;
    std::vector<std::vector<int>> con_sup(ncon);
    for (int ci = 0; ci < ncon; ++ci) {
        const auto& c = prog.constraints[ci];
        lse_derivatives(c.terms, sol.w, rw);
        con_sup[ci] = rw.support;
        if (c.lin_var >= 0 &&
            std::find(con_sup[ci].begin(), con_sup[ci].end(), c.lin_var) ==
                con_sup[ci].end())
            con_sup[ci].push_back(c.lin_var);
    }
    SpMat H(nv, nv);
    {
        std::vector<Eigen::Triplet<double>> trips;
        for (int i = 0; i < nv; ++i) trips.emplace_back(i, i, 0.0);
        for (int a : obj_sup)
            for (int b : obj_sup) trips.emplace_back(a, b, 0.0);
        for (const auto& sup : con_sup)
            for (int a : sup)
                for (int b : sup) trips.emplace_back(a, b, 0.0);
        H.setFromTriplets(trips.begin(), trips.end());
        H.makeCompressed();
    }
    auto slot_of = [&H](int r, int c) {
        const int* inner = H.innerIndexPtr();
        const int* outer = H.outerIndexPtr();
        const int* p = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
        return static_cast<int>(p - inner);
    };
    std::vector<int> diag_slot(nv);
    for (int i = 0; i < nv; ++i) diag_slot[i] = slot_of(i, i);
    std::vector<int> obj_slot(obj_sup.size() * obj_sup.size());
    for (size_t a = 0; a < obj_sup.size(); ++a)
        for (size_t b = 0; b < obj_sup.size(); ++b)
            obj_slot[a * obj_sup.size() + b] = slot_of(obj_sup[a], obj_sup[b]);
    std::vector<std::vector<int>> con_slot(ncon);
    for (int ci = 0; ci < ncon; ++ci) {
        const auto& sup = con_sup[ci];
        con_slot[ci].resize(sup.size() * sup.size());
        for (size_t a = 0; a < sup.size(); ++a)
            for (size_t b = 0; b < sup.size(); ++b)
                con_slot[ci][a * sup.size() + b] = slot_of(sup[a], sup[b]);
    }

    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.analyzePattern(H);
    std::vector<double> gc;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        ++sol.outer_iterations;
        for (int it = 0; it < opts.max_newton; ++it) {
            grad.setZero();
            double* vals = H.valuePtr();
            std::fill(vals, vals + H.nonZeros(), 0.0);

            // objective block
            lse_derivatives(prog.objective, sol.w, rw);
            for (size_t a = 0; a < rw.support.size(); ++a) {
                grad[rw.support[a]] += t * rw.grad[a];
                for (size_t b = 0; b < rw.support.size(); ++b)
                    vals[obj_slot[a * rw.support.size() + b]] +=
                        t * rw.hess[a * rw.support.size() + b];
            }

            // -log(-c) blocks
            for (int ci = 0; ci < ncon; ++ci) {
                const auto& c = prog.constraints[ci];
                lse_derivatives(c.terms, sol.w, rw);
                double cv = rw.value - c.lin_const;
                if (c.lin_var >= 0) cv -= sol.w[c.lin_var];
                // gradient of c over the extended support including lin_var
                size_t s = rw.support.size();
                size_t se = con_sup[ci].size();
                gc.assign(se, 0.0);
                std::copy(rw.grad.begin(), rw.grad.end(), gc.begin());
                if (c.lin_var >= 0) {
                    for (size_t j = 0; j < se; ++j)
                        if (con_sup[ci][j] == c.lin_var) gc[j] -= 1.0;
                }
                double inv = -1.0 / cv;        // positive
                double inv2 = 1.0 / (cv * cv);
                const int* slots = con_slot[ci].data();
                for (size_t a = 0; a < se; ++a) {
                    grad[con_sup[ci][a]] += inv * gc[a];
                    for (size_t b = 0; b < se; ++b) {
                        double h = inv2 * gc[a] * gc[b];
                        if (a < s && b < s) h += inv * rw.hess[a * s + b];
                        vals[slots[a * se + b]] += h;
                    }
                }
            }

            // box barriers
            for (int i = 0; i < nv; ++i) {
                double lo = box_lo(prog, i), hi = box_hi(prog, i);
                if (std::isfinite(lo)) {
                    double d = sol.w[i] - lo;
                    grad[i] -= 1.0 / d;
                    vals[diag_slot[i]] += 1.0 / (d * d);
                }
                if (std::isfinite(hi)) {
                    double d = hi - sol.w[i];
                    grad[i] += 1.0 / d;
                    vals[diag_slot[i]] += 1.0 / (d * d);
                }
            }

            if (prog.gauge_var >= 0) {
                grad[prog.gauge_var] += sol.w[prog.gauge_var];
                vals[diag_slot[prog.gauge_var]] += 1.0;
            }

            GpVec step;
            double reg = 0.0;
            for (int attempt = 0; attempt < 6; ++attempt) {
                ldlt.factorize(H);
                if (ldlt.info() == Eigen::Success) {
                    step = ldlt.solve(-grad);
                    if (step.allFinite() && grad.dot(step) < 0.0) break;
                }
                reg = (reg == 0.0) ? 1e-10 : reg * 100.0;
                for (int i = 0; i < nv; ++i) vals[diag_slot[i]] += reg;
                step.resize(0);
            }
            if (step.size() == 0) {
                sol.message = "newton system could not be solved";
                sol.objective = objective_value(prog, sol.w);
                return sol;
            }

            double decrement2 = -grad.dot(step);  // lambda^2
            ++sol.newton_iterations;
            if (0.5 * decrement2 <= opts.newton_tol) break;

            double f0 = merit(prog, sol.w, t);
            double lambda = std::sqrt(std::max(decrement2, 0.0));
            double alpha = (lambda > 0.25) ? 1.0 / (1.0 + lambda) : 1.0;
            const double slope = grad.dot(step);
            GpVec base = sol.w;
            double fbest = f0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                GpVec trial = base + alpha * step;
                double f1 = merit(prog, trial, t);
                // strict decrease required: at the merit's floating-point
                // floor Armijo accepts f1 == f0 and the loop would spin
                if (f1 <= f0 + 0.01 * alpha * slope && f1 < f0) {
                    sol.w = trial;
                    fbest = f1;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) break;  // stalled at numerical floor for this t
            // expansion: the damped alpha is conservative; grow while the
            // merit keeps dropping
            while (alpha < 1.0) {
                double a2 = std::min(1.0, alpha * 2.0);
                GpVec trial = base + a2 * step;
                double f2 = merit(prog, trial, t);
                if (f2 < fbest) {
                    sol.w = trial;
                    fbest = f2;
                    alpha = a2;
                } else {
                    break;
                }
            }
        }
#ifdef ASIS_GP_TRACE
        std::fprintf(stderr, "stage %d t=%.3g newton_total=%d\n", outer, t,
                     sol.newton_iterations);
#endif
        sol.gap_bound = rows / t;
        if (sol.gap_bound < opts.tol) {
            sol.converged = true;
            break;
        }

        // Predictor: first-order continuation along the central path. At the
        // center of t, t*g0 + g_barrier = 0; differentiating in t gives
        // H dw/dt = -g0, and the factorization of H is still loaded.
        double tn = t * opts.mu;
        GpVec g0 = objective_gradient(prog, sol.w);
        GpVec dw = ldlt.solve(-(tn - t) * g0);
        if (dw.allFinite()) {
            double base = merit(prog, sol.w, tn);
            double s = 1.0;
            for (int k = 0; k < 10; ++k) {
                GpVec trial = sol.w + s * dw;
                if (merit(prog, trial, tn) < base) {
                    sol.w = trial;
                    break;
                }
                s *= 0.5;
            }
        }
        t = tn;
    }

    sol.objective = objective_value(prog, sol.w);
    sol.max_constraint = -kInf;
    for (const auto& c : prog.constraints)
        sol.max_constraint = std::max(sol.max_constraint, constraint_value(c, sol.w));
    if (!sol.converged && sol.message.empty()) sol.message = "outer iteration limit";
    return sol;
}

} // namespace asis
