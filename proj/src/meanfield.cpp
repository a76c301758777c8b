#include "asis/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace asis {

std::vector<int> ti_columns(const Graph& g, const EdgeIndexMap& map, int i) {
    std::vector<int> cols;
    cols.reserve(g.degree(i));
    for (int k : g.neighbors(i)) cols.push_back(map.index_of(k, i));
    return cols;
}

MeanFieldSystem assemble_meanfield(const Graph& g, const ModelParams& params) {
    params.validate(g);
    EdgeIndexMap map(g);
    int n = g.node_count();
    int m = g.edge_count();
    int dim = n + 2 * m;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) + 2 * m + 2 * m * 4);
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, -params.delta[i]);
        // B1 row i: beta_i at every column (k,i), k in N_i(0).
        if (params.beta[i] != 0.0)
            for (int k : g.neighbors(i))
                trip.emplace_back(i, n + map.index_of(k, i), params.beta[i]);
    }
    for (int i = 0; i < n; ++i) {
        for (int j : g.neighbors(i)) {
            int row = n + map.index_of(i, j);
            double psi_ij = params.psi[g.edge_id(i, j)];
            if (psi_ij != 0.0) trip.emplace_back(row, i, psi_ij);  // Psi1
            trip.emplace_back(row, row, -(params.delta[i] + params.phi[i] + psi_ij));
            // B2 row block of node i repeats beta_i T_i; never hits the
            // diagonal because (k,i) = (i,j) would need a self-loop.
            if (params.beta[i] != 0.0)
                for (int k : g.neighbors(i))
                    trip.emplace_back(row, n + map.index_of(k, i), params.beta[i]);
        }
    }
    MeanFieldSystem sys{SpMat(dim, dim), std::move(map), n, m};
    sys.M.setFromTriplets(trip.begin(), trip.end());
    sys.M.makeCompressed();
    return sys;
}

PerronResult perron_root(const SpMat& A, double tol, int max_iter) {
    const int dim = static_cast<int>(A.rows());
    PerronResult res;
    res.v = Vec::Ones(dim);
    Vec w(dim);
    double lower = 0.0, upper = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        w.noalias() = A * res.v;
        lower = w[0] / res.v[0];
        upper = lower;
        for (int i = 1; i < dim; ++i) {
            double r = w[i] / res.v[i];
            lower = std::min(lower, r);
            upper = std::max(upper, r);
        }
        res.v = w / w.maxCoeff();
        res.iterations = it;
        if (upper - lower <= tol) {
            res.converged = true;
            break;
        }
    }
    res.value = 0.5 * (upper + lower);
    return res;
}

double spectral_abscissa_dense(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

double spectral_abscissa_dense(const SpMat& M) {
    return spectral_abscissa_dense(Eigen::MatrixXd(M));
}

StabilityCertificate spectral_abscissa(const MeanFieldSystem& sys, const SpectralOptions& opts,
                                       double alpha) {
    const SpMat& M = sys.M;
    const int dim = sys.dim();
    double max_abs_diag = 0.0;
    for (int i = 0; i < dim; ++i) max_abs_diag = std::max(max_abs_diag, std::abs(M.coeff(i, i)));
    const double shift = 1.0 + max_abs_diag;

    SpMat shifted = M;
    {
        SpMat eye(dim, dim);
        eye.setIdentity();
        shifted += shift * eye;
    }

    StabilityCertificate cert;
    cert.alpha = alpha;
    cert.shift = shift;

    if (opts.method != EigMethod::Dense) {
        PerronResult pr = perron_root(shifted, opts.tol, opts.max_iter);
        cert.iterations = pr.iterations;
        if (pr.converged) {
            cert.eta = pr.value - shift;
            cert.method = "power";
            cert.stable = cert.eta < 0.0;
            cert.perron_vector.assign(pr.v.data(), pr.v.data() + dim);
            return cert;
        }
        if (opts.method == EigMethod::Power)
            throw convergence_error("spectral_abscissa: power iteration did not converge");
        cert.perron_vector.assign(pr.v.data(), pr.v.data() + dim);
    }
    if (dim > opts.dense_dim_cap)
        throw convergence_error("spectral_abscissa: dense fallback refused, dimension " +
                                std::to_string(dim) + " exceeds cap");
    cert.eta = spectral_abscissa_dense(M);
    cert.method = "dense";
    cert.stable = cert.eta < 0.0;
    if (cert.perron_vector.empty()) cert.perron_vector.assign(dim, 1.0);
    return cert;
}

std::string StabilityCertificate::to_json(int dim) const {
    nlohmann::json j;
    j["eta"] = eta;
    j["stable"] = stable;
    j["dimension"] = dim;
    j["shift"] = shift;
    j["alpha"] = alpha;
    j["method"] = method;
    j["iterations"] = iterations;
    return j.dump(2);
}

namespace {

// Iterative Tarjan over an adjacency-list view of M's off-diagonal pattern.
int count_sccs(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), lowlink(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int next_index = 0, sccs = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, child] = call.back();
            if (child == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (child < adj[v].size()) {
                int w = adj[v][child++];
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                ++sccs;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                } while (w != v);
            }
            int finished = v;
            call.pop_back();
            if (!call.empty())
                lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[finished]);
        }
    }
    return sccs;
}

} // namespace

bool is_irreducible_pattern(const SpMat& M) {
    const int dim = static_cast<int>(M.rows());
    if (dim == 1) return true;
    std::vector<std::vector<int>> adj(dim);
    for (int r = 0; r < M.outerSize(); ++r)
        for (SpMat::InnerIterator it(M, r); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0)
                adj[it.row()].push_back(static_cast<int>(it.col()));
    return count_sccs(adj) == 1;
}

bool check_irreducible(const MeanFieldSystem& sys) { return is_irreducible_pattern(sys.M); }

Vec bound_initial_state(const MeanFieldSystem& sys, const Graph& g,
                        const std::vector<std::uint8_t>& x0,
                        const std::vector<std::uint8_t>& a0) {
    if (static_cast<int>(x0.size()) != sys.n || static_cast<int>(a0.size()) != sys.m)
        throw invalid_params_error("initial state size mismatch");
    Vec z0 = Vec::Zero(sys.dim());
    for (int i = 0; i < sys.n; ++i) z0[i] = x0[i] ? 1.0 : 0.0;
    for (int idx = 0; idx < sys.map.pair_count(); ++idx) {
        auto [i, j] = sys.map.pair_at(idx);
        z0[sys.n + idx] = (a0[g.edge_id(i, j)] && x0[i]) ? 1.0 : 0.0;
    }
    return z0;
}

namespace {

// exp(h M) z by scaling and squaring on sparse matvecs: shift out the mean
// diagonal, split h into s substeps with ||B||_1 h / s <= theta, and sum the
// truncated Taylor series per substep.
Vec expm_action(const SpMat& M, Vec z, double h, double rtol) {
    const int dim = static_cast<int>(M.rows());
    if (h == 0.0) return z;
    double mu = 0.0;
    for (int i = 0; i < dim; ++i) mu += M.coeff(i, i);
    mu /= dim;
    SpMat B = M;
    {
        SpMat eye(dim, dim);
        eye.setIdentity();
        B -= mu * eye;
    }
    double norm1 = 0.0;
    {
        Vec colsum = Vec::Zero(dim);
        for (int r = 0; r < B.outerSize(); ++r)
            for (SpMat::InnerIterator it(B, r); it; ++it)
                colsum[it.col()] += std::abs(it.value());
        norm1 = colsum.maxCoeff();
    }
    const double theta = 2.0;
    int s = std::max(1, static_cast<int>(std::ceil(norm1 * h / theta)));
    const double hs = h / s;
    const double scale = std::exp(mu * hs);
    const int max_terms = 64;
    Vec term(dim), w(dim);
    for (int step = 0; step < s; ++step) {
        term = z;
        w = z;
        for (int j = 1; j <= max_terms; ++j) {
            term = (B * term).eval();
            term *= hs / j;
            w += term;
            double wnorm = w.lpNorm<Eigen::Infinity>();
            if (term.lpNorm<Eigen::Infinity>() <= rtol * std::max(wnorm, 1e-300) && j > 1) break;
        }
        z = scale * w;
    }
    return z;
}

// Dormand-Prince RK45 with standard PI step control.
Vec rk45_advance(const SpMat& M, Vec z, double t0, double t1, double rtol) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

    const double atol = rtol;
    double t = t0;
    double h = (t1 - t0) / 16.0;
    if (h <= 0.0) return z;
    Vec k1 = M * z;
    int guard = 0;
    while (t < t1 && ++guard < 2000000) {
        h = std::min(h, t1 - t);
        Vec k2 = M * (z + h * (a21 * k1));
        Vec k3 = M * (z + h * (a31 * k1 + a32 * k2));
        Vec k4 = M * (z + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Vec k5 = M * (z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Vec k6 = M * (z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vec z5 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Vec k7 = M * z5;
        Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double sc = 0.0;
        for (int i = 0; i < z.size(); ++i) {
            double tol_i = atol + rtol * std::max(std::abs(z[i]), std::abs(z5[i]));
            sc = std::max(sc, std::abs(err[i]) / tol_i);
        }
        if (sc <= 1.0) {
            t += h;
            z = std::move(z5);
            k1 = std::move(k7);  // FSAL
        }
        double factor = 0.9 * std::pow(std::max(sc, 1e-10), -0.2);
        h *= std::clamp(factor, 0.2, 5.0);
    }
    if (t < t1)
        throw convergence_error("integrate_bound: RK45 step control stalled");
    return z;
}

} // namespace

std::vector<Vec> integrate_bound(const MeanFieldSystem& sys, const Vec& z0,
                                 const std::vector<double>& grid,
                                 const IntegrateOptions& opts) {
    if (z0.size() != sys.dim())
        throw invalid_params_error("integrate_bound: z0 dimension mismatch");
    if (z0.minCoeff() < 0.0)
        throw invalid_params_error("integrate_bound: z0 must be nonnegative");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        if (!(grid[k] < grid[k + 1]))
            throw invalid_params_error("integrate_bound: grid must be strictly increasing");
    if (!grid.empty() && grid.front() < 0.0)
        throw invalid_params_error("integrate_bound: grid times must be nonnegative");

    std::vector<Vec> out;
    out.reserve(grid.size());
    Vec z = z0;
    double t = 0.0;
    for (double tk : grid) {
        double h = tk - t;
        if (h > 0.0) {
            z = (opts.method == IntegrateMethod::ExpmAction)
                    ? expm_action(sys.M, z, h, opts.rtol)
                    : rk45_advance(sys.M, z, t, tk, opts.rtol);
            t = tk;
        }
        out.push_back(z);
    }
    return out;
}

void export_coordinate_text(const SpMat& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[64];
    out << "# " << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
    for (int r = 0; r < M.outerSize(); ++r)
        for (SpMat::InnerIterator it(M, r); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%.17g", it.value());
            out << it.row() << " " << it.col() << " " << buf << "\n";
        }
}

} // namespace asis
