#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "asis/generate.hpp"
#include "asis/hetero_design.hpp"
#include "asis/homo_design.hpp"
#include "asis/rng.hpp"
#include "oracles.hpp"

using namespace asis;

namespace {

ModelParams probe_params(const Graph& g, Rng& rng) {
    ModelParams p;
    int n = g.node_count(), m = g.edge_count();
    double rho = spectral_radius(g).rho;
    p.beta.resize(n);
    p.delta.resize(n);
    p.phi.assign(n, 0.0);
    p.psi.resize(m);
    for (int i = 0; i < n; ++i) {
        p.delta[i] = 0.8 + 0.4 * rng.uniform01();
        p.beta[i] = (1.2 + 0.6 * rng.uniform01()) * p.delta[i] / rho;
    }
    for (int e = 0; e < m; ++e) p.psi[e] = 0.05 + 0.1 * rng.uniform01();
    return p;
}

double corner_decay(const Graph& g, const ModelParams& base, double phi_hi) {
    ModelParams p = base;
    p.phi.assign(g.node_count(), phi_hi);
    return -spectral_abscissa(assemble_meanfield(g, p)).eta;
}

} // namespace

TEST_CASE("normalized cost endpoints and shape") {
    double r = 2.0, lo = 0.0, hi = 1.0;
    CHECK(normalized_cost(lo, r, lo, hi) == doctest::Approx(0.0));
    CHECK(normalized_cost(hi, r, lo, hi) == doctest::Approx(1.0));
    CHECK(normalized_cost(0.5, r, lo, hi) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    double prev = -1.0;
    for (int k = 0; k <= 40; ++k) {
        double v = normalized_cost(lo + (hi - lo) * k / 40.0, r, lo, hi);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(normalized_cost(1.5, r, lo, hi), invalid_params_error);
    CHECK_THROWS_AS(normalized_cost(-0.1, r, lo, hi), invalid_params_error);
    CHECK_THROWS_AS(normalized_cost(0.5, 1.0, 0.0, 1.0), invalid_params_error);
}

TEST_CASE("posynomial cost matches the normalized form") {
    double r = 3.0, lo = 0.1, hi = 1.4;
    auto hc = HeteroCost::normalized(r, lo, hi);
    REQUIRE(hc.monomials.size() == 1);
    CHECK(hc.monomials[0].first > 0.0);
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        double phi = lo + (hi - lo) * rng.uniform01();
        double x = r - phi;
        double f = hc.constant;
        for (auto [c, e] : hc.monomials) f += c * std::pow(x, e);
        CHECK(f == doctest::Approx(normalized_cost(phi, r, lo, hi)).epsilon(1e-12));
    }
}

TEST_CASE("tilde shift") {
    Rng rng(31);
    SUBCASE("identity against the assembled matrix") {
        for (int rep = 0; rep < 20; ++rep) {
            Graph g = make_connected_erdos_renyi(4 + static_cast<int>(rng.below(6)), 0.5,
                                                 2200 + rep);
            ModelParams p = probe_params(g, rng);
            for (double& f : p.phi) f = 0.8 * rng.uniform01();
            double r = 1.0 + rng.uniform01();
            auto ts = tilde_shift(g, p, r, 0.05);
            auto sys = assemble_meanfield(g, p);
            Eigen::MatrixXd want =
                Eigen::MatrixXd(sys.M) +
                ts.shift * Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
            Eigen::MatrixXd got(ts.Mt);
            CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(got.minCoeff() >= 0.0);
        }
    }
    SUBCASE("homogeneous diagonals reduce to the closed forms") {
        Graph g = make_cycle(5);
        double beta = 0.4, delta = 0.7, phi = 0.3, psi = 0.2, r = 1.5;
        auto p = ModelParams::homogeneous(g, beta, delta, phi, psi);
        auto ts = tilde_shift(g, p, r, 0.01);
        Eigen::MatrixXd d(ts.Mt);
        for (int i = 0; i < ts.n; ++i)
            CHECK(d(i, i) == doctest::Approx(r + psi).epsilon(1e-12));
        for (int idx = 0; idx < 2 * ts.m; ++idx)
            CHECK(d(ts.n + idx, ts.n + idx) == doctest::Approx(r - phi).epsilon(1e-12));
    }
    SUBCASE("r must dominate phi") {
        Graph g = make_path(2);
        auto p = ModelParams::homogeneous(g, 0.3, 0.5, 0.4, 0.2);
        CHECK_THROWS_AS(tilde_shift(g, p, 0.4, 0.05), invalid_params_error);
        CHECK_THROWS_AS(tilde_shift(g, p, 0.3, 0.05), invalid_params_error);
        CHECK_NOTHROW(tilde_shift(g, p, 0.41, 0.05));
    }
}

TEST_CASE("decay target equivalence through the shift") {
    Rng rng(93);
    int stable_seen = 0, unstable_seen = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Graph g = make_connected_erdos_renyi(4 + static_cast<int>(rng.below(4)), 0.5,
                                             3300 + rep);
        ModelParams p = probe_params(g, rng);
        // spread phi over the instance so both verdicts appear
        double level = (rep % 2 == 0) ? 1.4 : 0.05;
        for (double& f : p.phi) f = level * (0.8 + 0.4 * rng.uniform01());
        double r = 2.5;
        double alpha = 0.02;
        auto ts = tilde_shift(g, p, r, alpha);
        auto sys = assemble_meanfield(g, p);

        double eta = oracle::abscissa_dense(Eigen::MatrixXd(sys.M));
        Eigen::MatrixXd shifted =
            Eigen::MatrixXd(ts.Mt) +
            alpha * Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
        double eta_shifted = oracle::abscissa_dense(shifted);
        bool lhs = eta <= -alpha;
        bool rhs = eta_shifted <= ts.shift;
        CHECK(lhs == rhs);
        CHECK(eta_shifted == doctest::Approx(eta + ts.shift + alpha).epsilon(1e-9));
        (lhs ? stable_seen : unstable_seen)++;
    }
    CHECK(stable_seen >= 5);
    CHECK(unstable_seen >= 5);
}

TEST_CASE("positive vector certificates") {
    Rng rng(14);
    for (int rep = 0; rep < 8; ++rep) {
        Graph g = make_connected_erdos_renyi(5, 0.5, 4400 + rep);
        ModelParams p = probe_params(g, rng);
        double level = (rep % 2 == 0) ? 1.6 : 0.02;
        for (double& f : p.phi) f = level;
        double r = 2.5, alpha = 0.02;
        auto ts = tilde_shift(g, p, r, alpha);
        SpMat a = ts.Mt;
        SpMat ident(ts.dim(), ts.dim());
        ident.setIdentity();
        a = a + alpha * ident;
        auto pr = perron_root(a);
        REQUIRE(pr.converged);
        Vec lhs = a * pr.v;
        if (pr.value <= ts.shift) {
            // the Perron vector itself witnesses (Mt + alpha I) v <= K v
            CHECK((lhs - ts.shift * pr.v).maxCoeff() <= 1e-9 * ts.shift);
        } else {
            // no positive vector can: the Collatz-Wielandt ratio is at least
            // the Perron root for every candidate
            for (int trial = 0; trial < 5; ++trial) {
                Vec v(ts.dim());
                for (int k = 0; k < ts.dim(); ++k) v[k] = 0.1 + rng.uniform01();
                Vec av = a * v;
                double worst = 0.0;
                for (int k = 0; k < ts.dim(); ++k) worst = std::max(worst, av[k] / v[k]);
                CHECK(worst > ts.shift);
            }
        }
    }
}

TEST_CASE("design program layout") {
    Graph g = make_connected_erdos_renyi(6, 0.5, 8);
    Rng rng(4);
    ModelParams base = probe_params(g, rng);
    HeteroDesignProblem prob;
    prob.alpha = 0.05;
    prob.r = 2.0;
    prob.phi_lo = 0.0;
    prob.phi_hi = 1.0;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto prog = build_design_program(g, base, prob);
    int n = g.node_count(), dim = n + 2 * g.edge_count();
    CHECK(prog.nvar == n + dim);
    CHECK(prog.gauge_var == n);
    CHECK(static_cast<int>(prog.constraints.size()) == dim);
    CHECK(static_cast<int>(prog.objective.size()) == n);
    for (int i = 0; i < n; ++i) {
        CHECK(prog.lower[i] == doctest::Approx(std::log(prob.r - prob.phi_hi)));
        CHECK(prog.upper[i] == doctest::Approx(std::log(prob.r - prob.phi_lo)));
    }
    for (int k = n; k < prog.nvar; ++k) {
        CHECK(prog.lower[k] == -std::numeric_limits<double>::infinity());
        CHECK(prog.upper[k] == std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("program gradients match finite differences") {
    Graph g = make_connected_erdos_renyi(5, 0.55, 12);
    Rng rng(21);
    ModelParams base = probe_params(g, rng);
    HeteroDesignProblem prob;
    prob.alpha = 0.03;
    prob.r = 2.0;
    prob.phi_lo = 0.05;
    prob.phi_hi = 1.2;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto prog = build_design_program(g, base, prob);

    double y_lo = std::log(prob.r - prob.phi_hi), y_hi = std::log(prob.r - prob.phi_lo);
    const double h = 1e-6;
    for (int pt = 0; pt < 5; ++pt) {
        GpVec w(prog.nvar);
        for (int i = 0; i < g.node_count(); ++i)
            w[i] = y_lo + (y_hi - y_lo) * (0.2 + 0.6 * rng.uniform01());
        for (int k = g.node_count(); k < prog.nvar; ++k) w[k] = 2.0 * rng.uniform01() - 1.0;

        GpVec go = objective_gradient(prog, w);
        for (int k = 0; k < prog.nvar; ++k) {
            GpVec wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            double fd = (objective_value(prog, wp) - objective_value(prog, wm)) / (2 * h);
            CHECK(std::abs(go[k] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
        for (const auto& con : prog.constraints) {
            GpVec gc = constraint_gradient(con, w, prog.nvar);
            for (int k = 0; k < prog.nvar; ++k) {
                GpVec wp = w, wm = w;
                wp[k] += h;
                wm[k] -= h;
                double fd = (constraint_value(con, wp) - constraint_value(con, wm)) / (2 * h);
                CHECK(std::abs(gc[k] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("symmetric instance gets symmetric rates") {
    Graph g = make_path(2);
    auto base = ModelParams::homogeneous(g, 1.4, 1.0, 0.0, 0.1);
    HeteroDesignProblem prob;
    prob.alpha = 0.05;
    prob.r = 2.0;
    prob.phi_lo = 0.0;
    prob.phi_hi = 1.0;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    REQUIRE(res.certificate_ok);
    CHECK(std::abs(res.phi[0] - res.phi[1]) <= 1e-7);
}

TEST_CASE("vanishing target relaxes to the cheap end of the box") {
    Graph g = make_cycle(4);
    auto base = ModelParams::homogeneous(g, 0.2, 5.0, 0.0, 0.1);
    HeteroDesignProblem prob;
    prob.alpha = 1e-6;
    prob.r = 2.0;
    prob.phi_lo = 0.1;
    prob.phi_hi = 1.0;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    for (double f : res.phi) CHECK(f <= prob.phi_lo + 1e-4 * (prob.phi_hi - prob.phi_lo));
    CHECK(res.total_cost <= 1e-3);
}

TEST_CASE("design is near the exhaustive optimum on small instances") {
    struct Inst { int n; bool cycle; std::uint64_t seed; };
    for (Inst inst : {Inst{4, true, 3}, Inst{5, false, 7}, Inst{6, false, 11}}) {
        Graph g = inst.cycle ? make_cycle(inst.n)
                             : make_connected_erdos_renyi(inst.n, 0.65, inst.seed);
        Rng rng(inst.seed);
        ModelParams base = probe_params(g, rng);
        double decay = corner_decay(g, base, 1.0);
        REQUIRE(decay > 0.0);

        HeteroDesignProblem prob;
        prob.alpha = 0.6 * decay;
        prob.r = 2.0;
        prob.phi_lo = 0.0;
        prob.phi_hi = 1.0;
        prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
        auto res = design_heterogeneous(g, base, prob);
        REQUIRE(res.feasible);
        REQUIRE(res.certificate_ok);
        CHECK(res.outer_iterations > 0);
        CHECK(res.newton_iterations > 0);
        CHECK(res.max_constraint < 0.0);

        auto cost_f = [&](double phi) {
            return normalized_cost(phi, prob.r, prob.phi_lo, prob.phi_hi);
        };
        auto grid = oracle::grid_design_optimum(g, base, prob.alpha, prob.phi_lo, prob.phi_hi,
                                                1001, cost_f, res.phi, 2'000'000);
        REQUIRE(grid.best_cost < std::numeric_limits<double>::infinity());
        CHECK(std::abs(res.total_cost - grid.best_cost) <= 0.02 * grid.best_cost);
    }
}

TEST_CASE("hubs get cut harder") {
    Graph g = make_preferential_attachment(60, 2, 19);
    double rho = spectral_radius(g).rho;
    double delta = 0.1, beta = 1.1 * delta / rho;
    auto base = ModelParams::homogeneous(g, beta, delta, 0.0, beta);
    HeteroDesignProblem prob;
    prob.alpha = 0.005;
    prob.r = 8.0 * beta;
    prob.phi_lo = 0.0;
    prob.phi_hi = 4.0 * beta;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    REQUIRE(res.certificate_ok);
    CHECK(res.certificate.eta <= -prob.alpha + 1e-6);
    for (double f : res.phi) {
        CHECK(f >= prob.phi_lo - 1e-9);
        CHECK(f <= prob.phi_hi + 1e-9);
    }
    std::vector<double> deg(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) deg[i] = g.degree(i);
    CHECK(oracle::spearman(deg, res.phi) > 0.1);
}

TEST_CASE("already stable base needs almost no cutting") {
    Graph g = make_preferential_attachment(60, 2, 19);
    double rho = spectral_radius(g).rho;
    double delta = 0.1, beta = delta / (1.1 * rho);
    auto base = ModelParams::homogeneous(g, beta, delta, 0.0, beta);
    double base_decay = -spectral_abscissa(assemble_meanfield(g, base)).eta;
    REQUIRE(base_decay > 0.005);  // uncontrolled network already decays fast enough

    HeteroDesignProblem prob;
    prob.alpha = 0.005;
    prob.r = 8.0 * beta;
    prob.phi_lo = 0.0;
    prob.phi_hi = 4.0 * beta;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    CHECK(res.certificate.eta <= -prob.alpha + prob.cert_tol);
    CHECK(res.total_cost <= 0.05 * g.node_count());

    ModelParams designed = base;
    designed.phi = res.phi;
    auto cert = verify_design(g, designed, prob.alpha);
    CHECK(cert.stable);
    CHECK(cert.eta == doctest::Approx(res.certificate.eta).epsilon(1e-8));
}

TEST_CASE("verify design flags an uncontrolled epidemic") {
    Graph g = make_connected_erdos_renyi(15, 0.3, 44);
    double rho = spectral_radius(g).rho;
    auto p = ModelParams::homogeneous(g, 2.0 * 0.4 / rho, 0.4, 0.0, 0.1);
    auto cert = verify_design(g, p, 0.01);
    CHECK_FALSE(cert.stable);
    CHECK(cert.eta == doctest::Approx(2.0 * 0.4 - 0.4).epsilon(1e-8));
}

TEST_CASE("infeasible box is reported with the achievable rate") {
    Graph g = make_connected_erdos_renyi(8, 0.5, 66);
    Rng rng(9);
    ModelParams base = probe_params(g, rng);
    double decay = corner_decay(g, base, 0.02);
    HeteroDesignProblem prob;
    prob.alpha = decay + 0.1;
    prob.r = 2.0;
    prob.phi_lo = 0.0;
    prob.phi_hi = 0.02;  // almost no cutting allowed
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    CHECK_FALSE(res.feasible);
    CHECK(res.achievable_decay == doctest::Approx(decay).epsilon(1e-9));
    CHECK(res.achievable_decay < prob.alpha);
    CHECK_FALSE(res.message.empty());
}

TEST_CASE("target at the edge of achievability returns the corner") {
    Graph g = make_cycle(5);
    Rng rng(18);
    ModelParams base = probe_params(g, rng);
    double decay = corner_decay(g, base, 1.0);
    REQUIRE(decay > 0.0);
    HeteroDesignProblem prob;
    prob.alpha = decay - 1e-12;
    prob.r = 2.0;
    prob.phi_lo = 0.0;
    prob.phi_hi = 1.0;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    CHECK(res.boundary_solution);
    CHECK(res.certificate_ok);
    for (double f : res.phi) CHECK(f == doctest::Approx(prob.phi_hi));
    CHECK_FALSE(res.message.empty());
}

TEST_CASE("result serialization") {
    Graph g = make_cycle(4);
    auto base = ModelParams::homogeneous(g, 0.9, 1.0, 0.0, 0.1);
    HeteroDesignProblem prob;
    prob.alpha = 0.02;
    prob.r = 2.0;
    prob.phi_lo = 0.0;
    prob.phi_hi = 1.0;
    prob.cost = HeteroCost::normalized(prob.r, prob.phi_lo, prob.phi_hi);
    auto res = design_heterogeneous(g, base, prob);
    REQUIRE(res.feasible);
    auto js = res.to_json(g, prob.alpha);
    CHECK(js.find("\"feasible\": true") != std::string::npos);
    CHECK(js.find("\"phi\"") != std::string::npos);
    auto csv = res.to_csv(g);
    CHECK(csv.rfind("node,degree,phi\n", 0) == 0);
}
