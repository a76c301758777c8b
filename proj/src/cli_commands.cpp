#include "asis/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "asis/config.hpp"
#include "asis/generate.hpp"
#include "asis/graph.hpp"
#include "asis/hetero_design.hpp"
#include "asis/homo_design.hpp"
#include "asis/meanfield.hpp"
#include "asis/sim.hpp"

namespace asis::cli {
namespace {

namespace fs = std::filesystem;

struct command_failed {
    int code;
    std::string what;
};

// Uniform error mapping for every command body.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const command_failed& e) {
        std::fprintf(stderr, "error: %s\n", e.what.c_str());
        return e.code;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kValidation;
    } catch (const graph_parse_error& e) {
        std::fprintf(stderr, "graph error: %s\n", e.what());
        return kValidation;
    } catch (const invalid_params_error& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return kValidation;
    } catch (const convergence_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kNumerical;
    } catch (const simulation_error& e) {
        std::fprintf(stderr, "simulation error: %s\n", e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    }
}

fs::path prepare_out_dir(const ExperimentConfig& cfg, const std::string& override_dir) {
    fs::path dir = override_dir.empty() ? cfg.output_dir : override_dir;
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw command_failed{kValidation, "cannot write " + p.string()};
    out << content;
}

void require_connected(const Graph& g) {
    if (!g.connected())
        throw command_failed{kValidation,
                             "graph is not connected; the analysis assumes a strongly "
                             "connected initial network"};
}

NetworkState initial_state(const Graph& g, const SimulationBlock& sim) {
    return sim.init_all ? NetworkState::all_infected(g)
                        : NetworkState::with_infected(g, sim.infected);
}

std::vector<double> default_grid(double horizon) {
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) grid.push_back(horizon * k / 20.0);
    return grid;
}

bool all_equal(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return !v.empty();
}

std::string bound_csv(const Graph& g, const MeanFieldSystem& sys,
                      const std::vector<double>& grid, const std::vector<Vec>& z) {
    auto fmt = [](double x) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    std::string s = "t";
    for (int i = 0; i < sys.n; ++i) s += ",p_" + std::to_string(g.original_label(i));
    for (int idx = 0; idx < 2 * sys.m; ++idx) {
        auto [i, j] = sys.map.pair_at(idx);
        s += ",q_" + std::to_string(g.original_label(i)) + "_" +
             std::to_string(g.original_label(j));
    }
    s += '\n';
    for (size_t k = 0; k < grid.size(); ++k) {
        s += fmt(grid[k]);
        for (int r = 0; r < sys.dim(); ++r) s += "," + fmt(z[k][r]);
        s += '\n';
    }
    return s;
}

} // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
    return guarded([&]() {
        auto cfg = ExperimentConfig::parse_file(config_path);
        cfg.require_simulation();
        auto g = cfg.load_graph();
        auto params = cfg.materialize_params(g, {"beta", "delta", "phi", "psi"});
        auto sim = *cfg.simulation;
        if (sim.grid.empty()) sim.grid = default_grid(sim.horizon);
        auto init = initial_state(g, sim);
        auto dir = prepare_out_dir(cfg, out_override);

        SimOptions traj_opts;
        traj_opts.grid = sim.grid;
        traj_opts.stop_when_healthy = sim.stop_when_healthy;
        auto traj = simulate(g, params, init, sim.horizon, sim.seed, traj_opts);
        write_file(dir / "trajectory.csv", traj.events_csv(g));

        EnsembleOptions eopts;
        eopts.with_q = sim.with_q;
        eopts.threads = sim.threads;
        auto est = estimate_probabilities(g, params, init, sim.horizon, sim.grid, sim.runs,
                                          sim.seed, eopts);
        write_file(dir / "ensemble.csv", est.csv(g, sim.with_q));

        int last = static_cast<int>(sim.grid.size()) - 1;
        std::printf("runs=%llu events_run0=%zu final_prevalence=%.6g absorbed_fraction=%.6g\n",
                    static_cast<unsigned long long>(est.runs), traj.events.size(),
                    est.mean_prevalence(last),
                    double(est.absorbed_runs) / double(est.runs));
        std::printf("wrote %s and %s\n", (dir / "trajectory.csv").string().c_str(),
                    (dir / "ensemble.csv").string().c_str());
        return kOk;
    });
}

int cmd_analyze(const std::string& config_path, const std::string& out_override) {
    return guarded([&]() {
        auto cfg = ExperimentConfig::parse_file(config_path);
        auto g = cfg.load_graph();
        require_connected(g);
        auto params = cfg.materialize_params(g, {"beta", "delta"});
        auto sys = assemble_meanfield(g, params);
        double alpha = cfg.design ? cfg.design->alpha : 0.0;
        auto cert = spectral_abscissa(sys, {}, alpha);
        auto dir = prepare_out_dir(cfg, out_override);
        write_file(dir / "certificate.json", cert.to_json(sys.dim()));

        std::printf("n=%d m=%d dim=%d\n", sys.n, sys.m, sys.dim());
        std::printf("eta=%.12g stable=%s irreducible=%s\n", cert.eta,
                    cert.stable ? "true" : "false",
                    check_irreducible(sys) ? "true" : "false");

        bool homogeneous = all_equal(params.beta) && all_equal(params.delta) &&
                           all_equal(params.phi) &&
                           (params.psi.empty() || all_equal(params.psi));
        if (homogeneous) {
            double rho = spectral_radius(g).rho;
            HomogeneousParams hp{params.beta[0], params.delta[0], params.phi[0],
                                 params.psi.empty() ? 0.0 : params.psi[0], rho};
            double lp = lambda_plus(hp);
            std::printf("homogeneous: rho=%.12g lambda_plus=%.12g threshold_margin=%.12g\n",
                        rho, lp, -lp);
            if (hp.phi == 0.0 && hp.psi == 0.0)
                std::printf("static SIS regime: delta=%.12g vs beta*rho=%.12g\n", hp.delta,
                            hp.beta * rho);
            if (lambda_plus_degenerate(hp))
                std::printf("note: beta*rho equals phi (closed form is at its removable "
                            "degeneracy)\n");
        }

        if (cfg.simulation && !cfg.simulation->grid.empty()) {
            auto init = initial_state(g, *cfg.simulation);
            Vec z0 = bound_initial_state(sys, g, init.x, init.a);
            auto z = integrate_bound(sys, z0, cfg.simulation->grid);
            write_file(dir / "bound.csv", bound_csv(g, sys, cfg.simulation->grid, z));
            std::printf("wrote %s\n", (dir / "bound.csv").string().c_str());
        }
        std::printf("wrote %s\n", (dir / "certificate.json").string().c_str());
        return kOk;
    });
}

int cmd_design_homo(const std::string& config_path, const std::string& out_override) {
    return guarded([&]() {
        auto cfg = ExperimentConfig::parse_file(config_path);
        cfg.require_bounds();
        cfg.require_design();
        auto g = cfg.load_graph();
        require_connected(g);
        if (!cfg.beta || !cfg.beta->scalar || !cfg.delta || !cfg.delta->scalar)
            throw config_error(
                "/params: homogeneous design needs scalar beta and delta");
        double beta = cfg.beta->value, delta = cfg.delta->value;
        const auto& b = *cfg.bounds;
        const auto& d = *cfg.design;

        auto pick_cost = [&](double lo, double hi, double r) -> CostFunction {
            if (lo == hi) return {[](double) { return 0.0; }, "constant"};
            if (d.cost == "linear") return CostFunction::linear();
            if (d.cost == "reciprocal")
                return {[r](double x) { return 1.0 / (r - x); }, "reciprocal"};
            return CostFunction::normalized(r, lo, hi);
        };

        HomoDesignProblem prob;
        prob.alpha = d.alpha;
        prob.phi_lo = b.phi_lo;
        prob.phi_hi = b.phi_hi;
        prob.psi_lo = b.psi_lo;
        prob.psi_hi = b.psi_hi;
        prob.cost_phi = pick_cost(b.phi_lo, b.phi_hi, d.resolved_r(b.phi_hi));
        prob.cost_psi = pick_cost(b.psi_lo, b.psi_hi, 2.0 * b.psi_hi);

        auto out = design_homogeneous(prob, beta, delta, g);
        auto dir = prepare_out_dir(cfg, out_override);
        write_file(dir / "design.json", out.result.to_json(d.alpha));

        if (!out.result.feasible) {
            std::printf("infeasible: achievable decay %.12g < alpha %.12g\n",
                        out.result.achievable_decay, d.alpha);
            if (out.result.alpha_exceeds_delta)
                std::printf("note: alpha >= delta, which no cutting rate can reach\n");
            return kInfeasible;
        }
        if (out.certificate) {
            write_file(dir / "certificate.json", out.certificate->to_json(0));
            if (out.certificate->eta > -d.alpha + 1e-6)
                throw command_failed{kNumerical,
                                     "designed rates failed the recomputed decay certificate"};
        }
        std::printf("phi=%.12g psi=%.12g cost=%.12g lambda_plus=%.12g\n", out.result.phi,
                    out.result.psi, out.result.cost, out.result.lambda);
        std::printf("wrote %s\n", (dir / "design.json").string().c_str());
        return kOk;
    });
}

int cmd_design_hetero(const std::string& config_path, const std::string& out_override) {
    return guarded([&]() {
        auto cfg = ExperimentConfig::parse_file(config_path);
        cfg.require_bounds();
        cfg.require_design();
        auto g = cfg.load_graph();
        require_connected(g);
        auto params = cfg.materialize_params(g, {"beta", "delta", "psi"});
        const auto& b = *cfg.bounds;
        const auto& d = *cfg.design;

        HeteroDesignProblem prob;
        prob.alpha = d.alpha;
        prob.phi_lo = b.phi_lo;
        prob.phi_hi = b.phi_hi;
        prob.r = d.resolved_r(b.phi_hi);
        if (d.cost == "normalized")
            prob.cost = HeteroCost::normalized(prob.r, b.phi_lo, b.phi_hi);
        else if (d.cost == "reciprocal")
            prob.cost = HeteroCost::reciprocal();
        else
            throw config_error("/design/cost: \"" + d.cost +
                               "\" is not a posynomial cost in the shifted variable; use "
                               "\"normalized\" or \"reciprocal\"");

        auto res = design_heterogeneous(g, params, prob);
        auto dir = prepare_out_dir(cfg, out_override);
        write_file(dir / "design.json", res.to_json(g, d.alpha));

        if (!res.feasible) {
            std::printf("infeasible: achievable decay %.12g < alpha %.12g\n",
                        res.achievable_decay, d.alpha);
            return kInfeasible;
        }
        write_file(dir / "phi.csv", res.to_csv(g));
        write_file(dir / "certificate.json", res.certificate.to_json(0));
        if (!res.certificate_ok)
            throw command_failed{kNumerical,
                                 "designed rates failed the recomputed decay certificate: eta=" +
                                     std::to_string(res.certificate.eta)};
        std::printf("objective=%.12g cost=%.12g eta=%.12g outer=%d newton=%d\n", res.objective,
                    res.total_cost, res.certificate.eta, res.outer_iterations,
                    res.newton_iterations);
        std::printf("wrote %s, %s\n", (dir / "design.json").string().c_str(),
                    (dir / "phi.csv").string().c_str());
        return kOk;
    });
}

int cmd_gen_graph(const std::string& type, int n, double p, int attach, std::uint64_t seed,
                  const std::string& out_path) {
    return guarded([&]() {
        Graph g = [&]() {
            if (type == "er") return make_connected_erdos_renyi(n, p, seed);
            if (type == "ba") return make_preferential_attachment(n, attach, seed);
            if (type == "path") return make_path(n);
            if (type == "cycle") return make_cycle(n);
            if (type == "complete") return make_complete(n);
            throw config_error("unknown graph type: " + type +
                               " (expected er, ba, path, cycle, complete)");
        }();
        std::string header = "# generated graph: type=" + type + " n=" + std::to_string(n);
        if (type == "er") header += " p=" + std::to_string(p);
        if (type == "ba") header += " attach=" + std::to_string(attach);
        if (type == "er" || type == "ba") header += " seed=" + std::to_string(seed);
        std::string body = header + "\n";
        for (auto [i, j] : g.edges())
            body += std::to_string(i) + " " + std::to_string(j) + "\n";
        write_file(out_path, body);
        double rho = spectral_radius(g).rho;
        std::printf("n=%d m=%d rho=%.12g -> %s\n", g.node_count(), g.edge_count(), rho,
                    out_path.c_str());
        return kOk;
    });
}

int cmd_validate_config(const std::string& config_path) {
    return guarded([&]() {
        auto cfg = ExperimentConfig::parse_file(config_path);
        auto g = cfg.load_graph();
        std::printf("graph: n=%d m=%d connected=%s\n", g.node_count(), g.edge_count(),
                    g.connected() ? "true" : "false");
        std::vector<std::string> have;
        if (cfg.beta) have.push_back("beta");
        if (cfg.delta) have.push_back("delta");
        if (cfg.phi) have.push_back("phi");
        if (cfg.psi) have.push_back("psi");
        // resolve every provided rate against the graph to catch size errors
        cfg.materialize_params(g, {});
        if (cfg.bounds && cfg.design) {
            double r = cfg.design->resolved_r(cfg.bounds->phi_hi);
            if (!(r > cfg.bounds->phi_hi))
                throw config_error("/design/r: must exceed phi_hi");
        }
        std::string blocks;
        for (const auto& s : have) blocks += s + " ";
        std::printf("params: %s\n", blocks.empty() ? "(none)" : blocks.c_str());
        std::printf("blocks: bounds=%s design=%s simulation=%s\n",
                    cfg.bounds ? "yes" : "no", cfg.design ? "yes" : "no",
                    cfg.simulation ? "yes" : "no");
        std::printf("ok\n");
        return kOk;
    });
}

} // namespace asis::cli
