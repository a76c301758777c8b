// asis -- batch front end: simulation, spectral analysis, and rate design
// for adaptive SIS models, driven by JSON experiment configs.
#include <string>

#include <CLI11.hpp>

#include "asis/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adaptive SIS simulation, analysis, and rate design"};
    app.require_subcommand(1);

    std::string config_path, out_dir;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("-o,--out", out_dir, "override the config output directory");
    };

    auto* sim = app.add_subcommand("simulate", "run a Gillespie ensemble and export CSVs");
    add_config(sim);
    auto* ana = app.add_subcommand("analyze",
                                   "assemble the bounding matrix and certify stability");
    add_config(ana);
    auto* dh = app.add_subcommand("design-homo",
                                  "cost-optimal homogeneous (phi, psi) design");
    add_config(dh);
    auto* dg = app.add_subcommand("design-hetero",
                                  "cost-optimal per-node cutting rates via the "
                                  "geometric program");
    add_config(dg);

    std::string gtype = "er", gout = "graph.edges";
    int gn = 50, gattach = 2;
    double gp = 0.1;
    std::uint64_t gseed = 1;
    auto* gg = app.add_subcommand("gen-graph", "generate a connected test graph");
    gg->add_option("--type", gtype, "er | ba | path | cycle | complete");
    gg->add_option("--n", gn, "node count")->required();
    gg->add_option("--p", gp, "edge probability (er)");
    gg->add_option("--attach", gattach, "edges per new node (ba)");
    gg->add_option("--seed", gseed, "generator seed");
    gg->add_option("--out", gout, "output edge-list path")->required();

    auto* vc = app.add_subcommand("validate-config", "parse and cross-check a config");
    vc->add_option("-c,--config", config_path, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : asis::cli::kValidation;
    }

    if (sim->parsed()) return asis::cli::cmd_simulate(config_path, out_dir);
    if (ana->parsed()) return asis::cli::cmd_analyze(config_path, out_dir);
    if (dh->parsed()) return asis::cli::cmd_design_homo(config_path, out_dir);
    if (dg->parsed()) return asis::cli::cmd_design_hetero(config_path, out_dir);
    if (gg->parsed()) return asis::cli::cmd_gen_graph(gtype, gn, gp, gattach, gseed, gout);
    if (vc->parsed()) return asis::cli::cmd_validate_config(config_path);
    return asis::cli::kValidation;
}
