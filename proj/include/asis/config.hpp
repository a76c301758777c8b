// config.hpp -- experiment configuration: one JSON file drives graph
// loading, model rates, design targets, and simulation settings.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asis/graph.hpp"
#include "asis/params.hpp"

namespace asis {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rate given either as one scalar applied everywhere or as an explicit
// per-element array.
struct RateSpec {
    bool scalar = true;
    double value = 0.0;
    std::vector<double> values;

    std::vector<double> resolve(size_t count, const std::string& where) const;
};

struct GraphSource {
    std::string path;
    enum class Format { Auto, EdgeList, Json } format = Format::Auto;
};

struct BoundsBlock {
    double phi_lo = 0.0, phi_hi = 0.0;
    double psi_lo = 0.0, psi_hi = 0.0;
};

struct DesignBlock {
    double alpha = 0.0;
    double r = 0.0;          // shift constant; 0 means "2 * phi_hi"
    std::string cost = "normalized";  // normalized | linear | reciprocal
    double resolved_r(double phi_hi) const { return r > 0.0 ? r : 2.0 * phi_hi; }
};

struct SimulationBlock {
    double horizon = 0.0;
    std::vector<double> grid;
    std::uint64_t runs = 0;
    std::uint64_t seed = 0;
    bool init_all = true;
    std::vector<int> infected;  // used when !init_all
    bool with_q = false;
    bool stop_when_healthy = false;
    int threads = 1;
};

struct ExperimentConfig {
    GraphSource graph;
    std::optional<RateSpec> beta, delta, phi, psi;
    std::optional<BoundsBlock> bounds;
    std::optional<DesignBlock> design;
    std::optional<SimulationBlock> simulation;
    std::string output_dir = ".";

    static ExperimentConfig parse_text(const std::string& text, const std::string& origin);
    static ExperimentConfig parse_file(const std::string& path);

    Graph load_graph() const;
    // Builds full ModelParams; every rate block listed in `required` must be
    // present (members of "beta","delta","phi","psi"); missing optional
    // blocks default to zero rates.
    ModelParams materialize_params(const Graph& g,
                                   const std::vector<std::string>& required) const;

    void require_bounds() const;
    void require_design() const;
    void require_simulation() const;
};

} // namespace asis
