#include "asis/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace asis {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
    throw config_error(origin + ": " + path + ": " + what);
}

int line_of_offset(const std::string& text, size_t byte) {
    int line = 1;
    for (size_t k = 0; k < byte && k < text.size(); ++k)
        if (text[k] == '\n') ++line;
    return line;
}

double require_positive(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_number()) fail(origin, path, "expected a number");
    double v = j.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) fail(origin, path, "must be a positive finite number");
    return v;
}

double require_nonneg(const json& j, const std::string& origin, const std::string& path) {
    if (!j.is_number()) fail(origin, path, "expected a number");
    double v = j.get<double>();
    if (!(v >= 0.0) || !std::isfinite(v)) fail(origin, path, "must be nonnegative and finite");
    return v;
}

RateSpec parse_rate(const json& j, const std::string& origin, const std::string& path) {
    RateSpec r;
    if (j.is_number()) {
        r.scalar = true;
        r.value = require_nonneg(j, origin, path);
        return r;
    }
    if (j.is_array()) {
        r.scalar = false;
        for (size_t k = 0; k < j.size(); ++k)
            r.values.push_back(require_nonneg(j[k], origin, path + "/" + std::to_string(k)));
        if (r.values.empty()) fail(origin, path, "rate array must not be empty");
        return r;
    }
    fail(origin, path, "expected a number or an array of numbers");
}

void reject_unknown_keys(const json& j, const std::string& origin, const std::string& path,
                         std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) fail(origin, path + "/" + it.key(), "unknown key");
    }
}

} // namespace

std::vector<double> RateSpec::resolve(size_t count, const std::string& where) const {
    if (scalar) return std::vector<double>(count, value);
    if (values.size() != count)
        throw config_error(where + ": array has " + std::to_string(values.size()) +
                           " entries but the graph needs " + std::to_string(count));
    return values;
}

namespace {

ExperimentConfig parse_root_json(const json& root, const std::string& origin) {
    if (!root.is_object()) throw config_error(origin + ": top level must be an object");
    reject_unknown_keys(root, origin, "",
                        {"graph", "params", "bounds", "design", "simulation", "output_dir"});

    ExperimentConfig cfg;

    if (!root.contains("graph")) fail(origin, "/graph", "missing");
    {
        const json& jg = root["graph"];
        if (!jg.is_object()) fail(origin, "/graph", "expected an object");
        reject_unknown_keys(jg, origin, "/graph", {"path", "format"});
        if (!jg.contains("path") || !jg["path"].is_string())
            fail(origin, "/graph/path", "required string");
        cfg.graph.path = jg["path"].get<std::string>();
        if (jg.contains("format")) {
            std::string f = jg["format"].get<std::string>();
            if (f == "edge-list")
                cfg.graph.format = GraphSource::Format::EdgeList;
            else if (f == "json")
                cfg.graph.format = GraphSource::Format::Json;
            else
                fail(origin, "/graph/format", "must be \"edge-list\" or \"json\"");
        }
    }

    if (root.contains("params")) {
        const json& jp = root["params"];
        if (!jp.is_object()) fail(origin, "/params", "expected an object");
        reject_unknown_keys(jp, origin, "/params", {"beta", "delta", "phi", "psi"});
        if (jp.contains("beta")) cfg.beta = parse_rate(jp["beta"], origin, "/params/beta");
        if (jp.contains("delta")) cfg.delta = parse_rate(jp["delta"], origin, "/params/delta");
        if (jp.contains("phi")) cfg.phi = parse_rate(jp["phi"], origin, "/params/phi");
        if (jp.contains("psi")) cfg.psi = parse_rate(jp["psi"], origin, "/params/psi");
    }

    if (root.contains("bounds")) {
        const json& jb = root["bounds"];
        if (!jb.is_object()) fail(origin, "/bounds", "expected an object");
        reject_unknown_keys(jb, origin, "/bounds", {"phi_lo", "phi_hi", "psi_lo", "psi_hi"});
        BoundsBlock b;
        if (jb.contains("phi_lo")) b.phi_lo = require_nonneg(jb["phi_lo"], origin, "/bounds/phi_lo");
        if (!jb.contains("phi_hi")) fail(origin, "/bounds/phi_hi", "missing");
        b.phi_hi = require_nonneg(jb["phi_hi"], origin, "/bounds/phi_hi");
        if (jb.contains("psi_lo")) b.psi_lo = require_nonneg(jb["psi_lo"], origin, "/bounds/psi_lo");
        if (jb.contains("psi_hi")) b.psi_hi = require_nonneg(jb["psi_hi"], origin, "/bounds/psi_hi");
        if (b.phi_lo > b.phi_hi) fail(origin, "/bounds", "phi_lo exceeds phi_hi");
        if (b.psi_lo > b.psi_hi) fail(origin, "/bounds", "psi_lo exceeds psi_hi");
        cfg.bounds = b;
    }

    if (root.contains("design")) {
        const json& jd = root["design"];
        if (!jd.is_object()) fail(origin, "/design", "expected an object");
        reject_unknown_keys(jd, origin, "/design", {"alpha", "r", "cost"});
        DesignBlock d;
        if (!jd.contains("alpha")) fail(origin, "/design/alpha", "missing");
        d.alpha = require_positive(jd["alpha"], origin, "/design/alpha");
        if (jd.contains("r")) d.r = require_positive(jd["r"], origin, "/design/r");
        if (jd.contains("cost")) {
            d.cost = jd["cost"].get<std::string>();
            if (d.cost != "normalized" && d.cost != "linear" && d.cost != "reciprocal")
                fail(origin, "/design/cost",
                     "must be \"normalized\", \"linear\" or \"reciprocal\"");
        }
        cfg.design = d;
    }

    if (root.contains("simulation")) {
        const json& js = root["simulation"];
        if (!js.is_object()) fail(origin, "/simulation", "expected an object");
        reject_unknown_keys(js, origin, "/simulation",
                            {"horizon", "grid", "runs", "seed", "init", "with_q",
                             "stop_when_healthy", "threads"});
        SimulationBlock s;
        if (!js.contains("horizon")) fail(origin, "/simulation/horizon", "missing");
        s.horizon = require_positive(js["horizon"], origin, "/simulation/horizon");
        if (!js.contains("runs")) fail(origin, "/simulation/runs", "missing");
        if (!js["runs"].is_number_unsigned() || js["runs"].get<std::uint64_t>() == 0)
            fail(origin, "/simulation/runs", "must be a positive integer");
        s.runs = js["runs"].get<std::uint64_t>();
        if (js.contains("seed")) {
            if (!js["seed"].is_number_unsigned())
                fail(origin, "/simulation/seed", "must be a nonnegative integer");
            s.seed = js["seed"].get<std::uint64_t>();
        }
        if (js.contains("grid")) {
            const json& jgrid = js["grid"];
            if (jgrid.is_array()) {
                for (size_t k = 0; k < jgrid.size(); ++k)
                    s.grid.push_back(require_nonneg(jgrid[k], origin,
                                                    "/simulation/grid/" + std::to_string(k)));
            } else if (jgrid.is_object()) {
                reject_unknown_keys(jgrid, origin, "/simulation/grid",
                                    {"start", "end", "points"});
                double start = jgrid.contains("start")
                                   ? require_nonneg(jgrid["start"], origin,
                                                    "/simulation/grid/start")
                                   : 0.0;
                double end = jgrid.contains("end")
                                 ? require_positive(jgrid["end"], origin,
                                                    "/simulation/grid/end")
                                 : s.horizon;
                if (!jgrid.contains("points"))
                    fail(origin, "/simulation/grid/points", "missing");
                int points = jgrid["points"].get<int>();
                if (points < 1) fail(origin, "/simulation/grid/points", "must be >= 1");
                if (end <= start) fail(origin, "/simulation/grid", "end must exceed start");
                for (int k = 0; k < points; ++k)
                    s.grid.push_back(points == 1
                                         ? end
                                         : start + (end - start) * k / double(points - 1));
            } else {
                fail(origin, "/simulation/grid", "expected an array or {start,end,points}");
            }
            for (size_t k = 0; k + 1 < s.grid.size(); ++k)
                if (s.grid[k] >= s.grid[k + 1])
                    fail(origin, "/simulation/grid", "times must be strictly increasing");
            if (!s.grid.empty() && s.grid.back() > s.horizon)
                fail(origin, "/simulation/grid", "grid extends past the horizon");
        }
        if (js.contains("init")) {
            const json& ji = js["init"];
            if (ji.is_string()) {
                if (ji.get<std::string>() != "all-infected")
                    fail(origin, "/simulation/init",
                         "must be \"all-infected\" or an array of node ids");
                s.init_all = true;
            } else if (ji.is_array()) {
                s.init_all = false;
                for (size_t k = 0; k < ji.size(); ++k) {
                    if (!ji[k].is_number_integer())
                        fail(origin, "/simulation/init/" + std::to_string(k),
                             "expected a node index");
                    s.infected.push_back(ji[k].get<int>());
                }
            } else {
                fail(origin, "/simulation/init",
                     "must be \"all-infected\" or an array of node ids");
            }
        }
        if (js.contains("with_q")) s.with_q = js["with_q"].get<bool>();
        if (js.contains("stop_when_healthy"))
            s.stop_when_healthy = js["stop_when_healthy"].get<bool>();
        if (js.contains("threads")) {
            s.threads = js["threads"].get<int>();
            if (s.threads < 1) fail(origin, "/simulation/threads", "must be >= 1");
        }
        cfg.simulation = s;
    }

    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string()) fail(origin, "/output_dir", "expected a string");
        cfg.output_dir = root["output_dir"].get<std::string>();
    }
    return cfg;
}

} // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text,
                                              const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(origin + ":" + std::to_string(line_of_offset(text, e.byte)) +
                           ": " + e.what());
    }
    try {
        return parse_root_json(root, origin);
    } catch (const json::exception& e) {
        throw config_error(origin + ": " + e.what());
    }
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

Graph ExperimentConfig::load_graph() const {
    auto fmt = graph.format;
    if (fmt == GraphSource::Format::Auto) {
        fmt = graph.path.size() > 5 && graph.path.substr(graph.path.size() - 5) == ".json"
                  ? GraphSource::Format::Json
                  : GraphSource::Format::EdgeList;
    }
    return fmt == GraphSource::Format::Json ? Graph::load_json(graph.path)
                                            : Graph::load_edge_list(graph.path);
}

ModelParams ExperimentConfig::materialize_params(
    const Graph& g, const std::vector<std::string>& required) const {
    auto need = [&](const char* name, const std::optional<RateSpec>& spec) {
        for (const auto& r : required)
            if (r == name && !spec)
                throw config_error(std::string("/params/") + name + ": required but missing");
    };
    need("beta", beta);
    need("delta", delta);
    need("phi", phi);
    need("psi", psi);

    size_t n = static_cast<size_t>(g.node_count());
    size_t m = static_cast<size_t>(g.edge_count());
    ModelParams p;
    p.beta = beta ? beta->resolve(n, "/params/beta") : std::vector<double>(n, 0.0);
    p.delta = delta ? delta->resolve(n, "/params/delta") : std::vector<double>(n, 0.0);
    p.phi = phi ? phi->resolve(n, "/params/phi") : std::vector<double>(n, 0.0);
    p.psi = psi ? psi->resolve(m, "/params/psi") : std::vector<double>(m, 0.0);
    p.validate(g);
    return p;
}

void ExperimentConfig::require_bounds() const {
    if (!bounds) throw config_error("/bounds: required for design commands");
}
void ExperimentConfig::require_design() const {
    if (!design) throw config_error("/design: required for design commands");
}
void ExperimentConfig::require_simulation() const {
    if (!simulation) throw config_error("/simulation: required for simulate");
}

} // namespace asis
