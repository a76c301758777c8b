#include "asis/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace asis {

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 0)
        throw graph_parse_error("graph must have at least one node");
    Graph g;
    g.n_ = n;
    g.edges_.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw graph_parse_error("edge endpoint out of range: (" + std::to_string(a) +
                                    "," + std::to_string(b) + ")");
        if (a == b)
            throw self_loop_error("self-loop at node " + std::to_string(a));
        if (a > b) std::swap(a, b);
        g.edges_.emplace_back(a, b);
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end());
    if (dup != g.edges_.end())
        throw duplicate_edge_error("duplicate edge (" + std::to_string(dup->first) + "," +
                                   std::to_string(dup->second) + ")");

    g.adj_offset_.assign(n + 1, 0);
    for (auto [a, b] : g.edges_) {
        ++g.adj_offset_[a + 1];
        ++g.adj_offset_[b + 1];
    }
    for (int i = 0; i < n; ++i) g.adj_offset_[i + 1] += g.adj_offset_[i];
    g.adj_.resize(2 * g.edges_.size());
    g.edge_of_pair_.resize(2 * g.edges_.size());
    std::vector<int> cursor(g.adj_offset_.begin(), g.adj_offset_.end() - 1);
    for (int e = 0; e < static_cast<int>(g.edges_.size()); ++e) {
        auto [a, b] = g.edges_[e];
        g.adj_[cursor[a]] = b;
        g.edge_of_pair_[cursor[a]++] = e;
        g.adj_[cursor[b]] = a;
        g.edge_of_pair_[cursor[b]++] = e;
    }
    // Edges were inserted in sorted order, so each neighbor list is sorted.
    g.labels_.resize(n);
    for (int i = 0; i < n; ++i) g.labels_[i] = i;
    return g;
}

Graph Graph::parse_edge_list(std::string_view text) {
    std::vector<std::pair<std::int64_t, std::int64_t>> raw;
    std::string line;
    std::istringstream in{std::string(text)};
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::int64_t a, b;
        if (!(ls >> a)) continue;  // blank or comment-only line
        if (!(ls >> b))
            throw graph_parse_error("line " + std::to_string(lineno) +
                                    ": expected two integers");
        std::string extra;
        if (ls >> extra)
            throw graph_parse_error("line " + std::to_string(lineno) +
                                    ": trailing token '" + extra + "'");
        if (a == b)
            throw self_loop_error("line " + std::to_string(lineno) + ": self-loop at node " +
                                  std::to_string(a));
        raw.emplace_back(a, b);
    }
    if (raw.empty())
        throw graph_parse_error("no edges found");

    std::map<std::int64_t, int> id;
    for (auto [a, b] : raw) {
        id.emplace(a, 0);
        id.emplace(b, 0);
    }
    int next = 0;
    for (auto& [label, idx] : id) idx = next++;

    std::vector<std::pair<int, int>> edges;
    edges.reserve(raw.size());
    for (auto [a, b] : raw) edges.emplace_back(id[a], id[b]);
    Graph g = from_edges(next, edges);
    for (auto& [label, idx] : id) g.labels_[idx] = label;
    return g;
}

Graph Graph::load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw graph_parse_error("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_edge_list(buf.str());
}

Graph Graph::parse_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw graph_parse_error(std::string("graph JSON parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
        throw graph_parse_error("graph JSON must be an object with fields 'n' and 'edges'");
    int n = j.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw graph_parse_error("graph JSON edge entries must be [i,j] pairs");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return from_edges(n, edges);
}

Graph Graph::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw graph_parse_error("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str());
}

bool Graph::has_edge(int i, int j) const {
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

int Graph::edge_id(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(i, j));
    if (it == edges_.end() || *it != std::make_pair(i, j)) return -1;
    return static_cast<int>(it - edges_.begin());
}

bool Graph::connected() const {
    if (n_ == 0) return false;
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == n_;
}

EdgeIndexMap::EdgeIndexMap(const Graph& g) : g_(&g) {
    int n = g.node_count();
    offset_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) offset_[i + 1] = offset_[i] + g.degree(i);
    pairs_.reserve(offset_[n]);
    pair_edge_.reserve(offset_[n]);
    for (int i = 0; i < n; ++i) {
        auto nb = g.neighbors(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            pairs_.emplace_back(i, nb[k]);
            pair_edge_.push_back(g.edge_of_pair_[g.adj_offset_[i] + static_cast<int>(k)]);
        }
    }
}

int EdgeIndexMap::index_of(int i, int j) const {
    auto nb = g_->neighbors(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j)
        throw std::out_of_range("ordered pair (" + std::to_string(i) + "," +
                                std::to_string(j) + ") is not an initial edge");
    return offset_[i] + static_cast<int>(it - nb.begin());
}

SpectralResult spectral_radius(const Graph& g, double tol, int max_iter) {
    if (!g.connected())
        throw disconnected_error("spectral_radius requires a connected graph");
    int n = g.node_count();
    std::vector<double> v(n, 1.0), w(n);
    double lower = 0.0, upper = 0.0;
    int it = 0;
    for (it = 1; it <= max_iter; ++it) {
        // w = (A + I) v; the +I shift makes the matrix primitive so the
        // Collatz-Wielandt bracket closes even on bipartite graphs.
        for (int i = 0; i < n; ++i) {
            double s = v[i];
            for (int k : g.neighbors(i)) s += v[k];
            w[i] = s;
        }
        lower = w[0] / v[0];
        upper = lower;
        for (int i = 1; i < n; ++i) {
            double r = w[i] / v[i];
            lower = std::min(lower, r);
            upper = std::max(upper, r);
        }
        double vmax = 0.0;
        for (double x : w) vmax = std::max(vmax, x);
        for (int i = 0; i < n; ++i) v[i] = w[i] / vmax;
        if (upper - lower <= tol * std::max(1.0, std::abs(upper))) break;
    }
    if (upper - lower > tol * std::max(1.0, std::abs(upper)))
        throw convergence_error("spectral_radius: power iteration did not converge in " +
                                std::to_string(max_iter) + " iterations");
    SpectralResult res;
    res.rho = 0.5 * (upper + lower) - 1.0;  // undo the +I shift
    res.v = std::move(v);
    res.iterations = it;
    return res;
}

} // namespace asis
