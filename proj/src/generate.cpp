#include "asis/generate.hpp"

#include <algorithm>
#include <stdexcept>

namespace asis {

Graph make_path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph::from_edges(n, e);
}

Graph make_cycle(int n) {
    if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
    auto e = make_path(n).edges();
    e.emplace_back(0, n - 1);
    return Graph::from_edges(n, e);
}

Graph make_complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph::from_edges(n, e);
}

Graph make_erdos_renyi(int n, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0,1]");
    Rng rng(seed);
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < p) e.emplace_back(i, j);
    if (e.empty()) e.emplace_back(0, n > 1 ? 1 : 0);  // from_edges rejects empty graphs
    return Graph::from_edges(n, e);
}

Graph make_connected_erdos_renyi(int n, double p, std::uint64_t seed, int max_tries) {
    for (int t = 0; t < max_tries; ++t) {
        Graph g = make_erdos_renyi(n, p, derive_seed(seed, static_cast<std::uint64_t>(t)));
        if (g.connected()) return g;
    }
    throw convergence_error("no connected G(n,p) sample within max_tries; raise p");
}

Graph make_preferential_attachment(int n, int attach, std::uint64_t seed) {
    if (attach < 1) throw std::invalid_argument("attach must be >= 1");
    if (n < attach + 2) throw std::invalid_argument("n too small for attach");
    Rng rng(seed);
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degree(n, 0);
    std::vector<int> endpoint_pool;  // one entry per edge endpoint, for degree-weighted draws
    int m0 = attach + 1;
    for (int i = 0; i < m0; ++i)
        for (int j = i + 1; j < m0; ++j) {
            edges.emplace_back(i, j);
            ++degree[i];
            ++degree[j];
            endpoint_pool.push_back(i);
            endpoint_pool.push_back(j);
        }
    std::vector<int> targets;
    for (int v = m0; v < n; ++v) {
        targets.clear();
        while (static_cast<int>(targets.size()) < attach) {
            int t = endpoint_pool[rng.below(endpoint_pool.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
        for (int t : targets) {
            edges.emplace_back(t, v);
            ++degree[t];
            ++degree[v];
            endpoint_pool.push_back(t);
            endpoint_pool.push_back(v);
        }
    }
    return Graph::from_edges(n, edges);
}

} // namespace asis
