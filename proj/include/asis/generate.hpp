// generate.hpp -- graph families for tests and the gen-graph command.
#pragma once

#include "asis/graph.hpp"
#include "asis/rng.hpp"

namespace asis {

Graph make_path(int n);
Graph make_cycle(int n);
Graph make_complete(int n);

// Erdos-Renyi G(n, p). Deterministic given the seed.
Graph make_erdos_renyi(int n, double p, std::uint64_t seed);

// Erdos-Renyi resampled until connected (throws after max_tries).
Graph make_connected_erdos_renyi(int n, double p, std::uint64_t seed, int max_tries = 200);

// Preferential attachment: seed clique of (attach+1) nodes, then each new
// node links to `attach` distinct existing nodes picked proportionally to
// degree. Always connected; produces the hub-heavy degree sequences the
// heterogeneous designer is aimed at.
Graph make_preferential_attachment(int n, int attach, std::uint64_t seed);

} // namespace asis
