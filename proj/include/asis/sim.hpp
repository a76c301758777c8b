// sim.hpp -- exact Gillespie simulation of the adaptive SIS process and
// Monte Carlo estimation of infection probabilities.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asis/graph.hpp"
#include "asis/params.hpp"
#include "asis/rng.hpp"

namespace asis {

struct simulation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// x_i in {0,1}; a_e per unordered initial edge in Graph::edges() order
// (edges absent at t=0 never appear, so only initial edges carry a bit).
struct NetworkState {
    std::vector<std::uint8_t> x;
    std::vector<std::uint8_t> a;
    double t = 0.0;

    static NetworkState all_infected(const Graph& g);
    static NetworkState with_infected(const Graph& g, const std::vector<int>& infected);

    int infected_count() const;
    bool healthy() const;  // x == 0
    void validate(const Graph& g) const;
};

enum class EventKind : std::uint8_t { Infect, Recover, Cut, Rewire, Absorbed };

const char* event_kind_name(EventKind k);

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::Absorbed;
    int a = -1;  // node for Infect/Recover, first endpoint for edge events
    int b = -1;  // second endpoint for edge events, -1 otherwise
};

struct Trajectory {
    std::vector<Event> events;
    std::vector<double> grid;            // snapshot times actually used
    std::vector<NetworkState> samples;   // one per grid entry
    bool absorbed = false;
    double final_time = 0.0;

    std::string events_csv(const Graph& g) const;  // t,kind,node_or_edge
};

struct SimOptions {
    std::vector<double> grid;        // snapshot times (increasing, within horizon)
    bool record_events = true;
    bool stop_when_healthy = false;  // keep playing edge events by default
    std::uint64_t max_events = 200'000'000;
};

// Incremental-rate Gillespie stepper. Class totals (recovery, infection,
// cut, rewire) are maintained through O(degree) updates per event and
// refreshed exactly every few thousand events to stop float drift.
class GillespieStepper {
  public:
    GillespieStepper(const Graph& g, const ModelParams& params, NetworkState state);

    // Applies one event; returns it. kind == Absorbed (with state
    // unchanged) when every clock has rate zero.
    Event step(Rng& rng);

    // Two-phase form so callers can snapshot the pre-event state: propose()
    // draws the holding time and reports the tentative event time (false
    // when absorbed); apply() then selects and applies the transition.
    bool propose(Rng& rng, double* t_next);
    Event apply(Rng& rng);

    const NetworkState& state() const { return state_; }
    double total_rate() const { return rate_recover_ + rate_infect_ + rate_cut_ + rate_rewire_; }
    double recover_rate() const { return rate_recover_; }
    double infect_rate() const { return rate_infect_; }
    double cut_rate() const { return rate_cut_; }
    double rewire_rate() const { return rate_rewire_; }
    void refresh_rates();  // recompute class totals from scratch

  private:
    const Graph& g_;
    const ModelParams& params_;
    NetworkState state_;
    std::vector<int> inf_live_;  // infected neighbors across live edges
    double rate_recover_ = 0.0, rate_infect_ = 0.0, rate_cut_ = 0.0, rate_rewire_ = 0.0;
    int n_infected_ = 0;
    int n_absent_ = 0;
    std::uint64_t events_since_refresh_ = 0;
    bool pending_ = false;
    double pending_t_ = 0.0;

    double edge_cut_rate(int e) const;
    void apply_infect(int i);
    void apply_recover(int i);
    void apply_cut(int e);
    void apply_rewire(int e);
};

Trajectory simulate(const Graph& g, const ModelParams& params, const NetworkState& init,
                    double horizon, std::uint64_t seed, const SimOptions& opts = {});

struct EnsembleEstimate {
    std::vector<double> grid;
    int n = 0;
    int pairs = 0;  // 2m ordered pairs when q requested, else 0
    std::uint64_t runs = 0;
    // counts[k][i] = number of runs with x_i = 1 at grid[k]; q likewise for
    // a_ij x_i per EdgeIndexMap pair.
    std::vector<std::vector<std::uint32_t>> count_p;
    std::vector<std::vector<std::uint32_t>> count_q;
    std::uint64_t absorbed_runs = 0;  // healthy at the horizon

    double p_hat(int k, int i) const { return double(count_p[k][i]) / double(runs); }
    double q_hat(int k, int idx) const { return double(count_q[k][idx]) / double(runs); }
    // Normal-approximation half width at confidence z (1.96 = 95%).
    double p_half_width(int k, int i, double z = 1.96) const;
    double q_half_width(int k, int idx, double z = 1.96) const;
    double mean_prevalence(int k) const;

    std::string csv(const Graph& g, bool with_q = false) const;  // t,p_1..p_n[,q_...]
};

struct EnsembleOptions {
    bool with_q = false;
    int threads = 1;
};

EnsembleEstimate estimate_probabilities(const Graph& g, const ModelParams& params,
                                        const NetworkState& init, double horizon,
                                        const std::vector<double>& grid, std::uint64_t runs,
                                        std::uint64_t seed, const EnsembleOptions& opts = {});

} // namespace asis
