#include "asis/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace asis {
namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

constexpr std::uint64_t kRefreshPeriod = 8192;

} // namespace

NetworkState NetworkState::all_infected(const Graph& g) {
    NetworkState s;
    s.x.assign(g.node_count(), 1);
    s.a.assign(g.edge_count(), 1);
    return s;
}

NetworkState NetworkState::with_infected(const Graph& g, const std::vector<int>& infected) {
    NetworkState s;
    s.x.assign(g.node_count(), 0);
    s.a.assign(g.edge_count(), 1);
    for (int i : infected) {
        if (i < 0 || i >= g.node_count())
            throw simulation_error("infected node index out of range");
        s.x[i] = 1;
    }
    return s;
}

int NetworkState::infected_count() const {
    int c = 0;
    for (auto b : x) c += b;
    return c;
}

bool NetworkState::healthy() const { return infected_count() == 0; }

void NetworkState::validate(const Graph& g) const {
    if (static_cast<int>(x.size()) != g.node_count())
        throw simulation_error("state x size does not match the graph");
    if (static_cast<int>(a.size()) != g.edge_count())
        throw simulation_error("state a size does not match the graph");
    for (auto b : x)
        if (b > 1) throw simulation_error("state x entries must be 0 or 1");
    for (auto b : a)
        if (b > 1) throw simulation_error("state a entries must be 0 or 1");
    if (!(t >= 0.0) || !std::isfinite(t)) throw simulation_error("state time must be finite");
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Infect: return "infect";
        case EventKind::Recover: return "recover";
        case EventKind::Cut: return "cut";
        case EventKind::Rewire: return "rewire";
        case EventKind::Absorbed: return "absorbed";
    }
    return "?";
}

GillespieStepper::GillespieStepper(const Graph& g, const ModelParams& params, NetworkState state)
    : g_(g), params_(params), state_(std::move(state)) {
    params_.validate(g_);
    state_.validate(g_);
    inf_live_.assign(g_.node_count(), 0);
    refresh_rates();
}

double GillespieStepper::edge_cut_rate(int e) const {
    auto [i, j] = g_.edges()[e];
    return params_.phi[i] * state_.x[i] + params_.phi[j] * state_.x[j];
}

void GillespieStepper::refresh_rates() {
    const int n = g_.node_count();
    const int m = g_.edge_count();
    rate_recover_ = rate_infect_ = rate_cut_ = rate_rewire_ = 0.0;
    n_infected_ = 0;
    n_absent_ = 0;
    for (int i = 0; i < n; ++i) {
        int live = 0;
        for (int k : g_.neighbors(i))
            if (state_.a[g_.edge_id(i, k)] && state_.x[k]) ++live;
        inf_live_[i] = live;
    }
    for (int i = 0; i < n; ++i) {
        if (state_.x[i]) {
            rate_recover_ += params_.delta[i];
            ++n_infected_;
        } else {
            rate_infect_ += params_.beta[i] * inf_live_[i];
        }
    }
    for (int e = 0; e < m; ++e) {
        if (state_.a[e]) {
            rate_cut_ += edge_cut_rate(e);
        } else {
            rate_rewire_ += params_.psi[e];
            ++n_absent_;
        }
    }
    events_since_refresh_ = 0;
}

void GillespieStepper::apply_infect(int i) {
    state_.x[i] = 1;
    ++n_infected_;
    rate_infect_ -= params_.beta[i] * inf_live_[i];
    rate_recover_ += params_.delta[i];
    for (int k : g_.neighbors(i)) {
        if (!state_.a[g_.edge_id(i, k)]) continue;
        ++inf_live_[k];
        if (!state_.x[k]) rate_infect_ += params_.beta[k];
        rate_cut_ += params_.phi[i];
    }
}

void GillespieStepper::apply_recover(int i) {
    state_.x[i] = 0;
    --n_infected_;
    rate_recover_ -= params_.delta[i];
    for (int k : g_.neighbors(i)) {
        if (!state_.a[g_.edge_id(i, k)]) continue;
        --inf_live_[k];
        if (!state_.x[k]) rate_infect_ -= params_.beta[k];
        rate_cut_ -= params_.phi[i];
    }
    rate_infect_ += params_.beta[i] * inf_live_[i];
    if (n_infected_ == 0) {
        // Everything tied to infection is exactly dead now; kill drift.
        rate_recover_ = rate_infect_ = rate_cut_ = 0.0;
    }
}

void GillespieStepper::apply_cut(int e) {
    auto [i, j] = g_.edges()[e];
    rate_cut_ -= edge_cut_rate(e);
    state_.a[e] = 0;
    ++n_absent_;
    rate_rewire_ += params_.psi[e];
    if (state_.x[i]) {
        --inf_live_[j];
        if (!state_.x[j]) rate_infect_ -= params_.beta[j];
    }
    if (state_.x[j]) {
        --inf_live_[i];
        if (!state_.x[i]) rate_infect_ -= params_.beta[i];
    }
}

void GillespieStepper::apply_rewire(int e) {
    auto [i, j] = g_.edges()[e];
    state_.a[e] = 1;
    --n_absent_;
    rate_rewire_ -= params_.psi[e];
    if (n_absent_ == 0) rate_rewire_ = 0.0;
    rate_cut_ += edge_cut_rate(e);
    if (state_.x[i]) {
        ++inf_live_[j];
        if (!state_.x[j]) rate_infect_ += params_.beta[j];
    }
    if (state_.x[j]) {
        ++inf_live_[i];
        if (!state_.x[i]) rate_infect_ += params_.beta[i];
    }
}

bool GillespieStepper::propose(Rng& rng, double* t_next) {
    if (events_since_refresh_ >= kRefreshPeriod) refresh_rates();
    double total = total_rate();
    if (!(total > 0.0)) return false;
    pending_ = true;
    pending_t_ = state_.t + rng.exponential(total);
    if (t_next) *t_next = pending_t_;
    return true;
}

Event GillespieStepper::apply(Rng& rng) {
    if (!pending_) throw simulation_error("apply() without a pending propose()");
    pending_ = false;
    ++events_since_refresh_;

    for (int round = 0; round < 2; ++round) {
        double total = total_rate();
        if (!(total > 0.0)) break;
        double target = rng.uniform01() * total;

        if (target < rate_recover_) {
            // infected node by cumulative delta
            int last = -1;
            double acc = 0.0;
            for (int i = 0; i < g_.node_count(); ++i) {
                if (!state_.x[i] || params_.delta[i] <= 0.0) continue;
                last = i;
                acc += params_.delta[i];
                if (acc >= target) break;
            }
            if (last >= 0) {
                double t = pending_t_;
                apply_recover(last);
                state_.t = t;
                return {t, EventKind::Recover, last, -1};
            }
        } else if ((target -= rate_recover_), target < rate_infect_) {
            int last = -1;
            double acc = 0.0;
            for (int i = 0; i < g_.node_count(); ++i) {
                if (state_.x[i] || inf_live_[i] == 0 || params_.beta[i] <= 0.0) continue;
                last = i;
                acc += params_.beta[i] * inf_live_[i];
                if (acc >= target) break;
            }
            if (last >= 0) {
                double t = pending_t_;
                apply_infect(last);
                state_.t = t;
                return {t, EventKind::Infect, last, -1};
            }
        } else if ((target -= rate_infect_), target < rate_cut_) {
            int last = -1;
            double acc = 0.0;
            for (int e = 0; e < g_.edge_count(); ++e) {
                if (!state_.a[e]) continue;
                double r = edge_cut_rate(e);
                if (r <= 0.0) continue;
                last = e;
                acc += r;
                if (acc >= target) break;
            }
            if (last >= 0) {
                double t = pending_t_;
                auto [i, j] = g_.edges()[last];
                apply_cut(last);
                state_.t = t;
                return {t, EventKind::Cut, i, j};
            }
        } else {
            target -= rate_cut_;
            int last = -1;
            double acc = 0.0;
            for (int e = 0; e < g_.edge_count(); ++e) {
                if (state_.a[e] || params_.psi[e] <= 0.0) continue;
                last = e;
                acc += params_.psi[e];
                if (acc >= target) break;
            }
            if (last >= 0) {
                double t = pending_t_;
                auto [i, j] = g_.edges()[last];
                apply_rewire(last);
                state_.t = t;
                return {t, EventKind::Rewire, i, j};
            }
        }
        // A class was selected through accumulated float drift but holds no
        // live clock; rebuild the exact totals and draw again.
        refresh_rates();
    }
    return {state_.t, EventKind::Absorbed, -1, -1};
}

Event GillespieStepper::step(Rng& rng) {
    double t_next = 0.0;
    if (!propose(rng, &t_next)) return {state_.t, EventKind::Absorbed, -1, -1};
    return apply(rng);
}

Trajectory simulate(const Graph& g, const ModelParams& params, const NetworkState& init,
                    double horizon, std::uint64_t seed, const SimOptions& opts) {
    if (!(horizon > init.t)) throw simulation_error("horizon must exceed the initial time");
    for (size_t k = 0; k < opts.grid.size(); ++k) {
        if (opts.grid[k] < init.t || opts.grid[k] > horizon)
            throw simulation_error("grid times must lie in [t0, horizon]");
        if (k > 0 && opts.grid[k] <= opts.grid[k - 1])
            throw simulation_error("grid times must be strictly increasing");
    }

    Trajectory traj;
    traj.grid = opts.grid;
    GillespieStepper stepper(g, params, init);
    Rng rng(seed);
    size_t cursor = 0;
    std::uint64_t n_events = 0;

    auto flush_until = [&](double t_limit) {
        while (cursor < traj.grid.size() && traj.grid[cursor] < t_limit) {
            NetworkState snap = stepper.state();
            snap.t = traj.grid[cursor];
            traj.samples.push_back(std::move(snap));
            ++cursor;
        }
    };

    for (;;) {
        if (opts.stop_when_healthy && stepper.state().healthy()) {
            traj.absorbed = true;
            break;
        }
        double t_next = 0.0;
        if (!stepper.propose(rng, &t_next)) {
            traj.absorbed = true;
            break;
        }
        if (t_next > horizon) {
            flush_until(horizon + 0.0);
            break;
        }
        flush_until(t_next);
        Event ev = stepper.apply(rng);
        if (ev.kind == EventKind::Absorbed) {
            traj.absorbed = true;
            break;
        }
        if (opts.record_events) traj.events.push_back(ev);
        if (++n_events >= opts.max_events) throw simulation_error("event budget exhausted");
    }
    // Whatever stopped the loop, the current state holds through horizon.
    flush_until(std::nextafter(horizon, horizon + 1.0));
    traj.final_time = horizon;
    return traj;
}

std::string Trajectory::events_csv(const Graph& g) const {
    std::string s = "t,kind,node_or_edge\n";
    for (const auto& ev : events) {
        s += fmt(ev.t);
        s += ',';
        s += event_kind_name(ev.kind);
        s += ',';
        if (ev.b < 0) {
            s += std::to_string(g.original_label(ev.a));
        } else {
            s += std::to_string(g.original_label(ev.a)) + "-" +
                 std::to_string(g.original_label(ev.b));
        }
        s += '\n';
    }
    return s;
}

double EnsembleEstimate::p_half_width(int k, int i, double z) const {
    double p = p_hat(k, i);
    return z * std::sqrt(p * (1.0 - p) / double(runs));
}

double EnsembleEstimate::q_half_width(int k, int idx, double z) const {
    double q = q_hat(k, idx);
    return z * std::sqrt(q * (1.0 - q) / double(runs));
}

double EnsembleEstimate::mean_prevalence(int k) const {
    double s = 0.0;
    for (auto c : count_p[k]) s += c;
    return s / (double(runs) * double(n));
}

std::string EnsembleEstimate::csv(const Graph& g, bool with_q) const {
    std::string s = "t";
    for (int i = 0; i < n; ++i) s += ",p_" + std::to_string(g.original_label(i));
    if (with_q && pairs > 0) {
        EdgeIndexMap map(g);
        for (int idx = 0; idx < pairs; ++idx) {
            auto [i, j] = map.pair_at(idx);
            s += ",q_" + std::to_string(g.original_label(i)) + "_" +
                 std::to_string(g.original_label(j));
        }
    }
    s += '\n';
    for (size_t k = 0; k < grid.size(); ++k) {
        s += fmt(grid[k]);
        for (int i = 0; i < n; ++i) s += "," + fmt(p_hat(static_cast<int>(k), i));
        if (with_q && pairs > 0)
            for (int idx = 0; idx < pairs; ++idx)
                s += "," + fmt(q_hat(static_cast<int>(k), idx));
        s += '\n';
    }
    return s;
}

namespace {

void run_ensemble_block(const Graph& g, const ModelParams& params, const NetworkState& init,
                        double horizon, const std::vector<double>& grid, std::uint64_t run_lo,
                        std::uint64_t run_hi, std::uint64_t seed, bool with_q,
                        const EdgeIndexMap* map, std::vector<std::vector<std::uint32_t>>& count_p,
                        std::vector<std::vector<std::uint32_t>>& count_q,
                        std::uint64_t& absorbed) {
    const int n = g.node_count();
    for (std::uint64_t run = run_lo; run < run_hi; ++run) {
        GillespieStepper stepper(g, params, init);
        Rng rng(derive_seed(seed, run));
        size_t cursor = 0;

        auto record_until = [&](double t_limit) {
            const auto& st = stepper.state();
            while (cursor < grid.size() && grid[cursor] < t_limit) {
                auto& cp = count_p[cursor];
                for (int i = 0; i < n; ++i) cp[i] += st.x[i];
                if (with_q) {
                    auto& cq = count_q[cursor];
                    for (int idx = 0; idx < map->pair_count(); ++idx) {
                        auto [i, j] = map->pair_at(idx);
                        cq[idx] += st.x[i] && st.a[map->edge_id_at(idx)];
                    }
                }
                ++cursor;
            }
        };

        for (;;) {
            // Once healthy, p and q stay identically zero whatever the edge
            // clocks do later, so the run can stop early without bias.
            if (stepper.state().healthy()) break;
            double t_next = 0.0;
            if (!stepper.propose(rng, &t_next)) break;
            if (t_next > horizon) {
                record_until(std::nextafter(horizon, 2.0 * horizon + 1.0));
                break;
            }
            record_until(t_next);
            if (stepper.apply(rng).kind == EventKind::Absorbed) break;
        }
        if (stepper.state().healthy()) {
            ++absorbed;
            // remaining grid points contribute zero counts
            cursor = grid.size();
        }
        record_until(std::nextafter(horizon, 2.0 * horizon + 1.0));
    }
}

} // namespace

EnsembleEstimate estimate_probabilities(const Graph& g, const ModelParams& params,
                                        const NetworkState& init, double horizon,
                                        const std::vector<double>& grid, std::uint64_t runs,
                                        std::uint64_t seed, const EnsembleOptions& opts) {
    if (runs < 1) throw simulation_error("need at least one run");
    if (runs > 0xFFFFFFFFull) throw simulation_error("run count exceeds the counter width");
    if (!(horizon > init.t)) throw simulation_error("horizon must exceed the initial time");
    for (size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < init.t || grid[k] > horizon)
            throw simulation_error("grid times must lie in [t0, horizon]");
        if (k > 0 && grid[k] <= grid[k - 1])
            throw simulation_error("grid times must be strictly increasing");
    }
    init.validate(g);

    EnsembleEstimate est;
    est.grid = grid;
    est.n = g.node_count();
    est.runs = runs;
    EdgeIndexMap map(g);
    est.pairs = opts.with_q ? map.pair_count() : 0;
    est.count_p.assign(grid.size(), std::vector<std::uint32_t>(est.n, 0));
    est.count_q.assign(grid.size(), std::vector<std::uint32_t>(est.pairs, 0));

    int threads = std::max(1, opts.threads);
    if (threads == 1 || runs < 2 * static_cast<std::uint64_t>(threads)) {
        run_ensemble_block(g, params, init, horizon, grid, 0, runs, seed, opts.with_q, &map,
                           est.count_p, est.count_q, est.absorbed_runs);
        return est;
    }

    struct Block {
        std::vector<std::vector<std::uint32_t>> cp, cq;
        std::uint64_t absorbed = 0;
    };
    std::vector<Block> blocks(threads);
    std::vector<std::thread> pool;
    std::uint64_t chunk = (runs + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        blocks[w].cp.assign(grid.size(), std::vector<std::uint32_t>(est.n, 0));
        blocks[w].cq.assign(grid.size(), std::vector<std::uint32_t>(est.pairs, 0));
        std::uint64_t lo = w * chunk, hi = std::min<std::uint64_t>(runs, lo + chunk);
        if (lo >= hi) continue;
        pool.emplace_back([&, w, lo, hi]() {
            run_ensemble_block(g, params, init, horizon, grid, lo, hi, seed, opts.with_q, &map,
                               blocks[w].cp, blocks[w].cq, blocks[w].absorbed);
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& b : blocks) {
        est.absorbed_runs += b.absorbed;
        for (size_t k = 0; k < grid.size(); ++k) {
            for (int i = 0; i < est.n; ++i) est.count_p[k][i] += b.cp[k][i];
            for (int idx = 0; idx < est.pairs; ++idx) est.count_q[k][idx] += b.cq[k][idx];
        }
    }
    return est;
}

} // namespace asis
