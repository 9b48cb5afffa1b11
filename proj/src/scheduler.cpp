#include "firesat/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace firesat::sched {

namespace {

constexpr double kEps = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Resource lattice: every data (battery) quantity must be an integer multiple
// of a shared quantum so level arithmetic is exact.

struct Lattice {
    double min_value = 0.0;
    double quantum = 1.0;
    long levels = 1;

    long to_level(double v, const char* what) const {
        double raw = (v - min_value) / quantum;
        long lvl = std::lround(raw);
        if (std::fabs(raw - lvl) > 1e-6 || lvl < 0 || lvl >= levels)
            throw std::runtime_error(std::string("resource lattice: ") + what +
                                     " is off-lattice; use a coarser quantum");
        return lvl;
    }
    double to_value(long lvl) const { return min_value + lvl * quantum; }
};

long delta_levels(double v, double quantum, const char* what) {
    double raw = v / quantum;
    long lvl = std::lround(raw);
    if (std::fabs(raw - lvl) > 1e-6)
        throw std::runtime_error(std::string("resource lattice: ") + what +
                                 " is off-lattice; use a coarser quantum");
    return lvl;
}

double value_gcd(const std::vector<double>& values, const char* family) {
    // gcd at 1e-6 resolution; values must be exact to that scale.
    long long g = 0;
    for (double v : values) {
        if (v == 0.0) continue;
        double scaled = v * 1e6;
        long long n = std::llround(scaled);
        if (n <= 0 || std::fabs(scaled - n) > 1e-3)
            throw std::runtime_error(std::string("resource lattice: ") + family +
                                     " values share no common quantum; use a "
                                     "coarser quantum");
        g = g == 0 ? n : std::gcd(g, n);
    }
    return g == 0 ? 1.0 : static_cast<double>(g) / 1e6;
}

Lattice build_lattice(const std::vector<double>& deltas, double min_value,
                      double max_value, const char* family) {
    std::vector<double> all = deltas;
    all.push_back(max_value - min_value);
    double q = value_gcd(all, family);
    long span = delta_levels(max_value - min_value, q, family);
    return Lattice{min_value, q, span + 1};
}

// ---------------------------------------------------------------------------
// Per-satellite solver context.

struct SatContext {
    const ScheduleInstance* inst = nullptr;
    int k = 0;
    int S = 0, Ts = 0, T = 0;
    int G = 0, P = 0, A = 0;
    Lattice data, batt;
    long obs_d = 0, comm_d = 0;
    long ch_b = 0, obs_b = 0, comm_b = 0, recon_b = 0, time_b = 0;
    long d_levels = 0, b_levels = 0, nstates = 0;
    long init_d = 0, init_b = 0;   // levels at step 1 (recon already deducted)
    double C = 0.0;

    int stage_of(int t) const { return (t - 1) / Ts + 1; }
    int local_of(int t) const { return (t - 1) % Ts; }   // 0-based tensor index

    bool vis_v(int s, int tau, int j, int p) const {
        return inst->tensors.v(s, k).get(tau, j, p);
    }
    bool vis_u(int s, int tau, int j, int p) const {
        return inst->tensors.u(s, k).get(tau, j, p);
    }
    bool vis_w(int s, int tau, int j, int g) const {
        return inst->tensors.w(s, k).get(tau, j, g);
    }
    bool vis_h(int s, int tau, int j) const {
        return inst->tensors.h(s, k).get(tau, j, 0);
    }
};

SatContext make_context(const ScheduleInstance& inst, int k,
                        const SolveOptions& options) {
    const ResourceParams& r = inst.resources;
    SatContext ctx;
    ctx.inst = &inst;
    ctx.k = k;
    ctx.S = inst.horizon.num_stages;
    ctx.Ts = inst.horizon.steps_per_stage;
    ctx.T = inst.horizon.num_steps;
    ctx.G = inst.num_stations();
    ctx.P = inst.num_priority();
    ctx.A = inst.num_auxiliary();
    ctx.C = inst.downlink_weight;

    const SatelliteData& sat = inst.satellites[k];
    ctx.data = build_lattice({r.data_obs_mb, r.data_comm_mb,
                              sat.initial_data_mb - r.data_min_mb},
                             r.data_min_mb, r.data_max_mb, "data");
    ctx.batt = build_lattice({r.batt_charge_kj, r.batt_obs_kj, r.batt_comm_kj,
                              r.batt_recon_kj, r.batt_time_kj,
                              sat.initial_battery_kj - r.batt_min_kj},
                             r.batt_min_kj, r.batt_max_kj, "battery");
    ctx.obs_d = delta_levels(r.data_obs_mb, ctx.data.quantum, "data_obs");
    ctx.comm_d = delta_levels(r.data_comm_mb, ctx.data.quantum, "data_comm");
    ctx.ch_b = delta_levels(r.batt_charge_kj, ctx.batt.quantum, "batt_charge");
    ctx.obs_b = delta_levels(r.batt_obs_kj, ctx.batt.quantum, "batt_obs");
    ctx.comm_b = delta_levels(r.batt_comm_kj, ctx.batt.quantum, "batt_comm");
    ctx.recon_b = delta_levels(r.batt_recon_kj, ctx.batt.quantum, "batt_recon");
    ctx.time_b = delta_levels(r.batt_time_kj, ctx.batt.quantum, "batt_time");
    ctx.d_levels = ctx.data.levels;
    ctx.b_levels = ctx.batt.levels;
    ctx.nstates = ctx.d_levels * ctx.b_levels;
    if (ctx.nstates > options.max_lattice_states)
        throw std::runtime_error(
            "resource lattice exceeds the configured state cap; use a coarser "
            "quantum");

    ctx.init_d = ctx.data.to_level(sat.initial_data_mb, "initial data");
    long b0 = ctx.batt.to_level(sat.initial_battery_kj, "initial battery");
    ctx.init_b = b0 - ctx.recon_b;   // thruster positioning before stage 1
    return ctx;
}

// Actions: 0 idle, 1 charge, 2..2+G-1 downlink, 2+G..2+G+P-1 observe.
constexpr int kActIdle = 0;
constexpr int kActCharge = 1;

struct Transition {
    double reward = 0.0;
    long d_next = 0;
    long b_next = 0;
};

/**
 * Applies action at (stage s, local tau, slot j) to levels (d, b); returns
 * false when the action violates any constraint. boundary marks the last
 * step of a non-final stage, where the next maneuver's battery draw applies.
 */
bool apply_action(const SatContext& ctx, int s, int tau, int j, int action,
                  long d, long b, Transition& out) {
    bool boundary = (tau == ctx.Ts - 1) && (s < ctx.S);
    long recon = boundary ? ctx.recon_b : 0;

    long spend = 0;
    double reward = 0.0;
    long d_next = d;
    if (action == kActIdle) {
        // nothing
    } else if (action == kActCharge) {
        if (!ctx.vis_h(s, tau, j)) return false;
        if (b + ctx.ch_b > ctx.b_levels - 1) return false;   // 9a
    } else if (action < 2 + ctx.G) {
        int g = action - 2;
        if (!ctx.vis_w(s, tau, j, g)) return false;
        if (d - ctx.comm_d < 0) return false;                // 7d
        spend = ctx.comm_b;
        reward = ctx.C;
        d_next = d - ctx.comm_d;
    } else {
        int p = action - 2 - ctx.G;
        if (!ctx.vis_v(s, tau, j, p)) return false;
        if (d + ctx.obs_d > ctx.d_levels - 1) return false;  // 7c
        spend = ctx.obs_b;
        reward = 1.0;
        d_next = d + ctx.obs_d;
    }

    // Battery floor (9b within stages and through the final stage, 9c at
    // reconfiguration boundaries).
    if (b - spend - recon - ctx.time_b < 0) return false;

    long b_next = b - spend - recon - ctx.time_b;
    if (action == kActCharge) b_next += ctx.ch_b;
    out = Transition{reward, d_next, b_next};
    return true;
}

/**
 * Backward dynamic program over (data, battery) levels for a fixed maneuver
 * path. Returns the value at step 1 for every state; optionally records the
 * canonical best action per (step, state) for reconstruction.
 */
std::vector<double> dp_backward(const SatContext& ctx,
                                const std::vector<int>& path,
                                std::vector<uint16_t>* choices) {
    // Canonical tie-break order: downlink, observe, charge, idle. Ties keep
    // the earliest entry, so equal-value steps still bank charge and place
    // task events as early as possible.
    std::vector<int> order;
    for (int g = 0; g < ctx.G; ++g) order.push_back(2 + g);
    for (int p = 0; p < ctx.P; ++p) order.push_back(2 + ctx.G + p);
    order.push_back(kActCharge);
    order.push_back(kActIdle);

    std::vector<double> next(ctx.nstates, 0.0), cur(ctx.nstates);
    if (choices) choices->assign(static_cast<std::size_t>(ctx.T) * ctx.nstates, 0);

    for (int t = ctx.T; t >= 1; --t) {
        int s = ctx.stage_of(t);
        int tau = ctx.local_of(t);
        int j = path[s];
        for (long d = 0; d < ctx.d_levels; ++d) {
            for (long b = 0; b < ctx.b_levels; ++b) {
                long state = d * ctx.b_levels + b;
                double best = kNegInf;
                int best_action = -1;
                Transition tr;
                for (int a : order) {
                    if (!apply_action(ctx, s, tau, j, a, d, b, tr)) continue;
                    double v = next[tr.d_next * ctx.b_levels + tr.b_next];
                    if (v == kNegInf) continue;
                    v += tr.reward;
                    if (v > best) {
                        best = v;
                        best_action = a;
                    }
                }
                cur[state] = best;
                if (choices)
                    (*choices)[static_cast<std::size_t>(t - 1) * ctx.nstates + state] =
                        best_action < 0 ? 0 : static_cast<uint16_t>(best_action);
            }
        }
        std::swap(cur, next);
    }
    return next;   // value at step 1
}

struct TaskPlan {
    std::vector<TaskEvent> events;
    std::vector<double> data_level, battery_level;
    double final_data = 0.0, final_battery = 0.0;
};

/// Forward walk of recorded DP choices from (t_start, levels).
TaskPlan reconstruct(const SatContext& ctx, const std::vector<int>& path,
                     const std::vector<uint16_t>& choices, int t_start, long d,
                     long b) {
    TaskPlan plan;
    for (int t = t_start; t <= ctx.T; ++t) {
        int s = ctx.stage_of(t);
        int tau = ctx.local_of(t);
        int j = path[s];
        plan.data_level.push_back(ctx.data.to_value(d));
        plan.battery_level.push_back(ctx.batt.to_value(b));
        long state = d * ctx.b_levels + b;
        int action = choices[static_cast<std::size_t>(t - 1) * ctx.nstates + state];
        Transition tr;
        if (!apply_action(ctx, s, tau, j, action, d, b, tr))
            throw std::logic_error("reconstruct: recorded action infeasible");
        if (action == kActCharge)
            plan.events.push_back({t, TaskKind::charge, 0});
        else if (action >= 2 && action < 2 + ctx.G)
            plan.events.push_back({t, TaskKind::downlink, action - 2});
        else if (action >= 2 + ctx.G)
            plan.events.push_back({t, TaskKind::observe, action - 2 - ctx.G});
        d = tr.d_next;
        b = tr.b_next;
    }
    plan.final_data = ctx.data.to_value(d);
    plan.final_battery = ctx.batt.to_value(b);
    return plan;
}

/**
 * Per-(stage, slot) reward ingredients for the admissible bound: counts of
 * steps with any priority-target or station visibility, plus the auxiliary
 * payout. The bound composes them with a data-awareness cap: downlinks can
 * never outrun the data that could be on board.
 */
struct StageTables {
    std::vector<std::vector<double>> obs_steps, w_steps, auxsum;   // [s-1][j]
    std::vector<double> suffix_obs, suffix_w, suffix_aux;   // best of s+1..S
    std::vector<std::vector<int>> slot_order;   // children sorted, greedy first
};

double compose_bound(const SatContext& ctx, double obs, double w, double aux) {
    const ResourceParams& r = ctx.inst->resources;
    double downlinks = w;
    if (r.data_comm_mb > 0.0) {
        double spendable = ctx.inst->satellites[ctx.k].initial_data_mb -
                           r.data_min_mb + obs * r.data_obs_mb;
        downlinks = std::min(w, spendable / r.data_comm_mb);
    }
    return obs + ctx.C * downlinks + aux;
}

StageTables make_stage_tables(const SatContext& ctx) {
    StageTables tables;
    tables.obs_steps.resize(ctx.S);
    tables.w_steps.resize(ctx.S);
    tables.auxsum.resize(ctx.S);
    const auto& weights = ctx.inst->auxiliary_weights;
    for (int s = 1; s <= ctx.S; ++s) {
        int J = ctx.inst->satellites[ctx.k].slot_counts[s];
        tables.obs_steps[s - 1].assign(J, 0.0);
        tables.w_steps[s - 1].assign(J, 0.0);
        tables.auxsum[s - 1].assign(J, 0.0);
        for (int j = 0; j < J; ++j) {
            double obs = 0.0, w = 0.0, aux = 0.0;
            for (int tau = 0; tau < ctx.Ts; ++tau) {
                bool any_w = false, any_v = false;
                for (int g = 0; g < ctx.G && !any_w; ++g)
                    any_w = ctx.vis_w(s, tau, j, g);
                for (int p = 0; p < ctx.P && !any_v; ++p)
                    any_v = ctx.vis_v(s, tau, j, p);
                if (any_v) obs += 1.0;
                if (any_w) w += 1.0;
                for (int p = 0; p < ctx.A; ++p)
                    if (ctx.vis_u(s, tau, j, p)) aux += weights[p];
            }
            tables.obs_steps[s - 1][j] = obs;
            tables.w_steps[s - 1][j] = w;
            tables.auxsum[s - 1][j] = aux;
        }
    }
    tables.suffix_obs.assign(ctx.S + 1, 0.0);
    tables.suffix_w.assign(ctx.S + 1, 0.0);
    tables.suffix_aux.assign(ctx.S + 1, 0.0);
    for (int s = ctx.S - 1; s >= 0; --s) {
        double obs = 0.0, w = 0.0, aux = 0.0;
        int J = ctx.inst->satellites[ctx.k].slot_counts[s + 1];
        for (int j = 0; j < J; ++j) {
            obs = std::max(obs, tables.obs_steps[s][j]);
            w = std::max(w, tables.w_steps[s][j]);
            aux = std::max(aux, tables.auxsum[s][j]);
        }
        tables.suffix_obs[s] = tables.suffix_obs[s + 1] + obs;
        tables.suffix_w[s] = tables.suffix_w[s + 1] + w;
        tables.suffix_aux[s] = tables.suffix_aux[s + 1] + aux;
    }
    // Children ordered by headline reward so good incumbents appear early.
    tables.slot_order.resize(ctx.S);
    for (int s = 0; s < ctx.S; ++s) {
        int J = ctx.inst->satellites[ctx.k].slot_counts[s + 1];
        tables.slot_order[s].resize(J);
        for (int j = 0; j < J; ++j) tables.slot_order[s][j] = j;
        std::stable_sort(tables.slot_order[s].begin(), tables.slot_order[s].end(),
                         [&](int a, int b) {
                             double ra = tables.obs_steps[s][a] +
                                         ctx.C * tables.w_steps[s][a] +
                                         tables.auxsum[s][a];
                             double rb = tables.obs_steps[s][b] +
                                         ctx.C * tables.w_steps[s][b] +
                                         tables.auxsum[s][b];
                             return ra > rb;
                         });
    }
    return tables;
}

std::vector<std::pair<int, int>> aux_visits_for_path(
    const SatContext& ctx, const std::vector<int>& path) {
    std::vector<std::pair<int, int>> visits;
    for (int t = 1; t <= ctx.T; ++t) {
        int s = ctx.stage_of(t);
        int tau = ctx.local_of(t);
        for (int p = 0; p < ctx.A; ++p)
            if (ctx.vis_u(s, tau, path[s], p)) visits.emplace_back(t, p);
    }
    return visits;
}

struct SatSolveResult {
    bool feasible = false;
    bool timed_out = false;
    std::vector<int> best_path;
    double best_z = kNegInf;
    double best_cost = 0.0;
};

using Clock = std::chrono::steady_clock;

/// Branch-and-bound over maneuver paths for one satellite.
SatSolveResult solve_satellite(const SatContext& ctx, const StageTables& tables,
                               Clock::time_point deadline) {
    const SatelliteData& sat = ctx.inst->satellites[ctx.k];
    SatSolveResult result;
    if (ctx.init_b < 0) return result;   // 9d: first maneuver drains below floor

    std::vector<int> path(ctx.S + 1, 0);
    std::vector<double> prefix_cost(ctx.S + 1, 0.0);
    std::vector<double> prefix_obs(ctx.S + 1, 0.0);
    std::vector<double> prefix_w(ctx.S + 1, 0.0);
    std::vector<double> prefix_aux(ctx.S + 1, 0.0);
    bool evaluated_any = false;

    // Depth-first, children in descending headline-reward order; stage 0 is
    // the singleton start.
    auto dfs = [&](auto&& self, int depth) -> void {
        if (result.timed_out) return;
        if (depth > ctx.S) {
            evaluated_any = true;
            std::vector<double> value1 = dp_backward(ctx, path, nullptr);
            double v = value1[ctx.init_d * ctx.b_levels + ctx.init_b];
            if (v == kNegInf) return;
            double aux = 0.0;
            for (int s = 1; s <= ctx.S; ++s) aux += tables.auxsum[s - 1][path[s]];
            double z = v + aux;
            double cost = prefix_cost[ctx.S];
            bool better = z > result.best_z + kEps ||
                          (result.feasible && std::fabs(z - result.best_z) <= kEps &&
                           cost < result.best_cost - kEps);
            if (!result.feasible || better) {
                result.feasible = true;
                result.best_z = z;
                result.best_cost = cost;
                result.best_path = path;
            }
            return;
        }
        for (int j : tables.slot_order[depth - 1]) {
            if (evaluated_any && Clock::now() > deadline) {
                result.timed_out = true;
                return;
            }
            double c = prefix_cost[depth - 1] + sat.costs[depth - 1][path[depth - 1]][j];
            if (c > sat.budget_km_s + kEps) continue;   // 5c
            double obs = prefix_obs[depth - 1] + tables.obs_steps[depth - 1][j];
            double w = prefix_w[depth - 1] + tables.w_steps[depth - 1][j];
            double aux = prefix_aux[depth - 1] + tables.auxsum[depth - 1][j];
            double optimistic =
                compose_bound(ctx, obs + tables.suffix_obs[depth],
                              w + tables.suffix_w[depth],
                              aux + tables.suffix_aux[depth]);
            if (result.feasible) {
                if (optimistic < result.best_z - kEps) continue;
                if (optimistic <= result.best_z + kEps &&
                    c >= result.best_cost - kEps)
                    continue;   // can tie z at best, but never at lower cost
            }
            path[depth] = j;
            prefix_cost[depth] = c;
            prefix_obs[depth] = obs;
            prefix_w[depth] = w;
            prefix_aux[depth] = aux;
            self(self, depth + 1);
            if (result.timed_out) return;
        }
    };
    dfs(dfs, 1);
    return result;
}

SatelliteSchedule assemble_satellite(const SatContext& ctx,
                                     const SatSolveResult& result) {
    std::vector<uint16_t> choices;
    dp_backward(ctx, result.best_path, &choices);
    TaskPlan plan =
        reconstruct(ctx, result.best_path, choices, 1, ctx.init_d, ctx.init_b);

    SatelliteSchedule ss;
    ss.slot_path = result.best_path;
    ss.events = std::move(plan.events);
    ss.aux_visits = aux_visits_for_path(ctx, result.best_path);
    ss.data_level = std::move(plan.data_level);
    ss.battery_level = std::move(plan.battery_level);
    ss.final_data_mb = plan.final_data;
    ss.final_battery_kj = plan.final_battery;
    ss.maneuver_cost_total = result.best_cost;
    return ss;
}

} // namespace

// ---------------------------------------------------------------------------

ScheduleHorizon ScheduleHorizon::make(double duration_s, double dt_s,
                                      int num_stages) {
    if (dt_s <= 0.0) throw std::invalid_argument("horizon: dt must be > 0");
    if (num_stages < 1) throw std::invalid_argument("horizon: S must be >= 1");
    double steps = duration_s / dt_s;
    int T = static_cast<int>(std::lround(steps));
    if (T < 1 || std::fabs(steps - T) > 1e-9)
        throw std::invalid_argument("horizon: duration must be a multiple of dt");
    if (T % num_stages != 0)
        throw std::invalid_argument("horizon: S must divide the step count");
    return ScheduleHorizon{duration_s, dt_s, T, num_stages, T / num_stages};
}

std::string to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::optimal: return "optimal";
        case SolverStatus::feasible_timeout: return "feasible_timeout";
        case SolverStatus::infeasible: return "infeasible";
    }
    return "optimal";
}

ScheduleInstance build_instance(ScheduleHorizon horizon,
                                std::vector<SatelliteData> satellites,
                                vis::VisibilityTensors tensors,
                                ResourceParams resources, double downlink_weight,
                                std::vector<double> auxiliary_weights,
                                BuildOptions options) {
    if (satellites.empty())
        throw std::invalid_argument("build_instance: need at least one satellite");
    if (!(downlink_weight > 1.0))
        throw std::invalid_argument("build_instance: downlink weight must be > 1");
    if (resources.data_min_mb > resources.data_max_mb ||
        resources.batt_min_kj > resources.batt_max_kj)
        throw std::invalid_argument("build_instance: resource bounds inverted");

    if (options.eossp) {
        for (auto& sat : satellites) sat.budget_km_s = 0.0;
        auxiliary_weights.clear();
        tensors.num_auxiliary = 0;
        for (auto& stage : tensors.U)
            for (auto& tensor : stage)
                tensor = BitTensor(tensor.dim0(), tensor.dim1(), 0);
    }

    int S = horizon.num_stages;
    int K = static_cast<int>(satellites.size());
    if (tensors.num_stages != S || tensors.num_satellites != K ||
        tensors.steps_per_stage != horizon.steps_per_stage)
        throw std::invalid_argument("build_instance: tensor extents do not match horizon");
    if (static_cast<int>(auxiliary_weights.size()) != tensors.num_auxiliary)
        throw std::invalid_argument(
            "build_instance: one auxiliary weight required per auxiliary target");
    for (double o : auxiliary_weights)
        if (o < 0.0 || o >= 1.0)
            throw std::invalid_argument("build_instance: auxiliary weights must be in [0, 1)");

    for (int k = 0; k < K; ++k) {
        const SatelliteData& sat = satellites[k];
        if (static_cast<int>(sat.slot_counts.size()) != S + 1)
            throw std::invalid_argument("build_instance: slot_counts must cover stages 0..S");
        if (sat.slot_counts[0] != 1)
            throw std::invalid_argument("build_instance: stage 0 must be a singleton slot");
        if (static_cast<int>(sat.costs.size()) != S)
            throw std::invalid_argument("build_instance: need S cost matrices");
        for (int s = 1; s <= S; ++s) {
            if (sat.slot_counts[s] < 1)
                throw std::invalid_argument("build_instance: empty slot grid");
            const auto& c = sat.costs[s - 1];
            if (static_cast<int>(c.size()) != sat.slot_counts[s - 1])
                throw std::invalid_argument("build_instance: cost matrix row mismatch");
            for (const auto& row : c) {
                if (static_cast<int>(row.size()) != sat.slot_counts[s])
                    throw std::invalid_argument("build_instance: cost matrix column mismatch");
                for (double v : row)
                    if (!(v >= 0.0) || !std::isfinite(v))
                        throw std::invalid_argument("build_instance: maneuver costs must be finite and >= 0");
            }
            auto check = [&](const BitTensor& t, int d2, const char* name) {
                if (t.dim0() != horizon.steps_per_stage ||
                    t.dim1() != sat.slot_counts[s] || t.dim2() != d2)
                    throw std::invalid_argument(
                        std::string("build_instance: tensor ") + name +
                        " extent mismatch at stage " + std::to_string(s));
            };
            check(tensors.v(s, k), tensors.num_priority, "V");
            check(tensors.u(s, k), tensors.num_auxiliary, "U");
            check(tensors.w(s, k), tensors.num_stations, "W");
            check(tensors.h(s, k), 1, "H");
        }
        if (sat.initial_data_mb < resources.data_min_mb - kEps ||
            sat.initial_data_mb > resources.data_max_mb + kEps)
            throw std::invalid_argument("build_instance: initial data outside bounds");
        if (sat.initial_battery_kj < resources.batt_min_kj - kEps ||
            sat.initial_battery_kj > resources.batt_max_kj + kEps)
            throw std::invalid_argument("build_instance: initial battery outside bounds");
    }

    ScheduleInstance inst;
    inst.horizon = horizon;
    inst.satellites = std::move(satellites);
    inst.tensors = std::move(tensors);
    inst.resources = resources;
    inst.downlink_weight = downlink_weight;
    inst.auxiliary_weights = std::move(auxiliary_weights);
    return inst;
}

Schedule solve_exact(const ScheduleInstance& instance, SolveOptions options) {
    auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(options.timeout_s));
    Schedule schedule;
    bool timed_out = false;
    for (int k = 0; k < instance.num_satellites(); ++k) {
        SatContext ctx = make_context(instance, k, options);
        StageTables tables = make_stage_tables(ctx);
        SatSolveResult result = solve_satellite(ctx, tables, deadline);
        if (!result.feasible) {
            schedule.satellites.clear();
            schedule.objective = 0.0;
            schedule.status = SolverStatus::infeasible;
            return schedule;
        }
        timed_out = timed_out || result.timed_out;
        schedule.satellites.push_back(assemble_satellite(ctx, result));
    }
    schedule.status =
        timed_out ? SolverStatus::feasible_timeout : SolverStatus::optimal;
    schedule.objective = objective_value(schedule, instance);
    return schedule;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: direct enumeration with floating-point checks, sharing
// no machinery with the lattice solver.

namespace {

struct BruteBest {
    bool feasible = false;
    double z = kNegInf;
    double cost = 0.0;
    std::vector<int> path;
    std::vector<int> actions;   // one per step; same encoding as the solver
};

struct BruteSearcher {
    const ScheduleInstance& inst;
    int k;
    int S, Ts, T, G, P, A;
    double C;
    const ResourceParams& r;
    const SatelliteData& sat;

    std::vector<int> path;
    std::vector<int> actions;
    BruteBest best;

    explicit BruteSearcher(const ScheduleInstance& instance, int sat_index)
        : inst(instance), k(sat_index), S(instance.horizon.num_stages),
          Ts(instance.horizon.steps_per_stage), T(instance.horizon.num_steps),
          G(instance.num_stations()), P(instance.num_priority()),
          A(instance.num_auxiliary()), C(instance.downlink_weight),
          r(instance.resources), sat(instance.satellites[k]),
          path(S + 1, 0), actions(T, 0) {}

    double count_assignments() {
        double total = 0.0;
        count_paths(1, 0.0, &total);
        return total;
    }

    void count_paths(int depth, double cost, double* total) {
        if (depth > S) {
            double product = 1.0;
            for (int t = 1; t <= T; ++t) {
                int s = (t - 1) / Ts + 1;
                int tau = (t - 1) % Ts;
                int j = path[s];
                int branches = 1;
                for (int g = 0; g < G; ++g)
                    if (inst.tensors.w(s, k).get(tau, j, g)) ++branches;
                for (int p = 0; p < P; ++p)
                    if (inst.tensors.v(s, k).get(tau, j, p)) ++branches;
                if (inst.tensors.h(s, k).get(tau, j, 0)) ++branches;
                product *= branches;
                if (product > 1e18) break;
            }
            *total += product;
            return;
        }
        for (int j = 0; j < sat.slot_counts[depth]; ++j) {
            double c = cost + sat.costs[depth - 1][path[depth - 1]][j];
            if (c > sat.budget_km_s + kEps) continue;
            path[depth] = j;
            count_paths(depth + 1, c, total);
        }
    }

    void search() {
        double b1 = sat.initial_battery_kj - r.batt_recon_kj;
        if (b1 < r.batt_min_kj - kEps) return;   // 9d
        search_paths(1, 0.0);
    }

    void search_paths(int depth, double cost) {
        if (depth > S) {
            double aux = 0.0;
            for (int t = 1; t <= T; ++t) {
                int s = (t - 1) / Ts + 1;
                int tau = (t - 1) % Ts;
                for (int p = 0; p < A; ++p)
                    if (inst.tensors.u(s, k).get(tau, path[s], p))
                        aux += inst.auxiliary_weights[p];
            }
            search_tasks(1, sat.initial_data_mb,
                         sat.initial_battery_kj - r.batt_recon_kj, aux, cost);
            return;
        }
        for (int j = 0; j < sat.slot_counts[depth]; ++j) {
            double c = cost + sat.costs[depth - 1][path[depth - 1]][j];
            if (c > sat.budget_km_s + kEps) continue;
            path[depth] = j;
            search_paths(depth + 1, c);
        }
    }

    void search_tasks(int t, double d, double b, double z, double cost) {
        if (t > T) {
            bool better = z > best.z + kEps ||
                          (best.feasible && std::fabs(z - best.z) <= kEps &&
                           cost < best.cost - kEps);
            if (!best.feasible || better) {
                best.feasible = true;
                best.z = z;
                best.cost = cost;
                best.path = path;
                best.actions = actions;
            }
            return;
        }
        int s = (t - 1) / Ts + 1;
        int tau = (t - 1) % Ts;
        int j = path[s];
        bool boundary = (tau == Ts - 1) && (s < S);
        double recon = boundary ? r.batt_recon_kj : 0.0;
        double floor = r.batt_min_kj - kEps;

        // idle
        if (b - recon - r.batt_time_kj >= floor) {
            actions[t - 1] = 0;
            search_tasks(t + 1, d, b - recon - r.batt_time_kj, z, cost);
        }
        // charge
        if (inst.tensors.h(s, k).get(tau, j, 0) &&
            b + r.batt_charge_kj <= r.batt_max_kj + kEps &&
            b - recon - r.batt_time_kj >= floor) {
            actions[t - 1] = 1;
            search_tasks(t + 1, d, b + r.batt_charge_kj - recon - r.batt_time_kj,
                         z, cost);
        }
        // downlink
        for (int g = 0; g < G; ++g) {
            if (!inst.tensors.w(s, k).get(tau, j, g)) continue;
            if (d - r.data_comm_mb < r.data_min_mb - kEps) continue;
            if (b - r.batt_comm_kj - recon - r.batt_time_kj < floor) continue;
            actions[t - 1] = 2 + g;
            search_tasks(t + 1, d - r.data_comm_mb,
                         b - r.batt_comm_kj - recon - r.batt_time_kj, z + C, cost);
        }
        // observe
        for (int p = 0; p < P; ++p) {
            if (!inst.tensors.v(s, k).get(tau, j, p)) continue;
            if (d + r.data_obs_mb > r.data_max_mb + kEps) continue;
            if (b - r.batt_obs_kj - recon - r.batt_time_kj < floor) continue;
            actions[t - 1] = 2 + G + p;
            search_tasks(t + 1, d + r.data_obs_mb,
                         b - r.batt_obs_kj - recon - r.batt_time_kj, z + 1.0, cost);
        }
    }
};

} // namespace

Schedule solve_bruteforce(const ScheduleInstance& instance) {
    double total_space = 0.0;
    for (int k = 0; k < instance.num_satellites(); ++k) {
        BruteSearcher counter(instance, k);
        total_space += counter.count_assignments();
    }
    if (total_space > static_cast<double>(1 << 24))
        throw std::runtime_error(
            "solve_bruteforce: assignment space exceeds 2^24; instance too large");

    Schedule schedule;
    for (int k = 0; k < instance.num_satellites(); ++k) {
        BruteSearcher searcher(instance, k);
        searcher.search();
        if (!searcher.best.feasible) {
            schedule.satellites.clear();
            schedule.objective = 0.0;
            schedule.status = SolverStatus::infeasible;
            return schedule;
        }
        const BruteBest& best = searcher.best;
        const ResourceParams& r = instance.resources;
        int S = instance.horizon.num_stages;
        int Ts = instance.horizon.steps_per_stage;
        int T = instance.horizon.num_steps;
        int G = instance.num_stations();

        SatelliteSchedule ss;
        ss.slot_path = best.path;
        ss.maneuver_cost_total = best.cost;
        double d = instance.satellites[k].initial_data_mb;
        double b = instance.satellites[k].initial_battery_kj - r.batt_recon_kj;
        for (int t = 1; t <= T; ++t) {
            int s = (t - 1) / Ts + 1;
            int tau = (t - 1) % Ts;
            bool boundary = (tau == Ts - 1) && (s < S);
            double recon = boundary ? r.batt_recon_kj : 0.0;
            ss.data_level.push_back(d);
            ss.battery_level.push_back(b);
            int a = best.actions[t - 1];
            if (a == 1) {
                ss.events.push_back({t, TaskKind::charge, 0});
                b += r.batt_charge_kj;
            } else if (a >= 2 && a < 2 + G) {
                ss.events.push_back({t, TaskKind::downlink, a - 2});
                d -= r.data_comm_mb;
                b -= r.batt_comm_kj;
            } else if (a >= 2 + G) {
                ss.events.push_back({t, TaskKind::observe, a - 2 - G});
                d += r.data_obs_mb;
                b -= r.batt_obs_kj;
            }
            b -= recon + r.batt_time_kj;
            for (int p = 0; p < instance.num_auxiliary(); ++p)
                if (instance.tensors.u(s, k).get(tau, best.path[s], p))
                    ss.aux_visits.emplace_back(t, p);
        }
        ss.final_data_mb = d;
        ss.final_battery_kj = b;
        schedule.satellites.push_back(std::move(ss));
    }
    schedule.status = SolverStatus::optimal;
    schedule.objective = objective_value(schedule, instance);
    return schedule;
}

// ---------------------------------------------------------------------------

namespace {

/// Replays executed events through the lattice transitions up to (but not
/// including) t_now; throws on any constraint violation.
void replay_prefix(const SatContext& ctx, const SatelliteSchedule& ss, int t_now,
                   long& d, long& b, std::vector<double>& data_level,
                   std::vector<double>& battery_level,
                   std::vector<TaskEvent>& prefix_events) {
    d = ctx.init_d;
    b = ctx.init_b;
    std::size_t next_event = 0;
    for (int t = 1; t < t_now; ++t) {
        int s = ctx.stage_of(t);
        int tau = ctx.local_of(t);
        int j = ss.slot_path[s];
        data_level.push_back(ctx.data.to_value(d));
        battery_level.push_back(ctx.batt.to_value(b));

        int action = kActIdle;
        while (next_event < ss.events.size() && ss.events[next_event].step < t)
            ++next_event;
        if (next_event < ss.events.size() && ss.events[next_event].step == t) {
            const TaskEvent& ev = ss.events[next_event];
            switch (ev.kind) {
                case TaskKind::charge: action = kActCharge; break;
                case TaskKind::downlink: action = 2 + ev.object_index; break;
                case TaskKind::observe: action = 2 + ctx.G + ev.object_index; break;
            }
            prefix_events.push_back(ev);
            ++next_event;
        }
        Transition tr;
        if (!apply_action(ctx, s, tau, j, action, d, b, tr))
            throw std::runtime_error(
                "reschedule_remainder: executed trajectory violates constraints at step " +
                std::to_string(t));
        d = tr.d_next;
        b = tr.b_next;
    }
}

} // namespace

Schedule reschedule_remainder(const Schedule& schedule,
                              const ScheduleInstance& instance, int t_now,
                              SolveOptions options) {
    int T = instance.horizon.num_steps;
    if (t_now < 1 || t_now > T + 1)
        throw std::invalid_argument("reschedule_remainder: t_now outside horizon");
    if (static_cast<int>(schedule.satellites.size()) != instance.num_satellites())
        throw std::invalid_argument("reschedule_remainder: satellite count mismatch");

    Schedule out;
    out.status = SolverStatus::optimal;
    for (int k = 0; k < instance.num_satellites(); ++k) {
        const SatelliteSchedule& ss = schedule.satellites[k];
        SatContext ctx = make_context(instance, k, options);
        if (static_cast<int>(ss.slot_path.size()) != ctx.S + 1)
            throw std::runtime_error("reschedule_remainder: malformed slot path");

        SatelliteSchedule ns;
        ns.slot_path = ss.slot_path;
        ns.maneuver_cost_total = ss.maneuver_cost_total;

        long d = 0, b = 0;
        replay_prefix(ctx, ss, t_now, d, b, ns.data_level, ns.battery_level,
                      ns.events);

        if (t_now <= T) {
            std::vector<uint16_t> choices;
            dp_backward(ctx, ns.slot_path, &choices);
            TaskPlan tail = reconstruct(ctx, ns.slot_path, choices, t_now, d, b);
            ns.events.insert(ns.events.end(), tail.events.begin(),
                             tail.events.end());
            ns.data_level.insert(ns.data_level.end(), tail.data_level.begin(),
                                 tail.data_level.end());
            ns.battery_level.insert(ns.battery_level.end(),
                                    tail.battery_level.begin(),
                                    tail.battery_level.end());
            ns.final_data_mb = tail.final_data;
            ns.final_battery_kj = tail.final_battery;
        } else {
            ns.final_data_mb = ctx.data.to_value(d);
            ns.final_battery_kj = ctx.batt.to_value(b);
        }
        ns.aux_visits = aux_visits_for_path(ctx, ns.slot_path);
        out.satellites.push_back(std::move(ns));
    }
    out.objective = objective_value(out, instance);
    return out;
}

// ---------------------------------------------------------------------------

double objective_value(const Schedule& schedule, const ScheduleInstance& instance) {
    double z = 0.0;
    for (const SatelliteSchedule& ss : schedule.satellites) {
        for (const TaskEvent& ev : ss.events) {
            if (ev.kind == TaskKind::observe) z += 1.0;
            else if (ev.kind == TaskKind::downlink) z += instance.downlink_weight;
        }
        for (const auto& [t, p] : ss.aux_visits) {
            if (p < 0 || p >= static_cast<int>(instance.auxiliary_weights.size()))
                throw std::invalid_argument("objective_value: auxiliary index out of range");
            z += instance.auxiliary_weights[p];
        }
    }
    return z;
}

std::vector<Violation> validate_schedule(const Schedule& schedule,
                                         const ScheduleInstance& instance) {
    std::vector<Violation> out;
    auto add = [&](const std::string& c, const std::string& detail, double lhs,
                   double rhs) { out.push_back({c, detail, lhs, rhs}); };

    const ResourceParams& r = instance.resources;
    int S = instance.horizon.num_stages;
    int Ts = instance.horizon.steps_per_stage;
    int T = instance.horizon.num_steps;
    int K = instance.num_satellites();

    if (static_cast<int>(schedule.satellites.size()) != K) {
        add("5a", "satellite count mismatch", schedule.satellites.size(), K);
        return out;
    }

    for (int k = 0; k < K; ++k) {
        const SatelliteSchedule& ss = schedule.satellites[k];
        const SatelliteData& sat = instance.satellites[k];
        std::string sk = "k=" + std::to_string(k);

        // 5a/5b: one well-formed slot selection per stage.
        if (static_cast<int>(ss.slot_path.size()) != S + 1 || ss.slot_path[0] != 0) {
            add("5a", sk + " malformed slot path", ss.slot_path.size(), S + 1);
            continue;
        }
        bool path_ok = true;
        for (int s = 1; s <= S; ++s) {
            if (ss.slot_path[s] < 0 || ss.slot_path[s] >= sat.slot_counts[s]) {
                add(s == 1 ? "5a" : "5b",
                    sk + " stage " + std::to_string(s) + " slot out of range",
                    ss.slot_path[s], sat.slot_counts[s]);
                path_ok = false;
            }
        }
        if (!path_ok) continue;

        double cost = 0.0;
        for (int s = 1; s <= S; ++s)
            cost += sat.costs[s - 1][ss.slot_path[s - 1]][ss.slot_path[s]];
        if (cost > sat.budget_km_s + kEps)
            add("5c", sk + " maneuver cost over budget", cost, sat.budget_km_s);

        // Per-step task pulls; duplicates caught by 6e.
        std::vector<int> n_obs(T + 1, 0), n_comm(T + 1, 0), n_charge(T + 1, 0);
        std::vector<double> d_obs_sum(T + 1, 0.0), d_comm_sum(T + 1, 0.0);
        std::vector<double> b_task_sum(T + 1, 0.0), b_charge_sum(T + 1, 0.0);
        for (const TaskEvent& ev : ss.events) {
            if (ev.step < 1 || ev.step > T) {
                add("6e", sk + " event outside horizon", ev.step, T);
                continue;
            }
            int s = (ev.step - 1) / Ts + 1;
            int tau = (ev.step - 1) % Ts;
            int j = ss.slot_path[s];
            std::string at = sk + " t=" + std::to_string(ev.step);
            switch (ev.kind) {
                case TaskKind::observe:
                    if (ev.object_index < 0 || ev.object_index >= instance.num_priority() ||
                        !instance.tensors.v(s, k).get(tau, j, ev.object_index))
                        add("6a", at + " observation without visibility", 0, 1);
                    n_obs[ev.step] += 1;
                    d_obs_sum[ev.step] += r.data_obs_mb;
                    b_task_sum[ev.step] += r.batt_obs_kj;
                    break;
                case TaskKind::downlink:
                    if (ev.object_index < 0 || ev.object_index >= instance.num_stations() ||
                        !instance.tensors.w(s, k).get(tau, j, ev.object_index))
                        add("6b", at + " downlink without visibility", 0, 1);
                    n_comm[ev.step] += 1;
                    d_comm_sum[ev.step] += r.data_comm_mb;
                    b_task_sum[ev.step] += r.batt_comm_kj;
                    break;
                case TaskKind::charge:
                    if (!instance.tensors.h(s, k).get(tau, j, 0))
                        add("6d", at + " charging in eclipse", 0, 1);
                    n_charge[ev.step] += 1;
                    b_charge_sum[ev.step] += r.batt_charge_kj;
                    break;
            }
        }
        for (int t = 1; t <= T; ++t) {
            int total = n_obs[t] + n_comm[t] + n_charge[t];
            if (total > 1)
                add("6e", sk + " t=" + std::to_string(t) + " overlapping tasks",
                    total, 1);
        }

        for (const auto& [t, p] : ss.aux_visits) {
            if (t < 1 || t > T || p < 0 || p >= instance.num_auxiliary()) {
                add("6c", sk + " auxiliary visit out of range", p,
                    instance.num_auxiliary());
                continue;
            }
            int s = (t - 1) / Ts + 1;
            int tau = (t - 1) % Ts;
            if (!instance.tensors.u(s, k).get(tau, ss.slot_path[s], p))
                add("6c", sk + " t=" + std::to_string(t) +
                              " auxiliary visibility not attained", 0, 1);
        }

        if (static_cast<int>(ss.data_level.size()) != T) {
            add("3f", sk + " data trajectory length mismatch", ss.data_level.size(), T);
            continue;
        }
        if (static_cast<int>(ss.battery_level.size()) != T) {
            add("3g", sk + " battery trajectory length mismatch",
                ss.battery_level.size(), T);
            continue;
        }

        // 8c: opening battery reflects the stage-1 thruster positioning.
        double b1_expected = sat.initial_battery_kj - r.batt_recon_kj;
        if (std::fabs(ss.battery_level[0] - b1_expected) > kEps)
            add("8c", sk + " opening battery", ss.battery_level[0], b1_expected);
        if (std::fabs(ss.data_level[0] - sat.initial_data_mb) > kEps)
            add("7a", sk + " opening data level", ss.data_level[0],
                sat.initial_data_mb);
        if (b1_expected < r.batt_min_kj - kEps)
            add("9d", sk + " initial maneuver drains battery floor", b1_expected,
                r.batt_min_kj);

        for (int t = 1; t <= T; ++t) {
            int s = (t - 1) / Ts + 1;
            int tau = (t - 1) % Ts;
            bool boundary = (tau == Ts - 1) && (s < S);
            double recon = boundary ? r.batt_recon_kj : 0.0;
            double d = ss.data_level[t - 1];
            double b = ss.battery_level[t - 1];
            std::string at = sk + " t=" + std::to_string(t);

            if (d < r.data_min_mb - kEps || d > r.data_max_mb + kEps)
                add("3f", at + " data level outside domain", d, r.data_max_mb);
            if (b < r.batt_min_kj - kEps || b > r.batt_max_kj + kEps)
                add("3g", at + " battery level outside domain", b, r.batt_max_kj);

            if (d + d_obs_sum[t] > r.data_max_mb + kEps)
                add("7c", at + " observation exceeds data capacity",
                    d + d_obs_sum[t], r.data_max_mb);
            if (d - d_comm_sum[t] < r.data_min_mb - kEps)
                add("7d", at + " downlink drains data floor", d - d_comm_sum[t],
                    r.data_min_mb);
            if (b + b_charge_sum[t] > r.batt_max_kj + kEps)
                add("9a", at + " charging exceeds battery capacity",
                    b + b_charge_sum[t], r.batt_max_kj);
            double b_floor = b - b_task_sum[t] - r.batt_time_kj;
            if (boundary) {
                if (b_floor - r.batt_recon_kj < r.batt_min_kj - kEps)
                    add("9c", at + " boundary battery floor",
                        b_floor - r.batt_recon_kj, r.batt_min_kj);
            } else {
                if (b_floor < r.batt_min_kj - kEps)
                    add("9b", at + " battery floor", b_floor, r.batt_min_kj);
            }

            double d_next = d + d_obs_sum[t] - d_comm_sum[t];
            double b_next = b + b_charge_sum[t] - b_task_sum[t] - recon -
                            r.batt_time_kj;
            if (t < T) {
                bool stage_edge = (tau == Ts - 1);
                if (std::fabs(ss.data_level[t] - d_next) > kEps)
                    add(stage_edge ? "7b" : "7a", at + " data recursion",
                        ss.data_level[t], d_next);
                if (std::fabs(ss.battery_level[t] - b_next) > kEps)
                    add(stage_edge ? "8b" : "8a", at + " battery recursion",
                        ss.battery_level[t], b_next);
            } else {
                if (std::fabs(ss.final_data_mb - d_next) > kEps)
                    add("7a", sk + " final data carryover", ss.final_data_mb, d_next);
                if (std::fabs(ss.final_battery_kj - b_next) > kEps)
                    add("8a", sk + " final battery carryover", ss.final_battery_kj,
                        b_next);
            }
        }
    }

    double z = objective_value(schedule, instance);
    if (std::fabs(z - schedule.objective) > kEps)
        add("4", "stored objective does not match recomputed value",
            schedule.objective, z);
    return out;
}

} // namespace firesat::sched
