#pragma once

// Shared helpers for the unit and acceptance suites: seeded tiny scheduling
// instances sized for the brute-force oracle, plus small builders.

#include <vector>

#include "firesat/rng.hpp"
#include "firesat/scheduler.hpp"

namespace firesat::testsupport {

/// Auxiliary weights are dyadic so objective sums are exact in floating point.
inline const double kDyadicWeights[4] = {0.25, 0.5, 0.75, 0.875};

struct TinyOptions {
    int max_satellites = 2;
    int max_slots = 3;
    int max_priority = 2;
    int max_auxiliary = 2;
    bool with_auxiliary = true;
};

/// Pieces of an instance that tests can poke before building.
struct Parts {
    sched::ScheduleHorizon horizon;
    std::vector<sched::SatelliteData> sats;
    vis::VisibilityTensors tensors;
    sched::ResourceParams r;
    double C = 5.0;
    std::vector<double> aux;

    sched::ScheduleInstance build(sched::BuildOptions opt = {}) {
        return sched::build_instance(horizon, sats, tensors, r, C, aux, opt);
    }
};

/// Blank instance pieces: integer-lattice resources, sun always visible,
/// zero target and station visibility, cheap slot transfer costs.
inline Parts make_parts(int K, int S, int T, int J, int P, int A, int G) {
    Parts parts;
    parts.horizon = sched::ScheduleHorizon::make(T * 100.0, 100.0, S);
    int Ts = parts.horizon.steps_per_stage;

    parts.r.data_obs_mb = 2.0;
    parts.r.data_comm_mb = 1.0;
    parts.r.data_min_mb = 0.0;
    parts.r.data_max_mb = 4.0;
    parts.r.batt_charge_kj = 3.0;
    parts.r.batt_obs_kj = 1.0;
    parts.r.batt_comm_kj = 1.0;
    parts.r.batt_recon_kj = 2.0;
    parts.r.batt_time_kj = 1.0;
    parts.r.batt_min_kj = 0.0;
    parts.r.batt_max_kj = 16.0;

    parts.tensors.num_stages = S;
    parts.tensors.num_satellites = K;
    parts.tensors.steps_per_stage = Ts;
    parts.tensors.num_priority = P;
    parts.tensors.num_auxiliary = A;
    parts.tensors.num_stations = G;
    parts.tensors.V.resize(S);
    parts.tensors.U.resize(S);
    parts.tensors.W.resize(S);
    parts.tensors.H.resize(S);

    for (int k = 0; k < K; ++k) {
        sched::SatelliteData sd;
        sd.id = "sat" + std::to_string(k);
        sd.slot_counts.push_back(1);
        for (int s = 1; s <= S; ++s) sd.slot_counts.push_back(J);
        sd.costs.resize(S);
        sd.costs[0].assign(1, std::vector<double>(J));
        for (int j = 0; j < J; ++j) sd.costs[0][0][j] = 0.1 * j;
        for (int s = 2; s <= S; ++s) {
            sd.costs[s - 1].assign(J, std::vector<double>(J));
            for (int i = 0; i < J; ++i)
                for (int j = 0; j < J; ++j)
                    sd.costs[s - 1][i][j] = i == j ? 0.0 : 0.1 * std::abs(i - j);
        }
        sd.initial_data_mb = 0.0;
        sd.initial_battery_kj = 16.0;
        sd.budget_km_s = 1.0;
        parts.sats.push_back(std::move(sd));
    }
    for (int s = 0; s < S; ++s) {
        for (int k = 0; k < K; ++k) {
            parts.tensors.V[s].emplace_back(Ts, J, P);
            parts.tensors.U[s].emplace_back(Ts, J, A);
            parts.tensors.W[s].emplace_back(Ts, J, G);
            BitTensor H(Ts, J, 1);
            for (int t = 0; t < Ts; ++t)
                for (int j = 0; j < J; ++j) H.set(t, j, 0, true);
            parts.tensors.H[s].push_back(std::move(H));
        }
    }
    return parts;
}

/// Seeded random instance small enough for solve_bruteforce: K <= 2, S = 2,
/// J <= 3, T <= 8, P <= 2, G = 1. Battery parameters guarantee feasibility
/// (idling through the whole horizon is always possible).
inline sched::ScheduleInstance make_tiny_instance(uint64_t seed,
                                                  TinyOptions opt = {}) {
    SplitMix64 rng(seed);
    int K = 1 + static_cast<int>(rng.below(opt.max_satellites));
    int S = 2;
    int T = 4 + 2 * static_cast<int>(rng.below(3));   // 4, 6, 8
    int Ts = T / S;
    int P = static_cast<int>(rng.below(opt.max_priority + 1));
    int A = opt.with_auxiliary
                ? static_cast<int>(rng.below(opt.max_auxiliary + 1))
                : 0;
    int G = 1;

    sched::ResourceParams r;
    r.data_obs_mb = 2.0;
    r.data_comm_mb = 1.0;
    r.data_min_mb = 0.0;
    r.data_max_mb = 4.0;
    r.batt_charge_kj = 3.0;
    r.batt_obs_kj = 1.0;
    r.batt_comm_kj = 1.0;
    r.batt_recon_kj = 2.0;
    r.batt_time_kj = 1.0;
    r.batt_min_kj = 0.0;
    r.batt_max_kj = 16.0;

    std::vector<sched::SatelliteData> sats;
    vis::VisibilityTensors tensors;
    tensors.num_stages = S;
    tensors.num_satellites = K;
    tensors.steps_per_stage = Ts;
    tensors.num_priority = P;
    tensors.num_auxiliary = A;
    tensors.num_stations = G;
    tensors.V.resize(S);
    tensors.U.resize(S);
    tensors.W.resize(S);
    tensors.H.resize(S);

    const double cost_steps[4] = {0.0, 0.25, 0.5, 1.0};
    for (int k = 0; k < K; ++k) {
        int J = 1 + static_cast<int>(rng.below(opt.max_slots));
        sched::SatelliteData sd;
        sd.id = "sat" + std::to_string(k);
        sd.slot_counts = {1, J, J};
        sd.costs.resize(2);
        sd.costs[0].assign(1, std::vector<double>(J));
        for (int j = 0; j < J; ++j)
            sd.costs[0][0][j] = j == 0 ? 0.0 : cost_steps[rng.below(4)];
        sd.costs[1].assign(J, std::vector<double>(J));
        for (int i = 0; i < J; ++i)
            for (int j = 0; j < J; ++j)
                sd.costs[1][i][j] = i == j ? 0.0 : cost_steps[rng.below(4)];
        sd.budget_km_s = cost_steps[rng.below(4)];
        sd.initial_data_mb = static_cast<double>(rng.below(3));
        sd.initial_battery_kj = 16.0;
        sats.push_back(std::move(sd));
    }

    for (int s = 0; s < S; ++s) {
        for (int k = 0; k < K; ++k) {
            int J = sats[k].slot_counts[s + 1];
            BitTensor V(Ts, J, P), U(Ts, J, A), W(Ts, J, G), H(Ts, J, 1);
            for (int t = 0; t < Ts; ++t) {
                for (int j = 0; j < J; ++j) {
                    for (int p = 0; p < P; ++p)
                        V.set(t, j, p, rng.uniform01() < 0.30);
                    for (int p = 0; p < A; ++p)
                        U.set(t, j, p, rng.uniform01() < 0.30);
                    for (int g = 0; g < G; ++g)
                        W.set(t, j, g, rng.uniform01() < 0.25);
                    H.set(t, j, 0, rng.uniform01() < 0.70);
                }
            }
            tensors.V[s].push_back(std::move(V));
            tensors.U[s].push_back(std::move(U));
            tensors.W[s].push_back(std::move(W));
            tensors.H[s].push_back(std::move(H));
        }
    }

    std::vector<double> aux_weights;
    for (int p = 0; p < A; ++p)
        aux_weights.push_back(kDyadicWeights[rng.below(4)]);
    double C = rng.below(2) == 0 ? 2.0 : 5.0;

    sched::ScheduleHorizon horizon =
        sched::ScheduleHorizon::make(T * 100.0, 100.0, S);
    return sched::build_instance(horizon, std::move(sats), std::move(tensors),
                                 r, C, std::move(aux_weights));
}

} // namespace firesat::testsupport
