#include "firesat/mission.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "firesat/rng.hpp"

namespace firesat::mission {

namespace {

constexpr uint64_t kBandSalt[2] = {0x51ab, 0x77cd};

bool near_truth(double lat, double lon, const std::vector<scene::FireTruth>& fires,
                UtcTime when, double radius_deg) {
    for (const auto& f : fires) {
        if (f.start_time > when) continue;
        double d = std::max(std::fabs(lat - f.lat_deg),
                            std::fabs(wrap_deg_180(lon - f.lon_deg)));
        if (d <= radius_deg) return true;
    }
    return false;
}

sched::SolveOptions solve_options(const MissionConfig& config) {
    sched::SolveOptions opt;
    opt.timeout_s = config.solver_timeout_s;
    return opt;
}

/// Builds the scheduling problem for one block and solves it.
PendingBlock prepare_block(const MissionConfig& config,
                           const std::vector<SatelliteRuntime>& sats,
                           const conf::TargetRegistry& registry,
                           UtcTime block_start, bool allow_maneuvers,
                           bool is_final_block) {
    int S = config.stages_per_block;
    sched::ScheduleHorizon horizon =
        sched::ScheduleHorizon::make(config.block_duration_s, config.dt_s, S);

    PendingBlock pending;

    // Target sets: promoted targets for observation, top-k auxiliaries for
    // maneuver shaping (maneuvering mode only).
    for (const auto* t : registry.priority())
        pending.priority_points.push_back(
            {t->id, t->lat_deg, t->lon_deg, vis::PointKind::priority_target});
    std::vector<vis::GroundPoint> aux_points;
    std::vector<double> aux_weights;
    if (config.scheduler == SchedulerMode::reossp) {
        for (const auto& [t, weight] : registry.select_auxiliary()) {
            aux_points.push_back(
                {t->id, t->lat_deg, t->lon_deg, vis::PointKind::auxiliary_target});
            aux_weights.push_back(weight);
        }
    }

    std::vector<sched::SatelliteData> sat_data;
    for (std::size_t k = 0; k < sats.size(); ++k) {
        const SatelliteRuntime& rt = sats[k];
        double remaining = rt.budget_remaining_km_s;
        double provided = is_final_block ? remaining : remaining / 2.0;
        bool maneuvering =
            allow_maneuvers && config.scheduler == SchedulerMode::reossp;
        if (!maneuvering) provided = 0.0;
        pending.provided_budget.push_back(provided);

        orbit::OrbitalElements current = orbit::reanchor(rt.current, block_start);
        std::vector<orbit::SlotGrid> grids(S + 1);
        grids[0].slots = {current};
        grids[0].anomaly_count = 1;
        grids[0].n_inclination_planes = grids[0].n_raan_planes = 1;
        orbit::SlotGrid options =
            maneuvering ? orbit::build_slot_grid(current, provided,
                                                 config.slot_planes,
                                                 config.slot_anomalies)
                        : grids[0];
        for (int s = 1; s <= S; ++s) grids[s] = options;

        sched::SatelliteData sd;
        sd.id = rt.config.id;
        sd.slot_counts.push_back(1);
        for (int s = 1; s <= S; ++s) sd.slot_counts.push_back(options.size());
        sd.costs.push_back(orbit::cost_matrix(grids[0], grids[1]));
        if (S > 1) {
            auto inner = orbit::cost_matrix(options, options);
            for (int s = 2; s <= S; ++s) sd.costs.push_back(inner);
        }
        sd.initial_data_mb = rt.data_mb;
        sd.initial_battery_kj = rt.battery_kj;
        sd.budget_km_s = provided;
        sat_data.push_back(std::move(sd));
        pending.grids.push_back(std::move(grids));
    }

    vis::VisibilityConfig vcfg;
    vcfg.sensor_half_angle_deg = config.scene.half_angle_deg;
    vcfg.station_min_elevation_deg = config.station_min_elevation_deg;
    vis::VisibilityTensors tensors = vis::compute_tensors(
        pending.grids, S, horizon.steps_per_stage, config.dt_s, block_start,
        pending.priority_points, aux_points, config.ground_stations, vcfg);

    pending.instance = sched::build_instance(
        horizon, std::move(sat_data), std::move(tensors), config.resources,
        config.downlink_weight, std::move(aux_weights));
    pending.schedule =
        sched::solve_exact(pending.instance, solve_options(config));
    if (pending.schedule.status == sched::SolverStatus::infeasible)
        throw std::runtime_error("mission: block schedule infeasible");
    return pending;
}

/// Appends V columns for newly promoted targets; U/W/H are untouched.
void extend_priority_targets(PendingBlock& pending, const MissionConfig& config,
                             UtcTime block_start,
                             const std::vector<vis::GroundPoint>& new_points) {
    if (new_points.empty()) return;
    sched::ScheduleInstance& inst = pending.instance;
    int S = inst.horizon.num_stages;
    int Ts = inst.horizon.steps_per_stage;
    int K = inst.num_satellites();
    int old_p = inst.tensors.num_priority;
    int new_p = old_p + static_cast<int>(new_points.size());

    for (int s = 1; s <= S; ++s) {
        for (int k = 0; k < K; ++k) {
            const BitTensor& old_v = inst.tensors.v(s, k);
            int J = old_v.dim1();
            BitTensor v(Ts, J, new_p);
            for (int t = 0; t < Ts; ++t) {
                UtcTime when =
                    block_start +
                    (static_cast<double>(s - 1) * Ts + t) * config.dt_s;
                for (int j = 0; j < J; ++j) {
                    for (int p = 0; p < old_p; ++p)
                        v.set(t, j, p, old_v.get(t, j, p));
                    orbit::StateVector st =
                        orbit::propagate(pending.grids[k][s].slots[j], when);
                    for (std::size_t n = 0; n < new_points.size(); ++n)
                        v.set(t, j, old_p + static_cast<int>(n),
                              vis::target_visible(st, new_points[n],
                                                  config.scene.half_angle_deg));
                }
            }
            inst.tensors.V[s - 1][k] = std::move(v);
        }
    }
    inst.tensors.num_priority = new_p;
    for (const auto& p : new_points) pending.priority_points.push_back(p);
}

} // namespace

std::string to_string(FusionMode m) {
    switch (m) {
        case FusionMode::band6: return "band6";
        case FusionMode::band7: return "band7";
        case FusionMode::early: return "early";
        case FusionMode::late: return "late";
    }
    return "early";
}

FusionMode fusion_from_name(const std::string& name) {
    if (name == "band6") return FusionMode::band6;
    if (name == "band7") return FusionMode::band7;
    if (name == "early") return FusionMode::early;
    if (name == "late") return FusionMode::late;
    throw std::invalid_argument("unknown fusion mode '" + name + "'");
}

std::string to_string(SchedulerMode m) {
    return m == SchedulerMode::reossp ? "reossp" : "eossp";
}

SchedulerMode scheduler_from_name(const std::string& name) {
    if (name == "reossp") return SchedulerMode::reossp;
    if (name == "eossp") return SchedulerMode::eossp;
    throw std::invalid_argument("unknown scheduler mode '" + name + "'");
}

MissionState init_mission_state(const MissionConfig& config) {
    if (config.satellites.empty())
        throw std::invalid_argument("mission: no satellites configured");
    if (config.n_blocks < 1)
        throw std::invalid_argument("mission: n_blocks must be >= 1");

    MissionState state;
    state.block_index = 1;
    state.block_start = config.start;
    state.registry = conf::TargetRegistry(config.registry);
    for (const SatelliteConfig& sc : config.satellites) {
        SatelliteRuntime rt;
        rt.config = sc;
        rt.current = orbit::reanchor(sc.elements, config.start);
        rt.data_mb = sc.initial_data_mb;
        rt.battery_kj = sc.initial_battery_kj;
        rt.budget_remaining_km_s = sc.budget_km_s;
        if (sc.initial_data_mb > 0.0)
            rt.onboard.push_back({sc.initial_data_mb, false, 0.0, 0.0});
        state.satellites.push_back(std::move(rt));
    }
    // Block 1 runs on the initial orbits: no prior information, no maneuvers.
    state.pending = prepare_block(config, state.satellites, state.registry,
                                  config.start, /*allow_maneuvers=*/false,
                                  config.n_blocks == 1);
    return state;
}

BlockResult run_block(MissionState& state, const MissionConfig& config,
                      const std::vector<scene::FireTruth>& fires) {
    const int S = config.stages_per_block;
    const int T = state.pending.instance.horizon.num_steps;
    const int Ts = state.pending.instance.horizon.steps_per_stage;
    const int K = static_cast<int>(state.satellites.size());
    const UtcTime block_start = state.block_start;

    BlockResult result;
    result.block_index = state.block_index;
    result.start = block_start;
    result.provided_budget_per_sat = state.pending.provided_budget;
    for (double b : state.pending.provided_budget)
        result.provided_budget_km_s += b;
    if (config.scheduler == SchedulerMode::eossp)
        result.provided_budget_km_s = 0.0;

    // Phases 1-3, interleaved per step: execute/render, detect, update the
    // registry, and re-solve the remainder when the priority set grows.
    for (int t = 1; t <= T; ++t) {
        UtcTime when = block_start + static_cast<double>(t - 1) * config.dt_s;
        int stage = (t - 1) / Ts + 1;
        std::vector<detect::Detection> step_detections;

        for (int k = 0; k < K; ++k) {
            int slot = state.pending.schedule.satellites[k].slot_path[stage];
            const orbit::OrbitalElements& el =
                state.pending.grids[k][stage].slots[slot];
            orbit::StateVector st = orbit::propagate(el, when);
            orbit::SubPoint sp = orbit::subpoint(st);
            result.ground_track.push_back({k, t, sp.lat_deg, sp.lon_deg});

            auto seed_for = [&](int band) {
                return mix_seed(config.seed,
                                (static_cast<uint64_t>(state.block_index) << 40) ^
                                    (static_cast<uint64_t>(t) << 16) ^
                                    (static_cast<uint64_t>(k) << 8) ^
                                    kBandSalt[band]);
            };

            std::vector<detect::BoundingBox> boxes;
            scene::RasterMeta geo_meta;
            int width = config.scene.n_pixels, height = config.scene.n_pixels;
            if (config.fusion == FusionMode::band6 ||
                config.fusion == FusionMode::band7) {
                scene::Band band = config.fusion == FusionMode::band6
                                       ? scene::Band::band6
                                       : scene::Band::band7;
                scene::Raster img =
                    scene::render(st, el, fires, band, when, config.scene,
                                  seed_for(0), state.satellites[k].config.id);
                boxes = detect::detect_blobs(img, config.detector);
                geo_meta = img.meta;
                if (result.sample_raster.pixels.empty()) result.sample_raster = img;
            } else {
                scene::Raster b6 =
                    scene::render(st, el, fires, scene::Band::band6, when,
                                  config.scene, seed_for(0),
                                  state.satellites[k].config.id);
                scene::Raster b7 =
                    scene::render(st, el, fires, scene::Band::band7, when,
                                  config.scene, seed_for(1),
                                  state.satellites[k].config.id);
                if (config.fusion == FusionMode::early) {
                    scene::Raster fused = detect::early_fuse({b6, b7});
                    boxes = detect::detect_blobs(fused, config.detector);
                } else {
                    std::vector<detect::BoundingBox> all =
                        detect::detect_blobs(b6, config.detector);
                    std::vector<detect::BoundingBox> second =
                        detect::detect_blobs(b7, config.detector);
                    all.insert(all.end(), second.begin(), second.end());
                    boxes = detect::late_fuse(all, 2, config.iou_threshold);
                }
                geo_meta = b6.meta;
                if (result.sample_raster.pixels.empty()) result.sample_raster = b6;
            }

            for (const detect::BoundingBox& box : boxes) {
                detect::Detection det;
                det.box = box;
                det.time = when;
                det.satellite_id = state.satellites[k].config.id;
                try {
                    detect::GeoPoint gp =
                        detect::geolocate(box, geo_meta, width, height);
                    det.lat_deg = gp.lat_deg;
                    det.lon_deg = gp.lon_deg;
                } catch (const std::runtime_error&) {
                    continue;   // polar singularity; drop the box
                }
                step_detections.push_back(std::move(det));
            }
        }

        result.detections += static_cast<int>(step_detections.size());
        int before = state.registry.priority_count();
        for (const detect::Detection& det : step_detections)
            state.registry.register_detection(det, config.detector);
        int after = state.registry.priority_count();

        if (after > before && config.midblock_reschedule && t < T) {
            std::vector<vis::GroundPoint> fresh;
            auto promoted = state.registry.priority();
            for (int i = before; i < after; ++i)
                fresh.push_back({promoted[i]->id, promoted[i]->lat_deg,
                                 promoted[i]->lon_deg,
                                 vis::PointKind::priority_target});
            extend_priority_targets(state.pending, config, block_start, fresh);
            state.pending.schedule = sched::reschedule_remainder(
                state.pending.schedule, state.pending.instance, t + 1,
                solve_options(config));
        }
    }

    // Block accounting from the executed schedule.
    const sched::Schedule& schedule = state.pending.schedule;
    const sched::ResourceParams& r = config.resources;
    if (static_cast<int>(state.useful_credit_mb.size()) < state.block_index)
        state.useful_credit_mb.resize(state.block_index, 0.0);
    for (int k = 0; k < K; ++k) {
        const sched::SatelliteSchedule& ss = schedule.satellites[k];
        SatelliteRuntime& rt = state.satellites[k];
        for (const sched::TaskEvent& ev : ss.events) {
            UtcTime when =
                block_start + static_cast<double>(ev.step - 1) * config.dt_s;
            if (ev.kind == sched::TaskKind::observe) {
                result.data_gathered_mb += r.data_obs_mb;
                result.battery_used_kj += r.batt_obs_kj;
                const vis::GroundPoint& target =
                    state.pending.priority_points[ev.object_index];
                rt.onboard.push_back({r.data_obs_mb, true, target.lat_deg,
                                      target.lon_deg, state.block_index});
            } else if (ev.kind == sched::TaskKind::downlink) {
                result.battery_used_kj += r.batt_comm_kj;
                double remaining = r.data_comm_mb;
                while (remaining > 1e-12 && !rt.onboard.empty()) {
                    DataChunk& chunk = rt.onboard.front();
                    double take = std::min(remaining, chunk.mb);
                    if (chunk.tagged &&
                        near_truth(chunk.lat_deg, chunk.lon_deg, fires, when,
                                   config.match_radius_deg))
                        state.useful_credit_mb[chunk.gathered_block - 1] += take;
                    chunk.mb -= take;
                    remaining -= take;
                    if (chunk.mb <= 1e-12) rt.onboard.pop_front();
                }
            }
        }
        result.battery_used_kj += r.batt_time_kj * T + r.batt_recon_kj * S;
        result.maneuver_cost_km_s += ss.maneuver_cost_total;
    }
    result.useful_data_mb = state.useful_credit_mb[state.block_index - 1];

    UtcTime block_end = block_start + config.block_duration_s;
    result.priority_count = state.registry.priority_count();
    for (const auto* t : state.registry.priority())
        if (near_truth(t->lat_deg, t->lon_deg, fires, block_end,
                       config.match_radius_deg))
            result.true_positives += 1;
    for (const auto& f : fires)
        if (f.start_time <= block_end) result.cumulative_active_fires += 1;
    result.registry = state.registry;
    result.schedule = schedule;

    // Carry final conditions into the next block.
    for (int k = 0; k < K; ++k) {
        const sched::SatelliteSchedule& ss = schedule.satellites[k];
        SatelliteRuntime& rt = state.satellites[k];
        int final_slot = ss.slot_path[S];
        rt.current = orbit::reanchor(state.pending.grids[k][S].slots[final_slot],
                                     block_end);
        rt.data_mb = ss.final_data_mb;
        rt.battery_kj = ss.final_battery_kj;
        rt.budget_remaining_km_s -= ss.maneuver_cost_total;
    }

    state.block_index += 1;
    state.block_start = block_end;
    if (result.block_index < config.n_blocks)
        state.pending = prepare_block(config, state.satellites, state.registry,
                                      block_end, /*allow_maneuvers=*/true,
                                      state.block_index == config.n_blocks);
    return result;
}

MissionReport run_mission(const MissionConfig& config) {
    UtcTime mission_end =
        config.start + config.block_duration_s * config.n_blocks;
    std::vector<scene::FireTruth> fires =
        scene::ingest_fires(config.fires_path, UtcTime{0.0}, mission_end);

    MissionState state = init_mission_state(config);
    MissionReport report;
    report.fires = fires;
    for (int b = 1; b <= config.n_blocks; ++b) {
        BlockResult block = run_block(state, config, fires);
        report.total_z += block.schedule.objective;
        report.total_data_mb += block.data_gathered_mb;
        report.total_battery_kj += block.battery_used_kj;
        report.total_maneuver_km_s += block.maneuver_cost_km_s;
        report.blocks.push_back(std::move(block));
    }
    // Downlinks in later blocks may have credited earlier gathering blocks.
    for (auto& block : report.blocks) {
        block.useful_data_mb = state.useful_credit_mb[block.block_index - 1];
        report.total_useful_mb += block.useful_data_mb;
    }
    report.final_registry = state.registry;

    std::vector<detect::Detection> priority_dets;
    for (const auto* t : state.registry.priority()) {
        detect::Detection det;
        det.lat_deg = t->lat_deg;
        det.lon_deg = t->lon_deg;
        det.box.confidence = t->confidence;
        priority_dets.push_back(det);
    }
    report.priority_metrics =
        detect::score_detections(priority_dets, fires, config.match_radius_deg);
    return report;
}

int passive_cadence_check(const orbit::OrbitalElements& elements, double dt_s) {
    if (dt_s <= 0.0)
        throw std::invalid_argument("passive_cadence_check: dt must be > 0");
    return static_cast<int>(std::floor(orbit::orbital_period_s(elements) / dt_s));
}

} // namespace firesat::mission
