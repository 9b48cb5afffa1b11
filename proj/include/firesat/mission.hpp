#pragma once

#include <deque>
#include <string>
#include <vector>

#include "firesat/confidence.hpp"
#include "firesat/detect.hpp"
#include "firesat/scene.hpp"
#include "firesat/scheduler.hpp"

namespace firesat::mission {

struct SatelliteConfig {
    std::string id;
    orbit::OrbitalElements elements;
    double budget_km_s = 1.0;
    double initial_data_mb = 0.0;
    double initial_battery_kj = 100.0;
};

enum class FusionMode { band6, band7, early, late };
enum class SchedulerMode { reossp, eossp };

std::string to_string(FusionMode m);
FusionMode fusion_from_name(const std::string& name);
std::string to_string(SchedulerMode m);
SchedulerMode scheduler_from_name(const std::string& name);

struct MissionConfig {
    UtcTime start;
    int n_blocks = 4;
    double block_duration_s = 302400.0;   // 3.5 days
    double dt_s = 100.0;
    int stages_per_block = 4;
    uint64_t seed = 0;

    std::vector<SatelliteConfig> satellites;
    std::vector<vis::GroundPoint> ground_stations;
    std::string fires_path;

    detect::DetectorProfile detector;
    FusionMode fusion = FusionMode::early;
    SchedulerMode scheduler = SchedulerMode::reossp;

    scene::SceneConfig scene;
    sched::ResourceParams resources;
    conf::RegistryConfig registry;
    double downlink_weight = 5.0;

    int slot_planes = 5;
    int slot_anomalies = 15;
    double station_min_elevation_deg = 10.0;
    double iou_threshold = 0.55;
    double match_radius_deg = 0.5;
    bool midblock_reschedule = true;
    double solver_timeout_s = 3600.0;
};

/// Subpoint sample for ground-track plot export.
struct TrackPoint {
    int satellite = 0;
    int step = 0;   // global step within the block, 1-based
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

struct BlockResult {
    int block_index = 0;
    UtcTime start;
    sched::Schedule schedule;
    int detections = 0;           // raw detector outputs in this block
    int priority_count = 0;       // priority set size at block end
    int true_positives = 0;       // priority targets within 0.5 deg of truth
    int cumulative_active_fires = 0;
    conf::TargetRegistry registry;   // snapshot at block end
    double data_gathered_mb = 0.0;
    double useful_data_mb = 0.0;     // downlinked data attributed to true fires
    double battery_used_kj = 0.0;
    double maneuver_cost_km_s = 0.0;
    double provided_budget_km_s = 0.0;
    std::vector<double> provided_budget_per_sat;
    scene::Raster sample_raster;
    std::vector<TrackPoint> ground_track;
};

struct MissionReport {
    std::vector<BlockResult> blocks;
    conf::TargetRegistry final_registry;
    detect::DetectionMetrics priority_metrics;   // greedy 1:1 vs ground truth
    std::vector<scene::FireTruth> fires;
    double total_z = 0.0;
    double total_data_mb = 0.0;
    double total_useful_mb = 0.0;
    double total_battery_kj = 0.0;
    double total_maneuver_km_s = 0.0;
};

/// Onboard data chunk pending downlink, for useful-data attribution (FIFO).
struct DataChunk {
    double mb = 0.0;
    bool tagged = false;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    int gathered_block = 0;   // useful credit lands on the gathering block
};

struct SatelliteRuntime {
    SatelliteConfig config;
    orbit::OrbitalElements current;   // occupied slot, re-anchored
    double data_mb = 0.0;
    double battery_kj = 100.0;
    double budget_remaining_km_s = 0.0;
    std::deque<DataChunk> onboard;
};

/// The schedule prepared for the upcoming block plus everything needed to
/// execute and extend it.
struct PendingBlock {
    sched::ScheduleInstance instance;
    sched::Schedule schedule;
    std::vector<std::vector<orbit::SlotGrid>> grids;   // [k][s], s = 0..S
    std::vector<vis::GroundPoint> priority_points;     // target order in V
    std::vector<double> provided_budget;               // per satellite
};

struct MissionState {
    int block_index = 1;
    UtcTime block_start;
    conf::TargetRegistry registry;
    std::vector<SatelliteRuntime> satellites;
    PendingBlock pending;
    // Useful-data credit per block of gathering; later downlinks can still
    // credit earlier blocks, so run_mission reads the final values.
    std::vector<double> useful_credit_mb;
};

/// Builds block 1: stay-put grids, empty target sets, an all-charge schedule.
MissionState init_mission_state(const MissionConfig& config);

/**
 * Executes one Block: per-step passive rendering and detection, registry
 * updates with mid-block rescheduling on promotions, then preparation and
 * solve of the next Block's instance with budget carryover.
 */
BlockResult run_block(MissionState& state, const MissionConfig& config,
                      const std::vector<scene::FireTruth>& fires);

MissionReport run_mission(const MissionConfig& config);

/// Passive observations per orbital period at the given step size.
int passive_cadence_check(const orbit::OrbitalElements& elements, double dt_s);

} // namespace firesat::mission
