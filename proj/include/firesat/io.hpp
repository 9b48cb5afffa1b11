#pragma once

#include <string>
#include <vector>

#include "firesat/mission.hpp"

namespace firesat::io {

/// A fully validated mission configuration with all referenced paths resolved
/// against the bundle file's directory.
struct ScenarioBundle {
    std::string format_version;
    mission::MissionConfig config;
    std::string base_dir;
};

/**
 * Loads and strictly validates a bundle JSON: unknown keys and missing
 * required keys raise std::runtime_error naming the offending key; defaults
 * fill everything optional; referenced files must exist. Satellite elements
 * come inline or from an elements file (JSON records or TLE text).
 */
ScenarioBundle load_bundle(const std::string& path);

// --- orbital elements -------------------------------------------------------

std::vector<std::pair<std::string, orbit::OrbitalElements>> load_elements_file(
    const std::string& path);

// --- visibility tensor cache (versioned binary) -----------------------------

void save_tensors(const std::string& path, const vis::VisibilityTensors& tensors);
vis::VisibilityTensors load_tensors(const std::string& path);

// --- schedule instance / schedule JSON --------------------------------------

/// Writes the instance JSON; the tensor payload goes to tensors_path and the
/// instance references it by (relative) name.
void save_instance(const std::string& path, const sched::ScheduleInstance& inst,
                   const std::string& tensors_path);
sched::ScheduleInstance load_instance(const std::string& path);

void save_schedule(const std::string& path, const sched::Schedule& schedule,
                   const std::vector<sched::Violation>& violations = {});
sched::Schedule load_schedule(const std::string& path);

// --- registry snapshots -----------------------------------------------------

void save_registry(const std::string& path, const conf::TargetRegistry& registry);
conf::TargetRegistry load_registry(const std::string& path);

// --- detections (JSON lines) ------------------------------------------------

void save_detections(const std::string& path,
                     const std::vector<detect::Detection>& detections);

// --- rasters (16-bit PGM with JSON sidecar) ----------------------------------

void save_raster(const std::string& path, const scene::Raster& raster);
scene::Raster load_raster(const std::string& path);

// --- mission report ---------------------------------------------------------

/**
 * Emits the mission outputs under dir: per-block schedule and detection
 * status CSV tables with sum rows, summary metrics, registry snapshots,
 * ground-track and task-timing CSVs for plotting, and sample rasters.
 * Byte-deterministic for a fixed seed.
 */
void emit_report(const mission::MissionReport& report, const std::string& dir);

/// Re-renders the CSV tables from a previously written report.json.
void render_report_tables(const std::string& dir);

} // namespace firesat::io
