// firesat command line: mission simulation, standalone scheduling, detection,
// fusion, visibility precomputation, and report rendering.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "firesat/io.hpp"

namespace fs = std::filesystem;
using namespace firesat;

namespace {

int run_mission_cmd(const std::string& config_path, const std::string& out_dir) {
    io::ScenarioBundle bundle = io::load_bundle(config_path);
    mission::MissionReport report = mission::run_mission(bundle.config);
    io::emit_report(report, out_dir);
    std::printf("mission complete: %d blocks, z=%.4f, data=%.1f MB, out=%s\n",
                static_cast<int>(report.blocks.size()), report.total_z,
                report.total_data_mb, out_dir.c_str());
    return 0;
}

int solve_cmd(const std::string& instance_path, const std::string& out_path,
              double timeout_s) {
    sched::ScheduleInstance instance = io::load_instance(instance_path);
    sched::SolveOptions options;
    options.timeout_s = timeout_s;
    sched::Schedule schedule = sched::solve_exact(instance, options);
    auto violations = sched::validate_schedule(schedule, instance);
    io::save_schedule(out_path, schedule, violations);
    std::printf("status=%s z=%.6f violations=%zu -> %s\n",
                sched::to_string(schedule.status).c_str(), schedule.objective,
                violations.size(), out_path.c_str());
    return violations.empty() ? 0 : 1;
}

int detect_cmd(const std::string& raster_path, const std::string& profile_path,
               const std::string& out_path) {
    scene::Raster raster = io::load_raster(raster_path);
    detect::DetectorProfile profile;
    if (!profile_path.empty()) {
        // Profile files share the bundle's detector block shape.
        std::ifstream in(profile_path);
        if (!in) throw std::runtime_error("cannot open '" + profile_path + "'");
        nlohmann::json j;
        in >> j;
        profile.threshold = j.value("threshold", profile.threshold);
        profile.min_blob_px = j.value("min_blob_px", profile.min_blob_px);
        profile.confidence_gain =
            j.value("confidence_gain", profile.confidence_gain);
        profile.map_value = j.value("map_value", profile.map_value);
    }
    std::vector<detect::BoundingBox> boxes = detect::detect_blobs(raster, profile);
    std::vector<detect::Detection> detections;
    for (const auto& box : boxes) {
        detect::Detection det;
        det.box = box;
        det.time = raster.meta.time;
        det.satellite_id = raster.meta.satellite_id;
        detect::GeoPoint gp =
            detect::geolocate(box, raster.meta, raster.width, raster.height);
        det.lat_deg = gp.lat_deg;
        det.lon_deg = gp.lon_deg;
        detections.push_back(det);
    }
    io::save_detections(out_path, detections);
    std::printf("%zu detections -> %s\n", detections.size(), out_path.c_str());
    return 0;
}

int fuse_early_cmd(const std::vector<std::string>& inputs,
                   const std::string& out_path) {
    std::vector<scene::Raster> rasters;
    for (const auto& p : inputs) rasters.push_back(io::load_raster(p));
    scene::Raster fused = detect::early_fuse(rasters);
    io::save_raster(out_path, fused);
    std::printf("fused %zu rasters -> %s\n", rasters.size(), out_path.c_str());
    return 0;
}

int fuse_late_cmd(const std::vector<std::string>& inputs,
                  const std::string& out_path, double iou_threshold) {
    // Each input: detections JSONL from one model.
    std::vector<detect::BoundingBox> boxes;
    scene::RasterMeta meta{};
    UtcTime when{};
    std::string sat_id;
    for (const auto& p : inputs) {
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot open '" + p + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            detect::BoundingBox box;
            box.x = j.at("box").at("x").get<double>();
            box.y = j.at("box").at("y").get<double>();
            box.w = j.at("box").at("w").get<double>();
            box.h = j.at("box").at("h").get<double>();
            box.confidence = j.at("box").at("confidence").get<double>();
            box.source_model = j.at("box").at("source_model").get<std::string>();
            boxes.push_back(box);
            when = parse_utc(j.at("time").get<std::string>());
            sat_id = j.at("satellite").get<std::string>();
        }
    }
    std::vector<detect::BoundingBox> fused =
        detect::late_fuse(boxes, static_cast<int>(inputs.size()), iou_threshold);
    std::vector<detect::Detection> detections;
    for (const auto& box : fused) {
        detect::Detection det;
        det.box = box;
        det.time = when;
        det.satellite_id = sat_id;
        detections.push_back(det);
    }
    io::save_detections(out_path, detections);
    std::printf("%zu boxes fused into %zu -> %s\n", boxes.size(), fused.size(),
                out_path.c_str());
    return 0;
}

/// Builds a solvable instance for block 1 of a bundle: targets are the fires
/// active at the horizon start, stations come from the bundle.
int visibility_cmd(const std::string& config_path, const std::string& out_dir) {
    io::ScenarioBundle bundle = io::load_bundle(config_path);
    const mission::MissionConfig& c = bundle.config;
    UtcTime end = c.start + c.block_duration_s;
    std::vector<scene::FireTruth> fires =
        scene::ingest_fires(c.fires_path, UtcTime{0.0}, end);

    std::vector<vis::GroundPoint> targets;
    for (const auto& f : fires)
        if (f.start_time <= c.start)
            targets.push_back(
                {f.id, f.lat_deg, f.lon_deg, vis::PointKind::priority_target});

    sched::ScheduleHorizon horizon = sched::ScheduleHorizon::make(
        c.block_duration_s, c.dt_s, c.stages_per_block);
    std::vector<std::vector<orbit::SlotGrid>> grids;
    std::vector<sched::SatelliteData> sats;
    for (const auto& sc : c.satellites) {
        orbit::OrbitalElements current = orbit::reanchor(sc.elements, c.start);
        std::vector<orbit::SlotGrid> per_stage(c.stages_per_block + 1);
        per_stage[0].slots = {current};
        per_stage[0].anomaly_count = 1;
        orbit::SlotGrid options = orbit::build_slot_grid(
            current, sc.budget_km_s, c.slot_planes, c.slot_anomalies);
        for (int s = 1; s <= c.stages_per_block; ++s) per_stage[s] = options;

        sched::SatelliteData sd;
        sd.id = sc.id;
        sd.slot_counts.push_back(1);
        for (int s = 1; s <= c.stages_per_block; ++s)
            sd.slot_counts.push_back(options.size());
        sd.costs.push_back(orbit::cost_matrix(per_stage[0], per_stage[1]));
        if (c.stages_per_block > 1) {
            auto inner = orbit::cost_matrix(options, options);
            for (int s = 2; s <= c.stages_per_block; ++s) sd.costs.push_back(inner);
        }
        sd.initial_data_mb = sc.initial_data_mb;
        sd.initial_battery_kj = sc.initial_battery_kj;
        sd.budget_km_s = sc.budget_km_s;
        sats.push_back(std::move(sd));
        grids.push_back(std::move(per_stage));
    }

    vis::VisibilityConfig vcfg;
    vcfg.sensor_half_angle_deg = c.scene.half_angle_deg;
    vcfg.station_min_elevation_deg = c.station_min_elevation_deg;
    vis::VisibilityTensors tensors = vis::compute_tensors(
        grids, c.stages_per_block, horizon.steps_per_stage, c.dt_s, c.start,
        targets, {}, c.ground_stations, vcfg);

    sched::ScheduleInstance instance =
        sched::build_instance(horizon, std::move(sats), std::move(tensors),
                              c.resources, c.downlink_weight, {});
    fs::create_directories(out_dir);
    io::save_instance(out_dir + "/instance.json", instance,
                      out_dir + "/tensors.bin");
    std::printf("instance with %d targets, %d stations -> %s\n",
                instance.num_priority(), instance.num_stations(),
                out_dir.c_str());
    return 0;
}

int fixtures_cmd(const std::string& out_dir) {
    fs::create_directories(out_dir);
    io::save_raster(out_dir + "/island_day.pgm", scene::make_island_day_fixture());
    io::save_raster(out_dir + "/arid_night.pgm", scene::make_arid_night_fixture());
    std::printf("fixtures -> %s\n", out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"firesat: wildfire detection and satellite scheduling simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path = "out", instance_path, raster_path;
    std::string profile_path;
    std::vector<std::string> inputs;
    double timeout_s = 3600.0, iou_threshold = 0.55;

    CLI::App* mission = app.add_subcommand("mission", "run a full mission");
    CLI::App* mission_run = mission->add_subcommand("run", "simulate all blocks");
    mission_run->add_option("--config", config_path, "bundle json")->required();
    mission_run->add_option("--out", out_path, "output directory")->required();

    CLI::App* schedule = app.add_subcommand("schedule", "scheduling tools");
    CLI::App* schedule_solve =
        schedule->add_subcommand("solve", "solve an instance file");
    schedule_solve->add_option("--instance", instance_path, "instance json")
        ->required();
    schedule_solve->add_option("--out", out_path, "schedule json");
    schedule_solve->add_option("--timeout", timeout_s, "solver timeout, s");

    CLI::App* detect_app = app.add_subcommand("detect", "run the blob detector");
    detect_app->add_option("--raster", raster_path, "input pgm")->required();
    detect_app->add_option("--profile", profile_path, "detector profile json");
    detect_app->add_option("--out", out_path, "detections jsonl");

    CLI::App* fuse = app.add_subcommand("fuse", "sensor fusion");
    CLI::App* fuse_early = fuse->add_subcommand("early", "PCA image fusion");
    fuse_early->add_option("--inputs", inputs, "input pgm files")->required();
    fuse_early->add_option("--out", out_path, "fused pgm");
    CLI::App* fuse_late = fuse->add_subcommand("late", "weighted box fusion");
    fuse_late->add_option("--inputs", inputs, "detections jsonl per model")
        ->required();
    fuse_late->add_option("--out", out_path, "fused detections jsonl");
    fuse_late->add_option("--iou", iou_threshold, "IoU clustering threshold");

    CLI::App* visibility = app.add_subcommand("visibility", "visibility tools");
    CLI::App* visibility_compute = visibility->add_subcommand(
        "compute", "precompute tensors and an instance for block 1");
    visibility_compute->add_option("--config", config_path, "bundle json")
        ->required();
    visibility_compute->add_option("--out", out_path, "output directory");

    CLI::App* report = app.add_subcommand("report", "re-render report tables");
    report->add_option("--mission", out_path, "mission output directory")
        ->required();

    CLI::App* fixtures =
        app.add_subcommand("fixtures", "emit the regression fixture scenes");
    fixtures->add_option("--out", out_path, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mission_run->parsed()) return run_mission_cmd(config_path, out_path);
        if (schedule_solve->parsed())
            return solve_cmd(instance_path,
                             out_path == "out" ? "schedule.json" : out_path,
                             timeout_s);
        if (detect_app->parsed())
            return detect_cmd(raster_path, profile_path,
                              out_path == "out" ? "detections.jsonl" : out_path);
        if (fuse_early->parsed())
            return fuse_early_cmd(inputs,
                                  out_path == "out" ? "fused.pgm" : out_path);
        if (fuse_late->parsed())
            return fuse_late_cmd(inputs,
                                 out_path == "out" ? "fused.jsonl" : out_path,
                                 iou_threshold);
        if (visibility_compute->parsed())
            return visibility_cmd(config_path, out_path);
        if (report->parsed()) {
            io::render_report_tables(out_path);
            std::printf("tables refreshed in %s\n", out_path.c_str());
            return 0;
        }
        if (fixtures->parsed()) return fixtures_cmd(out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
