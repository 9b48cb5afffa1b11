#include "firesat/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace firesat::io {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("bad json in '" + path + "': " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

/// Tracks key consumption on a JSON object; unknown keys are errors.
class Strict {
public:
    Strict(const json& j, std::string context)
        : j_(j), context_(std::move(context)) {
        if (!j_.is_object())
            throw std::runtime_error(context_ + ": expected an object");
    }
    const json* opt(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    const json& req(const std::string& key) {
        const json* v = opt(key);
        if (!v)
            throw std::runtime_error(context_ + ": missing required key '" +
                                     key + "'");
        return *v;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw std::runtime_error(context_ + ": unknown key '" +
                                         it.key() + "'");
    }

private:
    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

template <typename T>
void maybe(Strict& s, const std::string& key, T& out) {
    if (const json* v = s.opt(key)) out = v->get<T>();
}

// --- element / point / config conversions -----------------------------------

json elements_to_json(const orbit::OrbitalElements& el) {
    return {{"semi_major_axis_km", el.semi_major_axis_km},
            {"eccentricity", el.eccentricity},
            {"inclination_deg", el.inclination_deg},
            {"raan_deg", el.raan_deg},
            {"arg_perigee_deg", el.arg_perigee_deg},
            {"true_anomaly_deg", el.true_anomaly_deg},
            {"epoch", format_utc(el.epoch)}};
}

orbit::OrbitalElements elements_from_json(const json& j, const std::string& ctx) {
    Strict s(j, ctx);
    orbit::OrbitalElements el;
    el.semi_major_axis_km = s.req("semi_major_axis_km").get<double>();
    el.eccentricity = s.req("eccentricity").get<double>();
    el.inclination_deg = s.req("inclination_deg").get<double>();
    el.raan_deg = s.req("raan_deg").get<double>();
    el.arg_perigee_deg = s.req("arg_perigee_deg").get<double>();
    el.true_anomaly_deg = s.req("true_anomaly_deg").get<double>();
    el.epoch = parse_utc(s.req("epoch").get<std::string>());
    s.finish();
    orbit::check_elements(el);
    return el;
}

vis::GroundPoint station_from_json(const json& j, const std::string& ctx) {
    Strict s(j, ctx);
    vis::GroundPoint p;
    p.id = s.req("id").get<std::string>();
    p.lat_deg = s.req("lat_deg").get<double>();
    p.lon_deg = s.req("lon_deg").get<double>();
    p.kind = vis::PointKind::ground_station;
    s.finish();
    if (p.lat_deg < -90.0 || p.lat_deg > 90.0)
        throw std::runtime_error(ctx + ": latitude outside [-90, 90]");
    return p;
}

detect::DetectorProfile detector_from_json(const json& j, const std::string& ctx) {
    Strict s(j, ctx);
    detect::DetectorProfile p;
    maybe(s, "threshold", p.threshold);
    maybe(s, "min_blob_px", p.min_blob_px);
    maybe(s, "confidence_gain", p.confidence_gain);
    maybe(s, "map_value", p.map_value);
    s.finish();
    if (p.map_value <= 0.0 || p.map_value >= 1.0)
        throw std::runtime_error(ctx + ": map_value must be in (0, 1)");
    return p;
}

scene::SceneConfig scene_from_json(const json& j, const std::string& ctx) {
    Strict s(j, ctx);
    scene::SceneConfig c;
    maybe(s, "n_pixels", c.n_pixels);
    maybe(s, "half_angle_deg", c.half_angle_deg);
    maybe(s, "band6_gain", c.band6_gain);
    maybe(s, "band7_gain", c.band7_gain);
    maybe(s, "day_background", c.day_background);
    maybe(s, "night_background", c.night_background);
    maybe(s, "noise_amplitude", c.noise_amplitude);
    maybe(s, "min_sigma_px", c.min_sigma_px);
    s.finish();
    return c;
}

sched::ResourceParams resources_from_json(const json& j, const std::string& ctx) {
    Strict s(j, ctx);
    sched::ResourceParams r;
    maybe(s, "data_obs_mb", r.data_obs_mb);
    maybe(s, "data_comm_mb", r.data_comm_mb);
    maybe(s, "data_min_mb", r.data_min_mb);
    maybe(s, "data_max_mb", r.data_max_mb);
    maybe(s, "batt_charge_kj", r.batt_charge_kj);
    maybe(s, "batt_obs_kj", r.batt_obs_kj);
    maybe(s, "batt_comm_kj", r.batt_comm_kj);
    maybe(s, "batt_recon_kj", r.batt_recon_kj);
    maybe(s, "batt_time_kj", r.batt_time_kj);
    maybe(s, "batt_min_kj", r.batt_min_kj);
    maybe(s, "batt_max_kj", r.batt_max_kj);
    s.finish();
    return r;
}

json resources_to_json(const sched::ResourceParams& r) {
    return {{"data_obs_mb", r.data_obs_mb},       {"data_comm_mb", r.data_comm_mb},
            {"data_min_mb", r.data_min_mb},       {"data_max_mb", r.data_max_mb},
            {"batt_charge_kj", r.batt_charge_kj}, {"batt_obs_kj", r.batt_obs_kj},
            {"batt_comm_kj", r.batt_comm_kj},     {"batt_recon_kj", r.batt_recon_kj},
            {"batt_time_kj", r.batt_time_kj},     {"batt_min_kj", r.batt_min_kj},
            {"batt_max_kj", r.batt_max_kj}};
}

conf::RegistryConfig registry_config_from_json(const json& j,
                                               const std::string& ctx) {
    Strict s(j, ctx);
    conf::RegistryConfig c;
    maybe(s, "promotion_threshold", c.promotion_threshold);
    maybe(s, "cluster_radius_deg", c.cluster_radius_deg);
    maybe(s, "top_k", c.top_k);
    s.finish();
    return c;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, orbit::OrbitalElements>> load_elements_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open elements file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    std::size_t first = text.find_first_not_of(" \t\r\n");
    std::vector<std::pair<std::string, orbit::OrbitalElements>> out;
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
        json j = json::parse(text);
        if (!j.is_array())
            throw std::runtime_error("elements file '" + path +
                                     "': expected an array of records");
        int n = 0;
        for (const json& rec : j) {
            Strict s(rec, path + " record " + std::to_string(n));
            std::string id = "sat" + std::to_string(n);
            maybe(s, "id", id);
            json el_json = rec;
            el_json.erase("id");
            out.emplace_back(id, elements_from_json(
                                     el_json, path + " record " + std::to_string(n)));
            ++n;
        }
    } else {
        int n = 0;
        for (const orbit::OrbitalElements& el : orbit::parse_tle(text))
            out.emplace_back("sat" + std::to_string(n++), el);
    }
    if (out.empty())
        throw std::runtime_error("elements file '" + path + "': no satellites");
    return out;
}

ScenarioBundle load_bundle(const std::string& path) {
    json root = load_json_file(path);
    Strict top(root, path);
    ScenarioBundle bundle;
    bundle.format_version = top.req("format").get<std::string>();
    if (bundle.format_version != "firesat-bundle-1")
        throw std::runtime_error(path + ": unsupported format '" +
                                 bundle.format_version + "'");
    bundle.base_dir = fs::path(path).parent_path().string();
    auto resolve = [&](const std::string& rel) {
        fs::path p(rel);
        if (p.is_absolute()) return rel;
        return (fs::path(bundle.base_dir) / p).string();
    };

    Strict m(top.req("mission"), path + ": mission");
    mission::MissionConfig& c = bundle.config;
    c.start = parse_utc(m.req("start").get<std::string>());
    c.n_blocks = m.req("n_blocks").get<int>();
    c.block_duration_s = m.req("block_duration_s").get<double>();
    c.dt_s = m.req("dt_s").get<double>();
    c.stages_per_block = m.req("stages_per_block").get<int>();
    c.seed = m.req("seed").get<uint64_t>();

    if (const json* v = m.opt("fusion"))
        c.fusion = mission::fusion_from_name(v->get<std::string>());
    if (const json* v = m.opt("scheduler"))
        c.scheduler = mission::scheduler_from_name(v->get<std::string>());

    double default_budget = 1.0, default_data = 0.0, default_batt = 100.0;
    if (const json* v = m.opt("satellite_defaults")) {
        Strict d(*v, path + ": satellite_defaults");
        maybe(d, "budget_km_s", default_budget);
        maybe(d, "initial_data_mb", default_data);
        maybe(d, "initial_battery_kj", default_batt);
        d.finish();
    }

    const json* inline_sats = m.opt("satellites");
    const json* elements_file = m.opt("elements_file");
    if (inline_sats) {
        int n = 0;
        for (const json& sj : *inline_sats) {
            std::string ctx = path + ": satellites[" + std::to_string(n) + "]";
            Strict s(sj, ctx);
            mission::SatelliteConfig sc;
            sc.id = "sat" + std::to_string(n);
            maybe(s, "id", sc.id);
            sc.elements = elements_from_json(s.req("elements"), ctx + ".elements");
            sc.budget_km_s = default_budget;
            sc.initial_data_mb = default_data;
            sc.initial_battery_kj = default_batt;
            maybe(s, "budget_km_s", sc.budget_km_s);
            maybe(s, "initial_data_mb", sc.initial_data_mb);
            maybe(s, "initial_battery_kj", sc.initial_battery_kj);
            s.finish();
            c.satellites.push_back(std::move(sc));
            ++n;
        }
    }
    if (elements_file) {
        std::string p = resolve(elements_file->get<std::string>());
        if (!fs::exists(p))
            throw std::runtime_error(path + ": elements_file '" + p +
                                     "' does not exist");
        for (auto& [id, el] : load_elements_file(p)) {
            mission::SatelliteConfig sc;
            sc.id = id;
            sc.elements = el;
            sc.budget_km_s = default_budget;
            sc.initial_data_mb = default_data;
            sc.initial_battery_kj = default_batt;
            c.satellites.push_back(std::move(sc));
        }
    }
    if (c.satellites.empty())
        throw std::runtime_error(path + ": no satellites (need 'satellites' or "
                                        "'elements_file')");

    int n = 0;
    for (const json& gj : m.req("ground_stations"))
        c.ground_stations.push_back(station_from_json(
            gj, path + ": ground_stations[" + std::to_string(n++) + "]"));

    c.fires_path = resolve(m.req("fires").get<std::string>());
    if (!fs::exists(c.fires_path))
        throw std::runtime_error(path + ": fires file '" + c.fires_path +
                                 "' does not exist");

    if (const json* v = m.opt("detector"))
        c.detector = detector_from_json(*v, path + ": detector");
    if (const json* v = m.opt("scene"))
        c.scene = scene_from_json(*v, path + ": scene");
    if (const json* v = m.opt("resources"))
        c.resources = resources_from_json(*v, path + ": resources");
    if (const json* v = m.opt("registry"))
        c.registry = registry_config_from_json(*v, path + ": registry");

    maybe(m, "downlink_weight", c.downlink_weight);
    maybe(m, "slot_planes", c.slot_planes);
    maybe(m, "slot_anomalies", c.slot_anomalies);
    maybe(m, "station_min_elevation_deg", c.station_min_elevation_deg);
    maybe(m, "iou_threshold", c.iou_threshold);
    maybe(m, "match_radius_deg", c.match_radius_deg);
    maybe(m, "midblock_reschedule", c.midblock_reschedule);
    maybe(m, "solver_timeout_s", c.solver_timeout_s);
    m.finish();
    top.finish();

    sched::ScheduleHorizon::make(c.block_duration_s, c.dt_s, c.stages_per_block);
    return bundle;
}

// --- tensor cache ------------------------------------------------------------

namespace {

constexpr uint32_t kTensorMagic = 0x54565346;   // "FSVT"
constexpr uint32_t kTensorVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
T take(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("tensor cache: truncated file");
    return v;
}

void put_tensor(std::ostream& out, const BitTensor& t) {
    put<int32_t>(out, t.dim0());
    put<int32_t>(out, t.dim1());
    put<int32_t>(out, t.dim2());
    const auto& words = t.storage().words();
    put<uint64_t>(out, words.size());
    for (uint64_t w : words) put<uint64_t>(out, w);
}

BitTensor take_tensor(std::istream& in) {
    int d0 = take<int32_t>(in);
    int d1 = take<int32_t>(in);
    int d2 = take<int32_t>(in);
    BitTensor t(d0, d1, d2);
    uint64_t n = take<uint64_t>(in);
    if (n != t.storage().words().size())
        throw std::runtime_error("tensor cache: word count mismatch");
    for (uint64_t i = 0; i < n; ++i) t.storage().words()[i] = take<uint64_t>(in);
    return t;
}

} // namespace

void save_tensors(const std::string& path, const vis::VisibilityTensors& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tensor cache '" + path + "'");
    put<uint32_t>(out, kTensorMagic);
    put<uint32_t>(out, kTensorVersion);
    put<int32_t>(out, t.num_stages);
    put<int32_t>(out, t.num_satellites);
    put<int32_t>(out, t.steps_per_stage);
    put<int32_t>(out, t.num_priority);
    put<int32_t>(out, t.num_auxiliary);
    put<int32_t>(out, t.num_stations);
    for (int s = 1; s <= t.num_stages; ++s) {
        for (int k = 0; k < t.num_satellites; ++k) {
            put_tensor(out, t.v(s, k));
            put_tensor(out, t.u(s, k));
            put_tensor(out, t.w(s, k));
            put_tensor(out, t.h(s, k));
        }
    }
}

vis::VisibilityTensors load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor cache '" + path + "'");
    if (take<uint32_t>(in) != kTensorMagic)
        throw std::runtime_error("tensor cache '" + path + "': bad magic");
    uint32_t version = take<uint32_t>(in);
    if (version != kTensorVersion)
        throw std::runtime_error("tensor cache '" + path +
                                 "': unsupported version " + std::to_string(version));
    vis::VisibilityTensors t;
    t.num_stages = take<int32_t>(in);
    t.num_satellites = take<int32_t>(in);
    t.steps_per_stage = take<int32_t>(in);
    t.num_priority = take<int32_t>(in);
    t.num_auxiliary = take<int32_t>(in);
    t.num_stations = take<int32_t>(in);
    t.V.resize(t.num_stages);
    t.U.resize(t.num_stages);
    t.W.resize(t.num_stages);
    t.H.resize(t.num_stages);
    for (int s = 0; s < t.num_stages; ++s) {
        for (int k = 0; k < t.num_satellites; ++k) {
            t.V[s].push_back(take_tensor(in));
            t.U[s].push_back(take_tensor(in));
            t.W[s].push_back(take_tensor(in));
            t.H[s].push_back(take_tensor(in));
        }
    }
    return t;
}

// --- instance / schedule ------------------------------------------------------

void save_instance(const std::string& path, const sched::ScheduleInstance& inst,
                   const std::string& tensors_path) {
    save_tensors(tensors_path, inst.tensors);
    json sats = json::array();
    for (const auto& sat : inst.satellites) {
        sats.push_back({{"id", sat.id},
                        {"slot_counts", sat.slot_counts},
                        {"costs", sat.costs},
                        {"initial_data_mb", sat.initial_data_mb},
                        {"initial_battery_kj", sat.initial_battery_kj},
                        {"budget_km_s", sat.budget_km_s}});
    }
    json j = {{"format", "firesat-instance-1"},
              {"horizon",
               {{"duration_s", inst.horizon.duration_s},
                {"dt_s", inst.horizon.dt_s},
                {"stages", inst.horizon.num_stages}}},
              {"downlink_weight", inst.downlink_weight},
              {"auxiliary_weights", inst.auxiliary_weights},
              {"resources", resources_to_json(inst.resources)},
              {"satellites", sats},
              {"tensors", fs::path(tensors_path).filename().string()}};
    write_text_file(path, j.dump(2) + "\n");
}

sched::ScheduleInstance load_instance(const std::string& path) {
    json j = load_json_file(path);
    Strict top(j, path);
    if (top.req("format").get<std::string>() != "firesat-instance-1")
        throw std::runtime_error(path + ": unsupported instance format");

    Strict hz(top.req("horizon"), path + ": horizon");
    sched::ScheduleHorizon horizon = sched::ScheduleHorizon::make(
        hz.req("duration_s").get<double>(), hz.req("dt_s").get<double>(),
        hz.req("stages").get<int>());
    hz.finish();

    std::vector<sched::SatelliteData> sats;
    for (const json& sj : top.req("satellites")) {
        Strict s(sj, path + ": satellite");
        sched::SatelliteData sd;
        sd.id = s.req("id").get<std::string>();
        sd.slot_counts = s.req("slot_counts").get<std::vector<int>>();
        sd.costs =
            s.req("costs").get<std::vector<std::vector<std::vector<double>>>>();
        sd.initial_data_mb = s.req("initial_data_mb").get<double>();
        sd.initial_battery_kj = s.req("initial_battery_kj").get<double>();
        sd.budget_km_s = s.req("budget_km_s").get<double>();
        s.finish();
        sats.push_back(std::move(sd));
    }

    std::string tensors_name = top.req("tensors").get<std::string>();
    fs::path tensors_path = fs::path(path).parent_path() / tensors_name;
    vis::VisibilityTensors tensors = load_tensors(tensors_path.string());

    double C = top.req("downlink_weight").get<double>();
    std::vector<double> aux =
        top.req("auxiliary_weights").get<std::vector<double>>();
    sched::ResourceParams resources =
        resources_from_json(top.req("resources"), path + ": resources");
    top.finish();
    return sched::build_instance(horizon, std::move(sats), std::move(tensors),
                                 resources, C, std::move(aux));
}

namespace {

std::string task_name(sched::TaskKind k) {
    switch (k) {
        case sched::TaskKind::observe: return "observe";
        case sched::TaskKind::downlink: return "downlink";
        case sched::TaskKind::charge: return "charge";
    }
    return "observe";
}

sched::TaskKind task_from_name(const std::string& s) {
    if (s == "observe") return sched::TaskKind::observe;
    if (s == "downlink") return sched::TaskKind::downlink;
    if (s == "charge") return sched::TaskKind::charge;
    throw std::runtime_error("unknown task kind '" + s + "'");
}

json schedule_to_json(const sched::Schedule& schedule,
                      const std::vector<sched::Violation>& violations = {}) {
    json sats = json::array();
    for (const auto& ss : schedule.satellites) {
        json events = json::array();
        for (const auto& ev : ss.events)
            events.push_back({{"step", ev.step},
                              {"task", task_name(ev.kind)},
                              {"object", ev.object_index}});
        json aux = json::array();
        for (const auto& [t, p] : ss.aux_visits) aux.push_back({t, p});
        sats.push_back({{"slot_path", ss.slot_path},
                        {"events", events},
                        {"aux_visits", aux},
                        {"data_level", ss.data_level},
                        {"battery_level", ss.battery_level},
                        {"final_data_mb", ss.final_data_mb},
                        {"final_battery_kj", ss.final_battery_kj},
                        {"maneuver_cost_km_s", ss.maneuver_cost_total}});
    }
    json viol = json::array();
    for (const auto& v : violations)
        viol.push_back({{"constraint", v.constraint},
                        {"detail", v.detail},
                        {"lhs", v.lhs},
                        {"rhs", v.rhs}});
    return {{"format", "firesat-schedule-1"},
            {"objective", schedule.objective},
            {"status", sched::to_string(schedule.status)},
            {"violations", viol},
            {"satellites", sats}};
}

sched::Schedule schedule_from_json(const json& j, const std::string& ctx) {
    Strict top(j, ctx);
    if (top.req("format").get<std::string>() != "firesat-schedule-1")
        throw std::runtime_error(ctx + ": unsupported schedule format");
    top.opt("violations");   // carried for reporting, not part of the state
    sched::Schedule schedule;
    schedule.objective = top.req("objective").get<double>();
    std::string status = top.req("status").get<std::string>();
    if (status == "optimal") schedule.status = sched::SolverStatus::optimal;
    else if (status == "feasible_timeout")
        schedule.status = sched::SolverStatus::feasible_timeout;
    else if (status == "infeasible")
        schedule.status = sched::SolverStatus::infeasible;
    else throw std::runtime_error(ctx + ": unknown status '" + status + "'");

    for (const json& sj : top.req("satellites")) {
        Strict s(sj, ctx + ": satellite");
        sched::SatelliteSchedule ss;
        ss.slot_path = s.req("slot_path").get<std::vector<int>>();
        for (const json& ej : s.req("events")) {
            Strict e(ej, ctx + ": event");
            sched::TaskEvent ev;
            ev.step = e.req("step").get<int>();
            ev.kind = task_from_name(e.req("task").get<std::string>());
            ev.object_index = e.req("object").get<int>();
            e.finish();
            ss.events.push_back(ev);
        }
        for (const json& aj : s.req("aux_visits"))
            ss.aux_visits.emplace_back(aj.at(0).get<int>(), aj.at(1).get<int>());
        ss.data_level = s.req("data_level").get<std::vector<double>>();
        ss.battery_level = s.req("battery_level").get<std::vector<double>>();
        ss.final_data_mb = s.req("final_data_mb").get<double>();
        ss.final_battery_kj = s.req("final_battery_kj").get<double>();
        ss.maneuver_cost_total = s.req("maneuver_cost_km_s").get<double>();
        s.finish();
        schedule.satellites.push_back(std::move(ss));
    }
    top.finish();
    return schedule;
}

} // namespace

void save_schedule(const std::string& path, const sched::Schedule& schedule,
                   const std::vector<sched::Violation>& violations) {
    write_text_file(path, schedule_to_json(schedule, violations).dump(2) + "\n");
}

sched::Schedule load_schedule(const std::string& path) {
    return schedule_from_json(load_json_file(path), path);
}

// --- registry -----------------------------------------------------------------

void save_registry(const std::string& path, const conf::TargetRegistry& registry) {
    json targets = json::array();
    for (const auto& t : registry.targets()) {
        json history = json::array();
        for (const auto& h : t.history)
            history.push_back(
                {{"time", format_utc(h.time)}, {"confidence", h.raw_confidence}});
        targets.push_back({{"id", t.id},
                           {"lat_deg", t.lat_deg},
                           {"lon_deg", t.lon_deg},
                           {"confidence", t.confidence},
                           {"n_interpretations", t.n_interpretations},
                           {"promoted", t.promoted},
                           {"history", history},
                           {"weight_sum", t.weight_sum},
                           {"weighted_lat_sum", t.weighted_lat_sum},
                           {"weighted_lon_sum", t.weighted_lon_sum}});
    }
    json j = {{"format", "firesat-registry-1"},
              {"config",
               {{"promotion_threshold", registry.config().promotion_threshold},
                {"cluster_radius_deg", registry.config().cluster_radius_deg},
                {"top_k", registry.config().top_k}}},
              {"targets", targets},
              {"priority_order", registry.priority_order()},
              {"next_id", registry.next_id()}};
    write_text_file(path, j.dump(2) + "\n");
}

conf::TargetRegistry load_registry(const std::string& path) {
    json j = load_json_file(path);
    Strict top(j, path);
    if (top.req("format").get<std::string>() != "firesat-registry-1")
        throw std::runtime_error(path + ": unsupported registry format");
    conf::RegistryConfig config =
        registry_config_from_json(top.req("config"), path + ": config");
    std::vector<conf::TrackedTarget> targets;
    for (const json& tj : top.req("targets")) {
        Strict s(tj, path + ": target");
        conf::TrackedTarget t;
        t.id = s.req("id").get<std::string>();
        t.lat_deg = s.req("lat_deg").get<double>();
        t.lon_deg = s.req("lon_deg").get<double>();
        t.confidence = s.req("confidence").get<double>();
        t.n_interpretations = s.req("n_interpretations").get<int>();
        t.promoted = s.req("promoted").get<bool>();
        for (const json& hj : s.req("history")) {
            Strict h(hj, path + ": history");
            t.history.push_back({parse_utc(h.req("time").get<std::string>()),
                                 h.req("confidence").get<double>()});
            h.finish();
        }
        t.weight_sum = s.req("weight_sum").get<double>();
        t.weighted_lat_sum = s.req("weighted_lat_sum").get<double>();
        t.weighted_lon_sum = s.req("weighted_lon_sum").get<double>();
        s.finish();
        targets.push_back(std::move(t));
    }
    auto priority = top.req("priority_order").get<std::vector<int>>();
    int next_id = top.req("next_id").get<int>();
    top.finish();
    return conf::TargetRegistry::restore(config, std::move(targets),
                                         std::move(priority), next_id);
}

// --- detections ----------------------------------------------------------------

void save_detections(const std::string& path,
                     const std::vector<detect::Detection>& detections) {
    std::ostringstream out;
    for (const auto& d : detections) {
        json j = {{"lat_deg", d.lat_deg},
                  {"lon_deg", d.lon_deg},
                  {"time", format_utc(d.time)},
                  {"satellite", d.satellite_id},
                  {"box",
                   {{"x", d.box.x},
                    {"y", d.box.y},
                    {"w", d.box.w},
                    {"h", d.box.h},
                    {"confidence", d.box.confidence},
                    {"source_model", d.box.source_model}}}};
        out << j.dump() << "\n";
    }
    write_text_file(path, out.str());
}

// --- PGM -----------------------------------------------------------------------

void save_raster(const std::string& path, const scene::Raster& raster) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write raster '" + path + "'");
    out << "P5\n" << raster.width << " " << raster.height << "\n65535\n";
    for (double px : raster.pixels) {
        int v = static_cast<int>(std::lround(std::clamp(px, 0.0, 1.0) * 65535.0));
        out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
    }
    const scene::RasterMeta& m = raster.meta;
    json meta = {{"time", format_utc(m.time)},
                 {"satellite", m.satellite_id},
                 {"band", scene::band_name(m.band)},
                 {"gsd_km_per_px", m.gsd_km_per_px},
                 {"half_angle_deg", m.half_angle_deg},
                 {"sat_lat_deg", m.sat_lat_deg},
                 {"sat_lon_deg", m.sat_lon_deg},
                 {"sat_alt_km", m.sat_alt_km},
                 {"sat_inclination_deg", m.sat_inclination_deg},
                 {"sat_vz_km_s", m.sat_vz_km_s},
                 {"seed", m.seed}};
    write_text_file(path + ".json", meta.dump(2) + "\n");
}

scene::Raster load_raster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open raster '" + path + "'");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || maxval != 65535 || w <= 0 || h <= 0)
        throw std::runtime_error("raster '" + path + "': expected 16-bit P5 PGM");
    in.get();   // single whitespace after maxval
    scene::Raster raster;
    raster.width = w;
    raster.height = h;
    raster.pixels.resize(static_cast<std::size_t>(w) * h);
    for (double& px : raster.pixels) {
        int hi = in.get(), lo = in.get();
        if (hi < 0 || lo < 0)
            throw std::runtime_error("raster '" + path + "': truncated payload");
        px = ((hi << 8) | lo) / 65535.0;
    }

    json meta = load_json_file(path + ".json");
    Strict s(meta, path + ".json");
    scene::RasterMeta& m = raster.meta;
    m.time = parse_utc(s.req("time").get<std::string>());
    m.satellite_id = s.req("satellite").get<std::string>();
    m.band = scene::band_from_name(s.req("band").get<std::string>());
    m.gsd_km_per_px = s.req("gsd_km_per_px").get<double>();
    m.half_angle_deg = s.req("half_angle_deg").get<double>();
    m.sat_lat_deg = s.req("sat_lat_deg").get<double>();
    m.sat_lon_deg = s.req("sat_lon_deg").get<double>();
    m.sat_alt_km = s.req("sat_alt_km").get<double>();
    m.sat_inclination_deg = s.req("sat_inclination_deg").get<double>();
    m.sat_vz_km_s = s.req("sat_vz_km_s").get<double>();
    m.seed = s.req("seed").get<uint64_t>();
    s.finish();
    return raster;
}

// --- report --------------------------------------------------------------------

namespace {

json report_to_json(const mission::MissionReport& report) {
    json blocks = json::array();
    for (const auto& b : report.blocks) {
        json track = json::array();
        for (const auto& tp : b.ground_track)
            track.push_back({tp.satellite, tp.step, tp.lat_deg, tp.lon_deg});
        blocks.push_back({{"block", b.block_index},
                          {"start", format_utc(b.start)},
                          {"z", b.schedule.objective},
                          {"data_gathered_mb", b.data_gathered_mb},
                          {"useful_data_mb", b.useful_data_mb},
                          {"battery_used_kj", b.battery_used_kj},
                          {"provided_budget_km_s", b.provided_budget_km_s},
                          {"maneuver_cost_km_s", b.maneuver_cost_km_s},
                          {"detections", b.detections},
                          {"priority_count", b.priority_count},
                          {"true_positives", b.true_positives},
                          {"cumulative_active_fires", b.cumulative_active_fires},
                          {"schedule", schedule_to_json(b.schedule)},
                          {"ground_track", track}});
    }
    return {{"format", "firesat-report-1"},
            {"blocks", blocks},
            {"totals",
             {{"z", report.total_z},
              {"data_mb", report.total_data_mb},
              {"useful_mb", report.total_useful_mb},
              {"battery_kj", report.total_battery_kj},
              {"maneuver_km_s", report.total_maneuver_km_s}}},
            {"priority_metrics",
             {{"precision", report.priority_metrics.precision},
              {"recall", report.priority_metrics.recall},
              {"f_score", report.priority_metrics.f_score},
              {"tp", report.priority_metrics.tp},
              {"fp", report.priority_metrics.fp},
              {"fn", report.priority_metrics.fn}}}};
}

void write_tables(const json& report, const std::string& dir) {
    bool any_blocks = !report.at("blocks").empty();
    std::ostringstream sched_csv;
    sched_csv << "block,z,data_gathered_gb,battery_used_kj,provided_budget_m_s,"
                 "maneuver_cost_m_s\n";
    double sum_z = 0, sum_data = 0, sum_batt = 0, sum_cost = 0;
    for (const json& b : report.at("blocks")) {
        double z = b.at("z").get<double>();
        double data_gb = b.at("data_gathered_mb").get<double>() / 1000.0;
        double batt = b.at("battery_used_kj").get<double>();
        double provided = b.at("provided_budget_km_s").get<double>() * 1000.0;
        double cost = b.at("maneuver_cost_km_s").get<double>() * 1000.0;
        sum_z += z; sum_data += data_gb; sum_batt += batt; sum_cost += cost;
        sched_csv << b.at("block").get<int>() << "," << fmt17(z) << ","
                  << fmt17(data_gb) << "," << fmt17(batt) << ","
                  << fmt17(provided) << "," << fmt17(cost) << "\n";
    }
    if (any_blocks)
        sched_csv << "sum," << fmt17(sum_z) << "," << fmt17(sum_data) << ","
                  << fmt17(sum_batt) << ",," << fmt17(sum_cost) << "\n";
    write_text_file(dir + "/schedule_results.csv", sched_csv.str());

    std::ostringstream det_csv;
    det_csv << "block,cumulative_active_wildfires,detections,priority_targets,"
               "true_positives,useful_data_gb,obtained_data_gb\n";
    double sum_useful = 0, sum_obtained = 0;
    for (const json& b : report.at("blocks")) {
        double useful = b.at("useful_data_mb").get<double>() / 1000.0;
        double obtained = b.at("data_gathered_mb").get<double>() / 1000.0;
        sum_useful += useful; sum_obtained += obtained;
        det_csv << b.at("block").get<int>() << ","
                << b.at("cumulative_active_fires").get<int>() << ","
                << b.at("detections").get<int>() << ","
                << b.at("priority_count").get<int>() << ","
                << b.at("true_positives").get<int>() << "," << fmt17(useful)
                << "," << fmt17(obtained) << "\n";
    }
    if (any_blocks)
        det_csv << "sum,,,,," << fmt17(sum_useful) << "," << fmt17(sum_obtained)
                << "\n";
    write_text_file(dir + "/detection_status.csv", det_csv.str());

    std::ostringstream track_csv;
    track_csv << "block,satellite,step,lat_deg,lon_deg\n";
    std::ostringstream gantt_csv;
    gantt_csv << "block,satellite,step,task,object\n";
    for (const json& b : report.at("blocks")) {
        int block = b.at("block").get<int>();
        for (const json& tp : b.at("ground_track"))
            track_csv << block << "," << tp.at(0).get<int>() << ","
                      << tp.at(1).get<int>() << "," << fmt17(tp.at(2).get<double>())
                      << "," << fmt17(tp.at(3).get<double>()) << "\n";
        const json& sats = b.at("schedule").at("satellites");
        for (std::size_t k = 0; k < sats.size(); ++k)
            for (const json& ev : sats[k].at("events"))
                gantt_csv << block << "," << k << "," << ev.at("step").get<int>()
                          << "," << ev.at("task").get<std::string>() << ","
                          << ev.at("object").get<int>() << "\n";
    }
    write_text_file(dir + "/ground_track.csv", track_csv.str());
    write_text_file(dir + "/task_timing.csv", gantt_csv.str());

    const json& totals = report.at("totals");
    const json& pm = report.at("priority_metrics");
    std::ostringstream summary;
    summary << "metric,value\n";
    summary << "total_z," << fmt17(totals.at("z").get<double>()) << "\n";
    summary << "total_data_gb," << fmt17(totals.at("data_mb").get<double>() / 1000.0)
            << "\n";
    summary << "total_useful_gb,"
            << fmt17(totals.at("useful_mb").get<double>() / 1000.0) << "\n";
    summary << "total_battery_kj," << fmt17(totals.at("battery_kj").get<double>())
            << "\n";
    summary << "total_maneuver_m_s,"
            << fmt17(totals.at("maneuver_km_s").get<double>() * 1000.0) << "\n";
    summary << "precision," << fmt17(pm.at("precision").get<double>()) << "\n";
    summary << "recall," << fmt17(pm.at("recall").get<double>()) << "\n";
    summary << "f_score," << fmt17(pm.at("f_score").get<double>()) << "\n";
    summary << "true_positives," << pm.at("tp").get<int>() << "\n";
    summary << "false_positives," << pm.at("fp").get<int>() << "\n";
    summary << "false_negatives," << pm.at("fn").get<int>() << "\n";
    write_text_file(dir + "/summary.csv", summary.str());
}

} // namespace

void emit_report(const mission::MissionReport& report, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir))
        throw std::runtime_error("emit_report: cannot create directory '" + dir +
                                 "'");
    json j = report_to_json(report);
    write_text_file(dir + "/report.json", j.dump(2) + "\n");
    write_tables(j, dir);
    for (const auto& b : report.blocks) {
        save_registry(dir + "/registry_block_" + std::to_string(b.block_index) +
                          ".json",
                      b.registry);
        if (!b.sample_raster.pixels.empty())
            save_raster(dir + "/sample_block_" + std::to_string(b.block_index) +
                            ".pgm",
                        b.sample_raster);
    }
}

void render_report_tables(const std::string& dir) {
    write_tables(load_json_file(dir + "/report.json"), dir);
}

} // namespace firesat::io
