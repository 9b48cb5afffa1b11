#include "firesat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "firesat/rng.hpp"

namespace firesat::scene {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

} // namespace

std::string band_name(Band b) {
    switch (b) {
        case Band::band6: return "band6";
        case Band::band7: return "band7";
        case Band::fused: return "fused";
    }
    return "band6";
}

Band band_from_name(const std::string& name) {
    if (name == "band6") return Band::band6;
    if (name == "band7") return Band::band7;
    if (name == "fused") return Band::fused;
    throw std::invalid_argument("unknown band '" + name + "'");
}

std::vector<FireTruth> ingest_fires(const std::string& path, UtcTime start,
                                    UtcTime end) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("fires csv: cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("fires csv: empty file '" + path + "'");
    std::vector<std::string> cols = split_csv_line(header);
    for (auto& c : cols) c = trim(c);

    auto col_index = [&](const std::string& name, bool required) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        if (required)
            throw std::runtime_error("fires csv: missing column '" + name + "'");
        return -1;
    };
    int c_lat = col_index("latitude", true);
    int c_lon = col_index("longitude", true);
    int c_date = col_index("acq_date", true);
    int c_time = col_index("acq_time", true);
    int c_bri = col_index("brightness", true);
    int c_conf = col_index("confidence", true);
    int c_area = col_index("area_acres", false);

    struct Row {
        int line;
        double lat, lon, brightness, area;
        UtcTime when;
        bool keep;
    };
    std::vector<Row> rows;
    double max_brightness = 0.0;

    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        auto get = [&](int idx) -> std::string {
            if (idx < 0 || idx >= static_cast<int>(f.size()))
                throw std::runtime_error("fires csv line " + std::to_string(lineno) +
                                         ": too few fields");
            return trim(f[idx]);
        };
        Row row{};
        row.line = lineno;
        try {
            row.lat = std::stod(get(c_lat));
            row.lon = std::stod(get(c_lon));
            row.brightness = std::stod(get(c_bri));
            std::string date = get(c_date);
            std::string tm = get(c_time);
            int hhmm = std::stoi(tm);
            int hh = hhmm / 100, mm = hhmm % 100;
            char ts[40];
            std::snprintf(ts, sizeof(ts), "%sT%02d:%02d:00Z", date.c_str(), hh, mm);
            row.when = parse_utc(ts);
            row.area = c_area >= 0 ? std::stod(get(c_area)) : -1.0;
        } catch (const std::exception& e) {
            throw std::runtime_error("fires csv line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        std::string conf = get(c_conf);
        std::transform(conf.begin(), conf.end(), conf.begin(), ::tolower);
        row.keep = (conf == "n" || conf == "h" || conf == "nominal" ||
                    conf == "high") &&
                   row.when >= start && row.when <= end;
        max_brightness = std::max(max_brightness, row.brightness);
        rows.push_back(row);
    }

    // Dedup on a 0.05 deg grid, first occurrence wins.
    std::vector<FireTruth> out;
    std::vector<std::pair<long, long>> seen;
    for (const Row& r : rows) {
        if (!r.keep) continue;
        std::pair<long, long> cell{
            static_cast<long>(std::floor(r.lat / 0.05)),
            static_cast<long>(std::floor(r.lon / 0.05))};
        if (std::find(seen.begin(), seen.end(), cell) != seen.end()) continue;
        seen.push_back(cell);

        FireTruth ft;
        ft.id = "f" + std::to_string(r.line);
        ft.lat_deg = r.lat;
        ft.lon_deg = wrap_deg_180(r.lon);
        ft.start_time = r.when;
        ft.brightness = max_brightness > 0.0 ? r.brightness / max_brightness : 1.0;
        ft.area_acres = r.area >= 0.0 ? r.area : 1000.0 + 4000.0 * ft.brightness;
        out.push_back(ft);
    }
    return out;
}

double gsd(const orbit::StateVector& state, double half_angle_deg, int n_pixels) {
    double alt = state.position_km.norm() - orbit::kEarthRadiusKm;
    return 2.0 * alt * std::tan(half_angle_deg * kDegToRad) / n_pixels;
}

std::optional<PixelCoord> project_to_pixel(const RasterMeta& meta, int width,
                                           int height, double lat_deg,
                                           double lon_deg) {
    double dlat = lat_deg - meta.sat_lat_deg;
    double dlon = wrap_deg_180(lon_deg - meta.sat_lon_deg);
    double north_km = dlat * 110.574;
    double east_km = dlon * 111.320 * std::cos((meta.sat_lat_deg + dlat) * kDegToRad);

    double theta_deg = meta.sat_vz_km_s >= 0.0 ? meta.sat_inclination_deg
                                               : -meta.sat_inclination_deg;
    double rho_km = std::hypot(north_km, east_km);
    double dx = 0.0, dy = 0.0;
    if (rho_km > 0.0) {
        double psi_deg = std::atan2(north_km, east_km) * kRadToDeg;
        double phi_deg = psi_deg + 90.0 - theta_deg;
        double rho_px = rho_km / meta.gsd_km_per_px;
        dx = rho_px * std::cos(phi_deg * kDegToRad);
        dy = rho_px * std::sin(phi_deg * kDegToRad);
    }
    PixelCoord pc{width / 2.0 + dx, height / 2.0 - dy};
    if (pc.x < -0.5 || pc.x > width - 0.5 || pc.y < -0.5 || pc.y > height - 0.5)
        return std::nullopt;
    return pc;
}

RasterMeta make_meta(const orbit::StateVector& state,
                     const orbit::OrbitalElements& elements,
                     const std::string& satellite_id, Band band,
                     const SceneConfig& config, uint64_t seed,
                     const orbit::EarthRotationModel& earth) {
    orbit::SubPoint sp = orbit::subpoint(state, earth);
    RasterMeta meta;
    meta.time = state.time;
    meta.satellite_id = satellite_id;
    meta.band = band;
    meta.gsd_km_per_px = gsd(state, config.half_angle_deg, config.n_pixels);
    meta.half_angle_deg = config.half_angle_deg;
    meta.sat_lat_deg = sp.lat_deg;
    meta.sat_lon_deg = sp.lon_deg;
    meta.sat_alt_km = sp.alt_km;
    meta.sat_inclination_deg = elements.inclination_deg;
    meta.sat_vz_km_s = state.velocity_km_s.z;
    meta.seed = seed;
    return meta;
}

Raster render(const orbit::StateVector& state,
              const orbit::OrbitalElements& elements,
              const std::vector<FireTruth>& fires, Band band, UtcTime t,
              const SceneConfig& config, uint64_t seed,
              const std::string& satellite_id,
              const orbit::EarthRotationModel& earth) {
    Raster img;
    img.width = config.n_pixels;
    img.height = config.n_pixels;
    img.meta = make_meta(state, elements, satellite_id, band, config, seed, earth);
    bool day = vis::ground_sunlit(img.meta.sat_lat_deg, img.meta.sat_lon_deg, t, earth);
    double background = day ? config.day_background : config.night_background;
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, background);

    double gain = band == Band::band7 ? config.band7_gain : config.band6_gain;
    for (const FireTruth& fire : fires) {
        if (fire.start_time > t) continue;
        auto pc = project_to_pixel(img.meta, img.width, img.height, fire.lat_deg,
                                   fire.lon_deg);
        if (!pc) continue;
        double sigma = std::max(config.min_sigma_px,
                                std::sqrt(fire.area_acres * kAcreKm2) /
                                    img.meta.gsd_km_per_px / 2.0);
        double peak = fire.brightness * gain;
        int radius = static_cast<int>(std::ceil(4.0 * sigma));
        int x0 = std::max(0, static_cast<int>(std::floor(pc->x)) - radius);
        int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(pc->x)) + radius);
        int y0 = std::max(0, static_cast<int>(std::floor(pc->y)) - radius);
        int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(pc->y)) + radius);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double d2 = (x - pc->x) * (x - pc->x) + (y - pc->y) * (y - pc->y);
                img.at(x, y) += peak * std::exp(-d2 / (2.0 * sigma * sigma));
            }
        }
    }

    SplitMix64 rng(seed);
    for (double& px : img.pixels) {
        px += rng.uniform01() * config.noise_amplitude;
        px = std::clamp(px, 0.0, 1.0);
    }
    return img;
}

namespace {

Raster fixture_base(double base_level, double lat, double lon, double inclination,
                    uint64_t seed, const std::string& id) {
    Raster img;
    img.width = 128;
    img.height = 128;
    img.pixels.assign(128 * 128, base_level);
    img.meta.time = parse_utc("2024-08-07T04:00:00Z");
    img.meta.satellite_id = id;
    img.meta.band = Band::band6;
    img.meta.gsd_km_per_px = 5.3913;
    img.meta.half_angle_deg = 22.5;
    img.meta.sat_lat_deg = lat;
    img.meta.sat_lon_deg = lon;
    img.meta.sat_alt_km = 833.0;
    img.meta.sat_inclination_deg = inclination;
    img.meta.sat_vz_km_s = 3.1;
    img.meta.seed = seed;

    SplitMix64 rng(seed);
    for (double& px : img.pixels) px += rng.uniform01() * 0.02;
    return img;
}

void stamp(Raster& img, int cx, int cy, int r, double level) {
    for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
            if (x >= 0 && x < img.width && y >= 0 && y < img.height &&
                (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                img.at(x, y) = std::min(1.0, level);
}

} // namespace

Raster make_island_day_fixture() {
    // Small bright islands against dark ocean, daytime reflectance.
    Raster img = fixture_base(0.10, 14.6, 120.9, 53.0, 20240807ull, "fixture_island");
    stamp(img, 62, 58, 2, 0.72);
    stamp(img, 68, 62, 1, 0.66);
    stamp(img, 57, 66, 1, 0.61);
    stamp(img, 83, 40, 2, 0.69);
    return img;
}

Raster make_arid_night_fixture() {
    // High-reflectance glinting land segments at night.
    Raster img = fixture_base(0.03, 40.2, 94.7, 53.0, 20240808ull, "fixture_arid");
    stamp(img, 50, 72, 2, 0.58);
    stamp(img, 54, 75, 1, 0.52);
    stamp(img, 90, 30, 1, 0.55);
    stamp(img, 30, 100, 2, 0.60);
    return img;
}

} // namespace firesat::scene
