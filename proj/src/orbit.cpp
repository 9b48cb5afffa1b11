#include "firesat/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace firesat::orbit {

namespace {

double kepler_mean_to_eccentric(double mean_anom_rad, double e) {
    // Newton iteration; E = M is an adequate start for e < 0.8.
    double E = e < 0.8 ? mean_anom_rad : kPi;
    for (int it = 0; it < 50; ++it) {
        double f = E - e * std::sin(E) - mean_anom_rad;
        double fp = 1.0 - e * std::cos(E);
        double dE = f / fp;
        E -= dE;
        if (std::fabs(dE) < 1e-13) return E;
    }
    throw std::runtime_error("kepler solver did not converge");
}

double true_to_eccentric(double nu_rad, double e) {
    return std::atan2(std::sqrt(1.0 - e * e) * std::sin(nu_rad),
                      e + std::cos(nu_rad));
}

double eccentric_to_true(double E, double e) {
    return std::atan2(std::sqrt(1.0 - e * e) * std::sin(E),
                      std::cos(E) - e);
}

// Folds (inclination, raan) back into i in [0, 180].
void normalize_plane(double& inc_deg, double& raan_deg) {
    inc_deg = std::fmod(inc_deg, 360.0);
    if (inc_deg < 0.0) inc_deg += 360.0;
    if (inc_deg > 180.0) {
        inc_deg = 360.0 - inc_deg;
        raan_deg += 180.0;
    }
    raan_deg = wrap_deg_360(raan_deg);
}

} // namespace

void check_elements(const OrbitalElements& el) {
    if (!(el.semi_major_axis_km > kEarthRadiusKm))
        throw std::invalid_argument("elements: semi_major_axis must exceed Earth radius");
    if (el.eccentricity < 0.0 || el.eccentricity >= 1.0)
        throw std::invalid_argument("elements: eccentricity must be in [0, 1)");
    if (el.inclination_deg < 0.0 || el.inclination_deg > 180.0)
        throw std::invalid_argument("elements: inclination must be in [0, 180]");
}

double orbital_period_s(const OrbitalElements& el) {
    double a = el.semi_major_axis_km;
    return 2.0 * kPi * std::sqrt(a * a * a / kMuEarth);
}

double circular_speed_km_s(double a) {
    return std::sqrt(kMuEarth / a);
}

StateVector propagate(const OrbitalElements& el, UtcTime t) {
    check_elements(el);
    double a = el.semi_major_axis_km;
    double e = el.eccentricity;
    double n = std::sqrt(kMuEarth / (a * a * a));

    double nu0 = el.true_anomaly_deg * kDegToRad;
    double E0 = true_to_eccentric(nu0, e);
    double M0 = E0 - e * std::sin(E0);
    double M = M0 + n * (t - el.epoch);
    M = std::fmod(M, 2.0 * kPi);

    double E = kepler_mean_to_eccentric(M, e);
    double nu = eccentric_to_true(E, e);
    double r = a * (1.0 - e * std::cos(E));

    // Perifocal position/velocity.
    double p = a * (1.0 - e * e);
    double cos_nu = std::cos(nu), sin_nu = std::sin(nu);
    Vec3 r_pf{r * cos_nu, r * sin_nu, 0.0};
    double vf = std::sqrt(kMuEarth / p);
    Vec3 v_pf{-vf * sin_nu, vf * (e + cos_nu), 0.0};

    // Rotate perifocal -> ECI: R3(-raan) R1(-i) R3(-argp).
    double ci = std::cos(el.inclination_deg * kDegToRad);
    double si = std::sin(el.inclination_deg * kDegToRad);
    double cO = std::cos(el.raan_deg * kDegToRad);
    double sO = std::sin(el.raan_deg * kDegToRad);
    double cw = std::cos(el.arg_perigee_deg * kDegToRad);
    double sw = std::sin(el.arg_perigee_deg * kDegToRad);

    auto rotate = [&](const Vec3& v) {
        double x1 = cw * v.x - sw * v.y;
        double y1 = sw * v.x + cw * v.y;
        double z1 = v.z;
        double y2 = ci * y1 - si * z1;
        double z2 = si * y1 + ci * z1;
        return Vec3{cO * x1 - sO * y2, sO * x1 + cO * y2, z2};
    };

    return StateVector{rotate(r_pf), rotate(v_pf), t};
}

OrbitalElements reanchor(const OrbitalElements& el, UtcTime t) {
    double a = el.semi_major_axis_km;
    double e = el.eccentricity;
    double n = std::sqrt(kMuEarth / (a * a * a));
    double E0 = true_to_eccentric(el.true_anomaly_deg * kDegToRad, e);
    double M = E0 - e * std::sin(E0) + n * (t - el.epoch);
    double E = kepler_mean_to_eccentric(std::fmod(M, 2.0 * kPi), e);
    OrbitalElements out = el;
    out.true_anomaly_deg = wrap_deg_360(eccentric_to_true(E, e) * kRadToDeg);
    out.epoch = t;
    return out;
}

SubPoint subpoint(const StateVector& state, const EarthRotationModel& earth) {
    double r = state.position_km.norm();
    if (!(r > kEarthRadiusKm))
        throw std::invalid_argument("subpoint: position inside Earth");
    double lat = std::asin(state.position_km.z / r) * kRadToDeg;
    double lon_inertial =
        std::atan2(state.position_km.y, state.position_km.x) * kRadToDeg;
    double lon = wrap_deg_180(lon_inertial - earth.greenwich_angle_deg(state.time));
    return SubPoint{lat, lon, r - kEarthRadiusKm};
}

Vec3 ground_position_eci(double lat_deg, double lon_deg, UtcTime t,
                         const EarthRotationModel& earth) {
    double lon_inertial = (lon_deg + earth.greenwich_angle_deg(t)) * kDegToRad;
    double lat = lat_deg * kDegToRad;
    return Vec3{kEarthRadiusKm * std::cos(lat) * std::cos(lon_inertial),
                kEarthRadiusKm * std::cos(lat) * std::sin(lon_inertial),
                kEarthRadiusKm * std::sin(lat)};
}

SlotGrid build_slot_grid(const OrbitalElements& current, double budget_km_s,
                         int n_planes, int n_anomaly) {
    check_elements(current);
    if (budget_km_s < 0.0)
        throw std::invalid_argument("build_slot_grid: negative budget");
    if (n_planes < 1 || n_planes % 2 == 0)
        throw std::invalid_argument("build_slot_grid: n_planes must be odd >= 1");
    if (n_anomaly < 1)
        throw std::invalid_argument("build_slot_grid: n_anomaly must be >= 1");

    double v = circular_speed_km_s(current.semi_major_axis_km);
    double theta_max = 2.0 * std::asin(std::min(1.0, budget_km_s / (2.0 * v)));
    double di_max_deg = theta_max * kRadToDeg;

    // RAAN offset sized so the farthest RAAN plane also costs the full budget:
    // cos(theta) = cos^2 i + sin^2 i cos(dOmega).
    double si = std::sin(current.inclination_deg * kDegToRad);
    double dom_max_deg = 0.0;
    if (si * si > 1e-12) {
        double c = (std::cos(theta_max) - 1.0) / (si * si) + 1.0;
        dom_max_deg = std::acos(std::clamp(c, -1.0, 1.0)) * kRadToDeg;
    }

    // Plane offsets: (di, dOmega) pairs, nominal plane shared.
    std::vector<std::pair<double, double>> planes;
    int half = n_planes / 2;
    auto push_unique = [&](double di, double dom) {
        for (const auto& p : planes)
            if (std::fabs(p.first - di) < 1e-12 && std::fabs(p.second - dom) < 1e-12)
                return;
        planes.emplace_back(di, dom);
    };
    for (int i = -half; i <= half; ++i)
        push_unique(half > 0 ? di_max_deg * i / half : 0.0, 0.0);
    for (int i = -half; i <= half; ++i)
        push_unique(0.0, half > 0 ? dom_max_deg * i / half : 0.0);

    SlotGrid grid;
    grid.n_inclination_planes = n_planes;
    grid.n_raan_planes = n_planes;
    grid.anomaly_count = n_anomaly;

    for (const auto& [di, dom] : planes) {
        for (int m = 0; m < n_anomaly; ++m) {
            OrbitalElements slot = current;
            double inc = current.inclination_deg + di;
            double raan = current.raan_deg + dom;
            normalize_plane(inc, raan);
            slot.inclination_deg = inc;
            slot.raan_deg = raan;
            slot.true_anomaly_deg =
                wrap_deg_360(current.true_anomaly_deg + 360.0 * m / n_anomaly);
            if (std::fabs(di) < 1e-12 && std::fabs(dom) < 1e-12 && m == 0)
                grid.current_slot_index = static_cast<int>(grid.slots.size());
            grid.slots.push_back(slot);
        }
    }
    return grid;
}

double phasing_cost(double a, double dnu_deg, int k_rev) {
    if (k_rev < 1) throw std::invalid_argument("phasing_cost: k_rev must be >= 1");
    double dnu = wrap_deg_360(dnu_deg);
    double period = 2.0 * kPi * std::sqrt(a * a * a / kMuEarth);
    double v = circular_speed_km_s(a);

    double best = std::numeric_limits<double>::infinity();
    // Drift forward by dnu or backward by (360 - dnu).
    for (double delta : {dnu, dnu - 360.0}) {
        double t_phase = period * (1.0 - delta / (360.0 * k_rev));
        double a_phase = std::cbrt(kMuEarth * t_phase * t_phase / (4.0 * kPi * kPi));
        double r_perigee = std::min(a, 2.0 * a_phase - a);
        if (r_perigee <= kEarthRadiusKm) continue;   // dips below the surface
        double v_phase = std::sqrt(kMuEarth * (2.0 / a - 1.0 / a_phase));
        best = std::min(best, 2.0 * std::fabs(v_phase - v));
    }
    if (!std::isfinite(best))
        throw std::runtime_error("phasing_cost: no feasible phasing ellipse");
    return best;
}

double maneuver_cost(const OrbitalElements& from, const OrbitalElements& to,
                     int k_rev_max) {
    if (std::fabs(from.eccentricity) > 1e-9 || std::fabs(to.eccentricity) > 1e-9)
        throw std::invalid_argument("maneuver_cost: slots must be circular");
    if (std::fabs(from.semi_major_axis_km - to.semi_major_axis_km) > 1e-6)
        throw std::invalid_argument("maneuver_cost: slots must share semi-major axis");

    double a = from.semi_major_axis_km;
    double v = circular_speed_km_s(a);

    double i1 = from.inclination_deg * kDegToRad;
    double i2 = to.inclination_deg * kDegToRad;
    double dom = (to.raan_deg - from.raan_deg) * kDegToRad;
    double cos_theta = std::cos(i1) * std::cos(i2) +
                       std::sin(i1) * std::sin(i2) * std::cos(dom);
    double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
    double dv_plane = 2.0 * v * std::sin(theta / 2.0);

    double u1 = wrap_deg_360(from.arg_perigee_deg + from.true_anomaly_deg);
    double u2 = wrap_deg_360(to.arg_perigee_deg + to.true_anomaly_deg);
    double dnu = wrap_deg_360(u2 - u1);

    double dv_phase = 0.0;
    if (dnu > 1e-12 && dnu < 360.0 - 1e-12) {
        dv_phase = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int k = 1; k <= k_rev_max; ++k) {
            try {
                dv_phase = std::min(dv_phase, phasing_cost(a, dnu, k));
                any = true;
            } catch (const std::runtime_error&) {
                // this k_rev dips below the surface; try the next one
            }
        }
        if (!any)
            throw std::runtime_error("maneuver_cost: all phasing candidates infeasible");
    }
    return dv_plane + dv_phase;
}

std::vector<std::vector<double>> cost_matrix(const SlotGrid& from,
                                             const SlotGrid& to, int k_rev_max) {
    std::vector<std::vector<double>> cost(from.slots.size(),
                                          std::vector<double>(to.slots.size()));
    for (std::size_t i = 0; i < from.slots.size(); ++i)
        for (std::size_t j = 0; j < to.slots.size(); ++j)
            cost[i][j] = maneuver_cost(from.slots[i], to.slots[j], k_rev_max);
    return cost;
}

std::vector<OrbitalElements> parse_tle(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }

    auto field = [](const std::string& s, int col, int len) {
        if (static_cast<int>(s.size()) < col + len)
            throw std::invalid_argument("parse_tle: truncated line");
        return s.substr(col, len);
    };

    std::vector<OrbitalElements> out;
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
        if (lines[i][0] != '1' || lines[i + 1][0] != '2') continue;
        const std::string& l1 = lines[i];
        const std::string& l2 = lines[i + 1];

        int epoch_year = std::stoi(field(l1, 18, 2));
        epoch_year += epoch_year < 57 ? 2000 : 1900;
        double epoch_doy = std::stod(field(l1, 20, 12));
        UtcTime epoch = parse_utc(std::to_string(epoch_year) + "-01-01T00:00:00Z") +
                        (epoch_doy - 1.0) * 86400.0;

        OrbitalElements el;
        el.inclination_deg = std::stod(field(l2, 8, 8));
        el.raan_deg = std::stod(field(l2, 17, 8));
        el.eccentricity = std::stod("0." + field(l2, 26, 7));
        el.arg_perigee_deg = std::stod(field(l2, 34, 8));
        double mean_anom = std::stod(field(l2, 43, 8)) * kDegToRad;
        double rev_per_day = std::stod(field(l2, 52, 11));
        double n = rev_per_day * 2.0 * kPi / 86400.0;
        el.semi_major_axis_km = std::cbrt(kMuEarth / (n * n));
        el.epoch = epoch;

        double E = kepler_mean_to_eccentric(mean_anom, el.eccentricity);
        el.true_anomaly_deg =
            wrap_deg_360(eccentric_to_true(E, el.eccentricity) * kRadToDeg);
        check_elements(el);
        out.push_back(el);
        ++i;
    }
    if (out.empty())
        throw std::invalid_argument("parse_tle: no element sets found");
    return out;
}

} // namespace firesat::orbit
