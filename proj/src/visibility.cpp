#include "firesat/visibility.hpp"

#include <cmath>
#include <stdexcept>

namespace firesat::vis {

using orbit::kEarthRadiusKm;

Vec3 sun_direction_eci(UtcTime t) {
    // Low-precision solar position (Astronomical Almanac approximation),
    // good to ~0.01 deg; ample for eclipse and day/night tests.
    double d = julian_date(t) - 2451545.0;
    double g = (357.529 + 0.98560028 * d) * kDegToRad;       // mean anomaly
    double q = 280.459 + 0.98564736 * d;                     // mean longitude
    double lambda = (q + 1.915 * std::sin(g) + 0.020 * std::sin(2.0 * g)) * kDegToRad;
    double eps = (23.439 - 0.00000036 * d) * kDegToRad;      // obliquity
    return Vec3{std::cos(lambda),
                std::cos(eps) * std::sin(lambda),
                std::sin(eps) * std::sin(lambda)};
}

bool target_visible(const orbit::StateVector& state, const GroundPoint& point,
                    double sensor_half_angle_deg,
                    const orbit::EarthRotationModel& earth) {
    Vec3 r_sat = state.position_km;
    Vec3 r_pt = orbit::ground_position_eci(point.lat_deg, point.lon_deg,
                                           state.time, earth);
    Vec3 to_pt = r_pt - r_sat;
    double d = to_pt.norm();
    if (d <= 0.0) return true;

    // Above the point's local horizon (spherical Earth line of sight).
    if (r_pt.normalized().dot(r_sat - r_pt) < 0.0) return false;

    Vec3 nadir = (Vec3{} - r_sat).normalized();
    double cos_off = nadir.dot(to_pt / d);
    double off_nadir = std::acos(std::clamp(cos_off, -1.0, 1.0)) * kRadToDeg;
    return off_nadir <= sensor_half_angle_deg;
}

bool station_visible(const orbit::StateVector& state, const GroundPoint& station,
                     double min_elevation_deg,
                     const orbit::EarthRotationModel& earth) {
    Vec3 r_stn = orbit::ground_position_eci(station.lat_deg, station.lon_deg,
                                            state.time, earth);
    Vec3 to_sat = state.position_km - r_stn;
    double d = to_sat.norm();
    if (d <= 0.0) return true;
    double sin_elev = r_stn.normalized().dot(to_sat / d);
    double elev = std::asin(std::clamp(sin_elev, -1.0, 1.0)) * kRadToDeg;
    return elev >= min_elevation_deg;
}

bool sun_visible(const orbit::StateVector& state) {
    Vec3 s = sun_direction_eci(state.time);
    Vec3 r = state.position_km;
    double along = r.dot(s);
    if (along >= 0.0) return true;                 // sun side of the plane
    Vec3 perp = r - s * along;
    return perp.norm() >= kEarthRadiusKm;          // outside the shadow cylinder
}

bool ground_sunlit(double lat_deg, double lon_deg, UtcTime t,
                   const orbit::EarthRotationModel& earth) {
    Vec3 r = orbit::ground_position_eci(lat_deg, lon_deg, t, earth);
    return r.dot(sun_direction_eci(t)) > 0.0;
}

VisibilityTensors compute_tensors(
    const std::vector<std::vector<orbit::SlotGrid>>& grids,
    int num_stages, int steps_per_stage, double dt_s, UtcTime start,
    const std::vector<GroundPoint>& priority_targets,
    const std::vector<GroundPoint>& auxiliary_targets,
    const std::vector<GroundPoint>& stations,
    const VisibilityConfig& config) {
    int K = static_cast<int>(grids.size());
    if (K == 0) throw std::invalid_argument("compute_tensors: no satellites");
    for (const auto& g : grids)
        if (static_cast<int>(g.size()) != num_stages + 1)
            throw std::invalid_argument(
                "compute_tensors: grids must cover stages 0..S");

    VisibilityTensors out;
    out.num_stages = num_stages;
    out.num_satellites = K;
    out.steps_per_stage = steps_per_stage;
    out.num_priority = static_cast<int>(priority_targets.size());
    out.num_auxiliary = static_cast<int>(auxiliary_targets.size());
    out.num_stations = static_cast<int>(stations.size());
    out.V.resize(num_stages);
    out.U.resize(num_stages);
    out.W.resize(num_stages);
    out.H.resize(num_stages);

    for (int s = 1; s <= num_stages; ++s) {
        for (int k = 0; k < K; ++k) {
            int J = grids[k][s].size();
            BitTensor V(steps_per_stage, J, out.num_priority);
            BitTensor U(steps_per_stage, J, out.num_auxiliary);
            BitTensor W(steps_per_stage, J, out.num_stations);
            BitTensor H(steps_per_stage, J, 1);
            for (int t = 0; t < steps_per_stage; ++t) {
                UtcTime when =
                    start + (static_cast<double>(s - 1) * steps_per_stage + t) * dt_s;
                for (int j = 0; j < J; ++j) {
                    orbit::StateVector st =
                        orbit::propagate(grids[k][s].slots[j], when);
                    for (int p = 0; p < out.num_priority; ++p)
                        V.set(t, j, p,
                              target_visible(st, priority_targets[p],
                                             config.sensor_half_angle_deg,
                                             config.earth));
                    for (int p = 0; p < out.num_auxiliary; ++p)
                        U.set(t, j, p,
                              target_visible(st, auxiliary_targets[p],
                                             config.sensor_half_angle_deg,
                                             config.earth));
                    for (int g = 0; g < out.num_stations; ++g)
                        W.set(t, j, g,
                              station_visible(st, stations[g],
                                              config.station_min_elevation_deg,
                                              config.earth));
                    H.set(t, j, 0, sun_visible(st));
                }
            }
            out.V[s - 1].push_back(std::move(V));
            out.U[s - 1].push_back(std::move(U));
            out.W[s - 1].push_back(std::move(W));
            out.H[s - 1].push_back(std::move(H));
        }
    }
    return out;
}

} // namespace firesat::vis
