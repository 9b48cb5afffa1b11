#pragma once

#include <string>
#include <vector>

#include "firesat/bits.hpp"
#include "firesat/orbit.hpp"

namespace firesat::vis {

enum class PointKind { priority_target, auxiliary_target, ground_station };

struct GroundPoint {
    std::string id;
    double lat_deg = 0.0;
    double lon_deg = 0.0;   // (-180, 180]
    PointKind kind = PointKind::priority_target;
};

/// Unit sun direction in ECI from a low-precision analytic solar ephemeris.
Vec3 sun_direction_eci(UtcTime t);

/// 1 iff the point lies inside the nadir sensor cone and above its own horizon.
bool target_visible(const orbit::StateVector& state, const GroundPoint& point,
                    double sensor_half_angle_deg,
                    const orbit::EarthRotationModel& earth = {});

/// 1 iff the satellite's elevation above the station horizon is >= the mask
/// (inclusive).
bool station_visible(const orbit::StateVector& state, const GroundPoint& station,
                     double min_elevation_deg,
                     const orbit::EarthRotationModel& earth = {});

/// 1 iff the satellite is outside the cylindrical Earth shadow.
bool sun_visible(const orbit::StateVector& state);

/// True when the surface point itself is sunlit (used for day/night rendering).
bool ground_sunlit(double lat_deg, double lon_deg, UtcTime t,
                   const orbit::EarthRotationModel& earth = {});

/**
 * Binary visibility data for the scheduler, stored per (stage, satellite):
 * V (priority targets), U (auxiliary targets), W (ground stations) have
 * extents (T_s, J_sk, n_objects); H (sun) has extents (T_s, J_sk, 1).
 * Index [s-1][k] for stages s = 1..S.
 */
struct VisibilityTensors {
    int num_stages = 0;
    int num_satellites = 0;
    int steps_per_stage = 0;
    int num_priority = 0;
    int num_auxiliary = 0;
    int num_stations = 0;
    std::vector<std::vector<BitTensor>> V, U, W, H;

    const BitTensor& v(int s, int k) const { return V[s - 1][k]; }
    const BitTensor& u(int s, int k) const { return U[s - 1][k]; }
    const BitTensor& w(int s, int k) const { return W[s - 1][k]; }
    const BitTensor& h(int s, int k) const { return H[s - 1][k]; }

    bool operator==(const VisibilityTensors&) const = default;
};

struct VisibilityConfig {
    double sensor_half_angle_deg = 22.5;
    double station_min_elevation_deg = 10.0;
    orbit::EarthRotationModel earth;
};

/**
 * Evaluates the visibility predicates for every (stage, satellite, step, slot,
 * object) at the step-start instants of the horizon. grids[k][s] holds the
 * slot options of satellite k at stage s (s = 0 is the singleton initial
 * condition). Deterministic.
 */
VisibilityTensors compute_tensors(
    const std::vector<std::vector<orbit::SlotGrid>>& grids,
    int num_stages, int steps_per_stage, double dt_s, UtcTime start,
    const std::vector<GroundPoint>& priority_targets,
    const std::vector<GroundPoint>& auxiliary_targets,
    const std::vector<GroundPoint>& stations,
    const VisibilityConfig& config = {});

} // namespace firesat::vis
