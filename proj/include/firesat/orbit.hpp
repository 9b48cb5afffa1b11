#pragma once

#include <string>
#include <vector>

#include "firesat/time.hpp"
#include "firesat/vec3.hpp"

namespace firesat::orbit {

inline constexpr double kMuEarth = 398600.4418;       // km^3/s^2
inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kEarthRotationRadS = 7.2921159e-5;

/**
 * Classical Keplerian elements. Angles in degrees, semi-major axis in km.
 * Slot grids generated by this module are always circular (e = 0).
 */
struct OrbitalElements {
    double semi_major_axis_km = 0.0;
    double eccentricity = 0.0;
    double inclination_deg = 0.0;
    double raan_deg = 0.0;
    double arg_perigee_deg = 0.0;
    double true_anomaly_deg = 0.0;   // at epoch
    UtcTime epoch;
};

/// Throws std::invalid_argument when an element set is outside its domain.
void check_elements(const OrbitalElements& el);

double orbital_period_s(const OrbitalElements& el);
double circular_speed_km_s(double semi_major_axis_km);

struct StateVector {
    Vec3 position_km;
    Vec3 velocity_km_s;
    UtcTime time;
};

/**
 * Closed-form two-body propagation (Kepler's equation solved by Newton
 * iteration). Deterministic; throws std::runtime_error if the solver fails
 * to converge within 50 iterations, which signals bad input for e < 0.1.
 */
StateVector propagate(const OrbitalElements& el, UtcTime t);

/// Elements with the anomaly advanced so that epoch == t; same orbit.
OrbitalElements reanchor(const OrbitalElements& el, UtcTime t);

/**
 * Earth orientation: Greenwich angle grows linearly from a configurable
 * reference. Default pins the J2000 mean sidereal angle.
 */
struct EarthRotationModel {
    double greenwich_deg_at_ref = 280.46061837;
    UtcTime ref{kJ2000UnixSec};
    double rotation_rad_s = kEarthRotationRadS;

    double greenwich_angle_deg(UtcTime t) const {
        return wrap_deg_360(greenwich_deg_at_ref +
                            rotation_rad_s * (t - ref) * kRadToDeg);
    }
};

struct SubPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;   // in (-180, 180]
    double alt_km = 0.0;
};

/// Spherical-Earth sub-satellite point.
SubPoint subpoint(const StateVector& state, const EarthRotationModel& earth = {});

/// ECI position of a surface point at time t (spherical Earth).
Vec3 ground_position_eci(double lat_deg, double lon_deg, UtcTime t,
                         const EarthRotationModel& earth = {});

/**
 * The slot option set for one (stage, satellite): a fan of inclination- and
 * RAAN-offset planes around the current orbit, each carrying evenly spaced
 * true anomaly options. The current slot is always a member.
 */
struct SlotGrid {
    std::vector<OrbitalElements> slots;
    int n_inclination_planes = 0;
    int n_raan_planes = 0;
    int anomaly_count = 0;
    int current_slot_index = 0;

    int size() const { return static_cast<int>(slots.size()); }
};

/**
 * Builds the slot grid. The farthest plane offsets are sized so that a
 * transfer there consumes exactly the full plane-change budget; anomaly
 * offsets span one revolution evenly. n_planes must be odd.
 */
SlotGrid build_slot_grid(const OrbitalElements& current, double budget_km_s,
                         int n_planes, int n_anomaly);

/**
 * Two-impulse phasing cost (km/s) for shifting phase by dnu_deg in k_rev
 * revolutions of the phasing ellipse; evaluates both drift directions and
 * returns the cheaper feasible one. Throws std::runtime_error if both
 * phasing ellipses dip below the Earth surface.
 */
double phasing_cost(double semi_major_axis_km, double dnu_deg, int k_rev);

/**
 * Impulsive transfer cost between two circular slots of equal radius:
 * plane-change component plus minimum phasing component over waiting
 * revolutions 1..k_rev_max. Components sum (sequential impulses).
 */
double maneuver_cost(const OrbitalElements& from, const OrbitalElements& to,
                     int k_rev_max = 15);

/// cost[i][j] between every slot pair of two grids.
std::vector<std::vector<double>> cost_matrix(const SlotGrid& from,
                                             const SlotGrid& to,
                                             int k_rev_max = 15);

/// Parses a two-line element text block (with optional name lines).
std::vector<OrbitalElements> parse_tle(const std::string& text);

} // namespace firesat::orbit
