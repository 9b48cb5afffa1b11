#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "firesat/orbit.hpp"
#include "firesat/visibility.hpp"

namespace firesat::scene {

struct FireTruth {
    std::string id;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    UtcTime start_time;
    double area_acres = 0.0;
    double brightness = 1.0;   // relative, (0, 1]
};

/**
 * Reads a FIRMS-style CSV (columns latitude, longitude, acq_date, acq_time,
 * brightness, confidence). Keeps nominal/high confidence rows inside the
 * window, deduplicates on a 0.05 deg grid, and normalizes brightness by the
 * file maximum. Throws std::runtime_error naming the missing column or the
 * offending line on malformed input.
 */
std::vector<FireTruth> ingest_fires(const std::string& path, UtcTime start,
                                    UtcTime end);

enum class Band { band6, band7, fused };

std::string band_name(Band b);
Band band_from_name(const std::string& name);

/// Everything the detector's geolocation step needs about an image.
struct RasterMeta {
    UtcTime time;
    std::string satellite_id;
    Band band = Band::band6;
    double gsd_km_per_px = 0.0;
    double half_angle_deg = 22.5;
    double sat_lat_deg = 0.0;
    double sat_lon_deg = 0.0;
    double sat_alt_km = 0.0;
    double sat_inclination_deg = 0.0;
    double sat_vz_km_s = 0.0;       // ECI z-velocity, ascending/descending flag
    uint64_t seed = 0;
};

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;     // row-major, each in [0, 1]
    RasterMeta meta;

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct SceneConfig {
    int n_pixels = 128;
    double half_angle_deg = 22.5;
    double band6_gain = 1.0;
    double band7_gain = 0.85;
    double day_background = 0.12;
    double night_background = 0.03;
    double noise_amplitude = 0.04;
    // Sensor PSF floor: a fire narrower than this still lights a pixel.
    double min_sigma_px = 1.25;
};

/// Ground sample distance at nadir, km per pixel.
double gsd(const orbit::StateVector& state, double half_angle_deg, int n_pixels);

struct PixelCoord {
    double x = 0.0;   // column, right-positive
    double y = 0.0;   // row, down-positive
};

/**
 * Forward projection of a ground point into image pixel coordinates for the
 * image described by meta (image center at (w/2, h/2), image up along the
 * satellite's direction of travel). Returns nullopt when the point falls
 * outside the raster.
 */
std::optional<PixelCoord> project_to_pixel(const RasterMeta& meta, int width,
                                           int height, double lat_deg,
                                           double lon_deg);

/// Fills a RasterMeta from a propagated state (no pixels rendered).
RasterMeta make_meta(const orbit::StateVector& state,
                     const orbit::OrbitalElements& elements,
                     const std::string& satellite_id, Band band,
                     const SceneConfig& config, uint64_t seed,
                     const orbit::EarthRotationModel& earth = {});

/**
 * Renders the nadir scene: day/night background, one Gaussian blob per fire
 * inside the footprint, then seeded uniform noise, clamped to [0, 1].
 * Deterministic for a given seed.
 */
Raster render(const orbit::StateVector& state,
              const orbit::OrbitalElements& elements,
              const std::vector<FireTruth>& fires, Band band, UtcTime t,
              const SceneConfig& config, uint64_t seed,
              const std::string& satellite_id = "sat",
              const orbit::EarthRotationModel& earth = {});

/// 1 acre in km^2.
inline constexpr double kAcreKm2 = 0.0040468564224;

// Regression fixture scenes: bright non-fire clutter that fools the blob
// detector (island chain by day, arid glinting terrain by night).
Raster make_island_day_fixture();
Raster make_arid_night_fixture();

} // namespace firesat::scene
