#pragma once

#include <string>
#include <vector>

#include "firesat/scene.hpp"

namespace firesat::detect {

struct BoundingBox {
    double x = 0.0, y = 0.0;   // center, pixels (column/row)
    double w = 0.0, h = 0.0;   // extents, pixels
    double confidence = 0.0;   // [0, 1]
    std::string source_model;
};

struct Detection {
    BoundingBox box;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    UtcTime time;
    std::string satellite_id;
};

struct DetectionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    int tp = 0, fp = 0, fn = 0;
};

/// Deterministic stand-in for a trained detector.
struct DetectorProfile {
    double threshold = 0.12;        // intensity above background estimate
    int min_blob_px = 1;
    double confidence_gain = 1.15;
    double map_value = 0.70;        // stand-in mAP; 1 - map_value feeds Bayes
};

/**
 * Thresholds pixels above (background estimate + profile.threshold), groups
 * them into 8-connected components, and boxes components with at least
 * min_blob_px pixels (tight extent plus a 1 px margin, clamped). Boxes come
 * back sorted by confidence, descending.
 */
std::vector<BoundingBox> detect_blobs(const scene::Raster& raster,
                                      const DetectorProfile& profile);

/**
 * PCA image fusion: the dominant eigenvector of the flattened-image
 * covariance matrix sets the per-image weights (normalized to sum 1).
 * Identical or sign-degenerate inputs fall back to equal weights.
 * weights_out, when given, receives the applied weights.
 */
scene::Raster early_fuse(const std::vector<scene::Raster>& rasters,
                         std::vector<double>* weights_out = nullptr);

/// Intersection-over-union of two boxes in pixel coordinates.
double iou(const BoundingBox& a, const BoundingBox& b);

/**
 * Weighted box fusion across n_models detector outputs: greedy clustering by
 * IoU against each cluster's first member, then confidence-weighted averaging
 * of position and extent with the cluster confidence
 * min(A, F) * sum(C) / (A * F).
 */
std::vector<BoundingBox> late_fuse(const std::vector<BoundingBox>& boxes,
                                   int n_models, double iou_threshold);

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

/**
 * Converts a box center to ground coordinates from the image geometry: angle
 * from image right to the offset, satellite heading from the inclination and
 * ascent direction, then km-per-degree conversion. Throws std::runtime_error
 * within half a degree of the poles.
 */
GeoPoint geolocate(const BoundingBox& box, const scene::RasterMeta& meta,
                   int width, int height);

/**
 * Greedy nearest-first matching of detections to ground truth within
 * match_radius (Chebyshev degrees), then precision/recall/F-score with the
 * zero conventions for empty denominators.
 */
DetectionMetrics score_detections(const std::vector<Detection>& detections,
                                  const std::vector<scene::FireTruth>& truth,
                                  double match_radius_deg = 0.5);

} // namespace firesat::detect
