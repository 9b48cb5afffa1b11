#pragma once

#include <string>
#include <vector>

#include "firesat/detect.hpp"

namespace firesat::conf {

/**
 * Recursive Bayesian confidence update:
 *   posterior = L * prior / (L * prior + f * (1 - prior))
 * where L is the current interpretation confidence and f the detector's
 * false-positive rate. Throws std::invalid_argument when the denominator
 * would vanish.
 */
double bayes_update(double prior, double likelihood, double false_rate);

struct Interpretation {
    UtcTime time;
    double raw_confidence = 0.0;
};

struct TrackedTarget {
    std::string id;
    double lat_deg = 0.0;          // confidence-weighted running centroid
    double lon_deg = 0.0;
    double confidence = 0.0;       // P(H | {D_i})
    int n_interpretations = 0;
    bool promoted = false;
    std::vector<Interpretation> history;

    // Centroid accumulators (weights are raw confidences).
    double weight_sum = 0.0;
    double weighted_lat_sum = 0.0;
    double weighted_lon_sum = 0.0;
};

struct RegistryConfig {
    double promotion_threshold = 0.95;
    double cluster_radius_deg = 0.5;   // Chebyshev
    int top_k = 50;
};

/**
 * Single-owner store of tracked targets. Detections merge into the nearest
 * target within the cluster radius (Bayes update + centroid shift) or open a
 * new one. A target whose confidence strictly exceeds the promotion threshold
 * moves into the priority set, permanently.
 */
class TargetRegistry {
public:
    explicit TargetRegistry(RegistryConfig config = {}) : config_(config) {}

    /// Processes one detection; call in timestamp order.
    void register_detection(const detect::Detection& det,
                            const detect::DetectorProfile& profile);

    /// Top-k unpromoted targets by confidence with weights O_p = confidence^2.
    std::vector<std::pair<const TrackedTarget*, double>> select_auxiliary() const;

    const std::vector<TrackedTarget>& targets() const { return targets_; }

    /// Promoted targets in promotion order.
    std::vector<const TrackedTarget*> priority() const;
    int priority_count() const { return static_cast<int>(priority_order_.size()); }

    const RegistryConfig& config() const { return config_; }
    const std::vector<int>& priority_order() const { return priority_order_; }
    int next_id() const { return next_id_; }

    /// Rebuilds a registry from a serialized snapshot.
    static TargetRegistry restore(RegistryConfig config,
                                  std::vector<TrackedTarget> targets,
                                  std::vector<int> priority_order, int next_id);

private:
    RegistryConfig config_;
    std::vector<TrackedTarget> targets_;
    std::vector<int> priority_order_;
    int next_id_ = 0;
};

} // namespace firesat::conf
