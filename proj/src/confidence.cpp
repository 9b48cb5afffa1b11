#include "firesat/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace firesat::conf {

double bayes_update(double prior, double likelihood, double false_rate) {
    if (prior < 0.0 || prior > 1.0)
        throw std::invalid_argument("bayes_update: prior outside [0, 1]");
    if (likelihood <= 0.0 || likelihood > 1.0)
        throw std::invalid_argument("bayes_update: likelihood outside (0, 1]");
    if (false_rate <= 0.0 || false_rate >= 1.0)
        throw std::invalid_argument("bayes_update: false_rate outside (0, 1)");
    double denom = likelihood * prior + false_rate * (1.0 - prior);
    if (denom <= 0.0)
        throw std::invalid_argument("bayes_update: vanishing evidence term");
    return likelihood * prior / denom;
}

void TargetRegistry::register_detection(const detect::Detection& det,
                                        const detect::DetectorProfile& profile) {
    // Nearest existing target within the cluster radius (Chebyshev degrees).
    int match = -1;
    double best = config_.cluster_radius_deg;
    for (int i = 0; i < static_cast<int>(targets_.size()); ++i) {
        double d = std::max(
            std::fabs(det.lat_deg - targets_[i].lat_deg),
            std::fabs(wrap_deg_180(det.lon_deg - targets_[i].lon_deg)));
        if (d <= best) {
            best = d;
            match = i;
        }
    }

    if (match < 0) {
        TrackedTarget t;
        t.id = "t" + std::to_string(next_id_++);
        t.lat_deg = det.lat_deg;
        t.lon_deg = det.lon_deg;
        t.confidence = det.box.confidence;   // first detection seeds the prior
        t.n_interpretations = 1;
        t.weight_sum = det.box.confidence;
        t.weighted_lat_sum = det.lat_deg * det.box.confidence;
        t.weighted_lon_sum = det.lon_deg * det.box.confidence;
        t.history.push_back({det.time, det.box.confidence});
        targets_.push_back(std::move(t));
        match = static_cast<int>(targets_.size()) - 1;
    } else {
        TrackedTarget& t = targets_[match];
        double false_rate = 1.0 - profile.map_value;
        t.confidence = bayes_update(t.confidence, det.box.confidence, false_rate);
        t.n_interpretations += 1;
        t.weight_sum += det.box.confidence;
        t.weighted_lat_sum += det.lat_deg * det.box.confidence;
        t.weighted_lon_sum += det.lon_deg * det.box.confidence;
        if (t.weight_sum > 0.0) {
            t.lat_deg = t.weighted_lat_sum / t.weight_sum;
            t.lon_deg = t.weighted_lon_sum / t.weight_sum;
        }
        t.history.push_back({det.time, det.box.confidence});
    }

    // Promotion is strict and permanent.
    TrackedTarget& t = targets_[match];
    if (!t.promoted && t.confidence > config_.promotion_threshold) {
        t.promoted = true;
        priority_order_.push_back(match);
    }
}

std::vector<std::pair<const TrackedTarget*, double>>
TargetRegistry::select_auxiliary() const {
    std::vector<const TrackedTarget*> pool;
    for (const TrackedTarget& t : targets_)
        if (!t.promoted) pool.push_back(&t);
    std::stable_sort(pool.begin(), pool.end(),
                     [](const TrackedTarget* a, const TrackedTarget* b) {
                         return a->confidence > b->confidence;
                     });
    if (static_cast<int>(pool.size()) > config_.top_k)
        pool.resize(config_.top_k);

    std::vector<std::pair<const TrackedTarget*, double>> out;
    out.reserve(pool.size());
    for (const TrackedTarget* t : pool)
        out.emplace_back(t, t->confidence * t->confidence);
    return out;
}

std::vector<const TrackedTarget*> TargetRegistry::priority() const {
    std::vector<const TrackedTarget*> out;
    out.reserve(priority_order_.size());
    for (int i : priority_order_) out.push_back(&targets_[i]);
    return out;
}

TargetRegistry TargetRegistry::restore(RegistryConfig config,
                                       std::vector<TrackedTarget> targets,
                                       std::vector<int> priority_order,
                                       int next_id) {
    TargetRegistry reg(config);
    reg.targets_ = std::move(targets);
    reg.priority_order_ = std::move(priority_order);
    for (int i : reg.priority_order_)
        if (i < 0 || i >= static_cast<int>(reg.targets_.size()))
            throw std::invalid_argument("registry restore: priority index out of range");
    reg.next_id_ = next_id;
    return reg;
}

} // namespace firesat::conf
