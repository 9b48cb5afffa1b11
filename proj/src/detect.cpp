#include "firesat/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace firesat::detect {

namespace {

double median(std::vector<double> v) {
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

// Jacobi eigen-decomposition for small symmetric matrices. Returns
// eigenvalues and column eigenvectors; fine for the handful of bands fused.
void jacobi_eigen(std::vector<std::vector<double>> a,
                  std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& eigenvectors) {
    int n = static_cast<int>(a.size());
    eigenvectors.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) eigenvectors[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(phi), s = std::sin(phi);
                for (int i = 0; i < n; ++i) {
                    double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = eigenvectors[i][p], viq = eigenvectors[i][q];
                    eigenvectors[i][p] = c * vip - s * viq;
                    eigenvectors[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
}

} // namespace

std::vector<BoundingBox> detect_blobs(const scene::Raster& raster,
                                      const DetectorProfile& profile) {
    int w = raster.width, h = raster.height;
    double background = median(raster.pixels);
    double threshold = background + profile.threshold;

    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    std::vector<BoundingBox> boxes;
    std::vector<std::pair<int, int>> stack;
    int next_label = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (raster.at(x, y) <= threshold || label[idx(x, y)] >= 0) continue;
            // Grow an 8-connected component.
            int min_x = x, max_x = x, min_y = y, max_y = y, area = 0;
            double peak = 0.0;
            stack.clear();
            stack.emplace_back(x, y);
            label[idx(x, y)] = next_label;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                peak = std::max(peak, raster.at(cx, cy));
                min_x = std::min(min_x, cx); max_x = std::max(max_x, cx);
                min_y = std::min(min_y, cy); max_y = std::max(max_y, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        if (raster.at(nx, ny) <= threshold || label[idx(nx, ny)] >= 0)
                            continue;
                        label[idx(nx, ny)] = next_label;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            ++next_label;
            if (area < profile.min_blob_px) continue;

            int x0 = std::max(0, min_x - 1), x1 = std::min(w - 1, max_x + 1);
            int y0 = std::max(0, min_y - 1), y1 = std::min(h - 1, max_y + 1);
            BoundingBox box;
            box.x = (x0 + x1) / 2.0;
            box.y = (y0 + y1) / 2.0;
            box.w = x1 - x0 + 1;
            box.h = y1 - y0 + 1;
            box.confidence = std::clamp(profile.confidence_gain *
                                            (peak - threshold) *
                                            (1.0 - 1.0 / (1.0 + area)),
                                        0.0, 0.99);
            box.source_model = scene::band_name(raster.meta.band);
            boxes.push_back(box);
        }
    }
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const BoundingBox& a, const BoundingBox& b) {
                         return a.confidence > b.confidence;
                     });
    return boxes;
}

scene::Raster early_fuse(const std::vector<scene::Raster>& rasters,
                         std::vector<double>* weights_out) {
    int F = static_cast<int>(rasters.size());
    if (F < 2)
        throw std::invalid_argument("early_fuse: need at least two rasters");
    std::size_t n = rasters[0].pixels.size();
    for (const auto& r : rasters)
        if (r.width != rasters[0].width || r.height != rasters[0].height)
            throw std::invalid_argument("early_fuse: raster dimensions differ");

    // Covariance of the flattened images (rows as variables).
    std::vector<double> mean(F, 0.0);
    for (int f = 0; f < F; ++f) {
        for (double px : rasters[f].pixels) mean[f] += px;
        mean[f] /= static_cast<double>(n);
    }
    std::vector<std::vector<double>> cov(F, std::vector<double>(F, 0.0));
    for (int a = 0; a < F; ++a) {
        for (int b = a; b < F; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (rasters[a].pixels[i] - mean[a]) *
                     (rasters[b].pixels[i] - mean[b]);
            cov[a][b] = cov[b][a] = s / static_cast<double>(n - 1);
        }
    }

    // Fully degenerate covariance (identical inputs): equal-weight fallback.
    bool all_equal = true;
    for (int i = 0; i < F && all_equal; ++i)
        for (int j = 0; j < F && all_equal; ++j)
            all_equal = cov[i][j] == cov[0][0];

    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
    jacobi_eigen(cov, eigenvalues, eigenvectors);
    int top = 0;
    for (int i = 1; i < F; ++i)
        if (eigenvalues[i] > eigenvalues[top]) top = i;

    std::vector<double> pc(F);
    double pc_sum = 0.0;
    for (int i = 0; i < F; ++i) {
        pc[i] = eigenvectors[i][top];
        pc_sum += pc[i];
    }
    if (pc_sum < 0.0) {
        for (double& p : pc) p = -p;
        pc_sum = -pc_sum;
    }

    std::vector<double> weights(F, 1.0 / F);
    bool degenerate = all_equal || eigenvalues[top] <= 1e-12 || pc_sum <= 1e-12;
    for (int i = 0; i < F && !degenerate; ++i)
        if (pc[i] < -1e-12) degenerate = true;   // mixed-sign component
    if (!degenerate)
        for (int i = 0; i < F; ++i) weights[i] = pc[i] / pc_sum;
    if (weights_out) *weights_out = weights;

    scene::Raster fused = rasters[0];
    fused.meta.band = scene::Band::fused;
    for (std::size_t i = 0; i < n; ++i) {
        double px = 0.0;
        for (int f = 0; f < F; ++f) px += weights[f] * rasters[f].pixels[i];
        fused.pixels[i] = px;
    }
    return fused;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    double ax0 = a.x - a.w / 2.0, ax1 = a.x + a.w / 2.0;
    double ay0 = a.y - a.h / 2.0, ay1 = a.y + a.h / 2.0;
    double bx0 = b.x - b.w / 2.0, bx1 = b.x + b.w / 2.0;
    double by0 = b.y - b.h / 2.0, by1 = b.y + b.h / 2.0;
    double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
    double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
    double inter = ix * iy;
    double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<BoundingBox> late_fuse(const std::vector<BoundingBox>& boxes,
                                   int n_models, double iou_threshold) {
    if (iou_threshold <= 0.0 || iou_threshold >= 1.0)
        throw std::invalid_argument("late_fuse: iou_threshold must be in (0, 1)");
    if (n_models < 1)
        throw std::invalid_argument("late_fuse: n_models must be >= 1");

    // Each box joins the first cluster whose representative (first member)
    // overlaps past the threshold, otherwise founds a new cluster.
    std::vector<std::vector<const BoundingBox*>> clusters;
    for (const BoundingBox& box : boxes) {
        bool placed = false;
        for (auto& cluster : clusters) {
            if (iou(box, *cluster.front()) > iou_threshold) {
                cluster.push_back(&box);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({&box});
    }

    std::vector<BoundingBox> fused;
    for (const auto& cluster : clusters) {
        double conf_sum = 0.0, x = 0.0, y = 0.0, w = 0.0, h = 0.0;
        for (const BoundingBox* b : cluster) {
            conf_sum += b->confidence;
            x += b->x * b->confidence;
            y += b->y * b->confidence;
            w += b->w * b->confidence;
            h += b->h * b->confidence;
        }
        int members = static_cast<int>(cluster.size());
        BoundingBox out;
        if (conf_sum > 0.0) {
            out.x = x / conf_sum;
            out.y = y / conf_sum;
            out.w = w / conf_sum;
            out.h = h / conf_sum;
        } else {
            out = *cluster.front();
        }
        out.confidence = std::min(members, n_models) * conf_sum /
                         (static_cast<double>(members) * n_models);
        out.source_model = "fused";
        fused.push_back(out);
    }
    return fused;
}

GeoPoint geolocate(const BoundingBox& box, const scene::RasterMeta& meta,
                   int width, int height) {
    double dx = box.x - width / 2.0;
    double dy = height / 2.0 - box.y;   // image up is positive
    if (dx == 0.0 && dy == 0.0)
        return GeoPoint{meta.sat_lat_deg, meta.sat_lon_deg};

    double phi_deg = std::atan2(dy, dx) * kRadToDeg;
    double theta_deg = meta.sat_vz_km_s >= 0.0 ? meta.sat_inclination_deg
                                               : -meta.sat_inclination_deg;
    double psi = (theta_deg + phi_deg - 90.0) * kDegToRad;
    double rho_km = meta.gsd_km_per_px * std::hypot(dx, dy);

    double dlat = rho_km * std::sin(psi) / 110.574;
    double lat = meta.sat_lat_deg + dlat;
    if (std::fabs(lat) >= 90.0)
        throw std::runtime_error("geolocate: polar singularity");
    double dlon = rho_km * std::cos(psi) / (111.320 * std::cos(lat * kDegToRad));
    return GeoPoint{lat, wrap_deg_180(meta.sat_lon_deg + dlon)};
}

DetectionMetrics score_detections(const std::vector<Detection>& detections,
                                  const std::vector<scene::FireTruth>& truth,
                                  double match_radius_deg) {
    if (match_radius_deg <= 0.0)
        throw std::invalid_argument("score_detections: match_radius must be > 0");

    struct Pair {
        double dist;
        int det, truth;
    };
    std::vector<Pair> pairs;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        for (int j = 0; j < static_cast<int>(truth.size()); ++j) {
            double d = std::max(
                std::fabs(detections[i].lat_deg - truth[j].lat_deg),
                std::fabs(wrap_deg_180(detections[i].lon_deg - truth[j].lon_deg)));
            if (d <= match_radius_deg) pairs.push_back({d, i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.det != b.det) return a.det < b.det;
        return a.truth < b.truth;
    });

    std::vector<bool> det_used(detections.size(), false);
    std::vector<bool> truth_used(truth.size(), false);
    int tp = 0;
    for (const Pair& p : pairs) {
        if (det_used[p.det] || truth_used[p.truth]) continue;
        det_used[p.det] = truth_used[p.truth] = true;
        ++tp;
    }

    DetectionMetrics m;
    m.tp = tp;
    m.fp = static_cast<int>(detections.size()) - tp;
    m.fn = static_cast<int>(truth.size()) - tp;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f_score = (m.precision + m.recall) > 0.0
                    ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                    : 0.0;
    return m;
}

} // namespace firesat::detect
