#include "pkss/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pkss {

void FeatureConfig::validate() const {
    if (feature_fraction <= 0.0 || feature_fraction > 1.0) {
        throw std::invalid_argument("feature_fraction must lie in (0, 1]");
    }
    if (pca_k < 3) {
        throw std::invalid_argument("pca_k must be at least 3");
    }
}

int cell_of(const Vec3& row, const PartitionLayout& layout) {
    const double norm = row.norm();
    if (norm == 0.0) {
        return 0;
    }
    double azimuth = std::atan2(row.y(), row.x());
    if (azimuth < 0.0) azimuth += 2.0 * std::numbers::pi;
    const double elevation = std::acos(std::clamp(row.z() / norm, -1.0, 1.0));

    int az_bin = static_cast<int>(azimuth / (2.0 * std::numbers::pi / layout.azimuth_bins));
    az_bin = std::clamp(az_bin, 0, layout.azimuth_bins - 1);
    int el_bin = static_cast<int>(elevation / (std::numbers::pi / layout.elevation_bins));
    el_bin = std::clamp(el_bin, 0, layout.elevation_bins - 1);
    return az_bin * layout.elevation_bins + el_bin;
}

std::vector<std::vector<int>> assign_cells(const PreShape& shape, const PartitionLayout& layout) {
    std::vector<std::vector<int>> cells(layout.cell_count());
    for (int i = 0; i < shape.rows.rows(); ++i) {
        cells[cell_of(shape.rows.row(i).transpose(), layout)].push_back(i);
    }
    return cells;
}

PartitionProfile extract_contour(const PreShape& shape, const PartitionLayout& layout) {
    PartitionProfile profile;
    profile.layout = layout;
    for (int i = 0; i < shape.rows.rows(); ++i) {
        const Vec3 p = shape.rows.row(i).transpose();
        const int cell = cell_of(p, layout);
        const double norm = p.norm();
        auto it = profile.contour.find(cell);
        if (it == profile.contour.end() || norm > it->second.key) {
            profile.contour[cell] = CellSample{i, p, norm};
        }
    }
    return profile;
}

double d_pca(const PointCloud& cloud, const KnnIndex& index, int point_index, int k) {
    const std::vector<int> nbrs = index.knn(cloud.points[point_index], k, point_index);
    Vec3 centroid = Vec3::Zero();
    for (int j : nbrs) centroid += cloud.points[j];
    centroid /= static_cast<double>(nbrs.size());

    Mat3 cov = Mat3::Zero();
    for (int j : nbrs) {
        const Vec3 d = cloud.points[j] - centroid;
        cov += d * d.transpose();
    }
    if (cov.cwiseAbs().maxCoeff() == 0.0) {
        return 0.0;  // all neighbors coincident
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    const Vec3 normal = solver.eigenvectors().col(0);
    return std::abs(normal.dot(cloud.points[point_index] - centroid));
}

double d_pca(const PointCloud& cloud, int index, int k) {
    if (static_cast<int>(cloud.size()) <= k) {
        throw std::invalid_argument("insufficient points");
    }
    KnnIndex tree(cloud);
    return d_pca(cloud, tree, index, k);
}

std::vector<double> d_pca_all(const PointCloud& cloud, int k) {
    if (static_cast<int>(cloud.size()) <= k) {
        throw std::invalid_argument("insufficient points");
    }
    KnnIndex tree(cloud);
    std::vector<double> values(cloud.size());
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        values[i] = d_pca(cloud, tree, i, k);
    }
    return values;
}

std::vector<CellSample> feature_candidates(const PointCloud& cloud, const PreShape& shape,
                                           const FeatureConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(cloud.size()) != shape.rows.rows()) {
        throw std::invalid_argument("cloud and pre-shape sizes differ");
    }
    const std::vector<double> values = d_pca_all(cloud, cfg.pca_k);
    const int n = static_cast<int>(values.size());

    // d_thr is the (1 - fraction) quantile; candidates lie strictly above it.
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const int idx = static_cast<int>(std::floor((1.0 - cfg.feature_fraction) * n)) - 1;
    const double d_thr = idx >= 0 ? sorted[idx] : -std::numeric_limits<double>::infinity();

    std::vector<CellSample> candidates;
    for (int i = 0; i < n; ++i) {
        if (values[i] > d_thr) {
            candidates.push_back(CellSample{i, shape.rows.row(i).transpose(), values[i]});
        }
    }
    return candidates;
}

void extract_features(const PointCloud& cloud, const PreShape& shape,
                      const PartitionLayout& layout, const FeatureConfig& cfg,
                      PartitionProfile& profile) {
    profile.features.clear();
    for (const CellSample& candidate : feature_candidates(cloud, shape, cfg)) {
        const int cell = cell_of(candidate.point, layout);
        auto it = profile.features.find(cell);
        if (it == profile.features.end() || candidate.key > it->second.key) {
            profile.features[cell] = candidate;
        }
    }
}

PartitionProfile build_profile(const PointCloud& cloud, const PreShape& shape,
                               const PartitionLayout& layout, const FeatureConfig& cfg,
                               bool with_features) {
    PartitionProfile profile = extract_contour(shape, layout);
    if (with_features) {
        extract_features(cloud, shape, layout, cfg, profile);
    }
    return profile;
}

std::optional<MatchedPairs> matched_pairs(const PartitionProfile& a, const PartitionProfile& b,
                                          SampleSet which) {
    if (!(a.layout == b.layout)) {
        throw std::invalid_argument("profiles use different partition layouts");
    }
    const auto& map_a = which == SampleSet::contour ? a.contour : a.features;
    const auto& map_b = which == SampleSet::contour ? b.contour : b.features;

    MatchedPairs pairs;
    auto it_a = map_a.begin();
    auto it_b = map_b.begin();
    while (it_a != map_a.end() && it_b != map_b.end()) {
        if (it_a->first < it_b->first) {
            ++it_a;
        } else if (it_b->first < it_a->first) {
            ++it_b;
        } else {
            pairs.cells.push_back(it_a->first);
            pairs.a.push_back(it_a->second.point);
            pairs.b.push_back(it_b->second.point);
            ++it_a;
            ++it_b;
        }
    }
    if (pairs.cells.size() < 4) {
        return std::nullopt;
    }
    return pairs;
}

}  // namespace pkss
