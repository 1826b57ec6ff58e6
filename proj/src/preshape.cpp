#include "pkss/preshape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pkss {

void PreprocessConfig::validate() const {
    if (knn_k < 1 || knn_k >= target_count) {
        throw std::invalid_argument("require 1 <= knn_k < target_count");
    }
}

CullResult cull_outliers(const PointCloud& cloud, int k) {
    const int n = static_cast<int>(cloud.size());
    if (n <= k) {
        throw std::invalid_argument("insufficient points");
    }
    KnnIndex index(cloud);

    std::vector<std::vector<int>> nbrs(n);
    std::vector<double> radius(n);  // distance to the k-th neighbor
    for (int i = 0; i < n; ++i) {
        nbrs[i] = index.knn(cloud.points[i], k, i);
        radius[i] = (cloud.points[nbrs[i].back()] - cloud.points[i]).norm();
    }

    // x_i fails duality when no neighbor x_j counts x_i within its own
    // k-neighbor radius. Membership is by radius, so equidistant points at
    // the k-th distance still count as neighbors.
    std::vector<char> outlier(n, 1);
    for (int i = 0; i < n; ++i) {
        for (int j : nbrs[i]) {
            const double dij = (cloud.points[i] - cloud.points[j]).norm();
            if (dij <= radius[j]) {
                outlier[i] = 0;
                break;
            }
        }
    }

    CullResult result;
    for (int i = 0; i < n; ++i) {
        if (outlier[i]) {
            result.removed.push_back(i);
        } else {
            result.cloud.points.push_back(cloud.points[i]);
            if (cloud.has_normals()) result.cloud.normals.push_back(cloud.normals[i]);
        }
    }
    if (result.cloud.points.empty()) {
        throw std::runtime_error("degenerate cloud: no mutual neighbors");
    }
    return result;
}

PointCloud resample(const PointCloud& cloud, int m) {
    if (m <= 0) {
        throw std::invalid_argument("resample target must be positive");
    }
    const int n = static_cast<int>(cloud.size());
    if (n <= m) {
        return cloud;
    }

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : cloud.points) centroid += p;
    centroid /= static_cast<double>(n);

    int seed = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d = (cloud.points[i] - centroid).squaredNorm();
        if (d < best) {
            best = d;
            seed = i;
        }
    }

    std::vector<int> selected;
    selected.reserve(m);
    selected.push_back(seed);
    std::vector<double> min_d2(n);
    for (int i = 0; i < n; ++i) {
        min_d2[i] = (cloud.points[i] - cloud.points[seed]).squaredNorm();
    }
    while (static_cast<int>(selected.size()) < m) {
        int next = 0;
        double far = -1.0;
        for (int i = 0; i < n; ++i) {
            if (min_d2[i] > far) {
                far = min_d2[i];
                next = i;
            }
        }
        selected.push_back(next);
        for (int i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], (cloud.points[i] - cloud.points[next]).squaredNorm());
        }
    }

    PointCloud out;
    out.points.reserve(m);
    if (cloud.has_normals()) out.normals.reserve(m);
    for (int idx : selected) {
        out.points.push_back(cloud.points[idx]);
        if (cloud.has_normals()) out.normals.push_back(cloud.normals[idx]);
    }
    return out;
}

PreShape to_preshape(const PointCloud& cloud) {
    const int n = static_cast<int>(cloud.size());
    if (n < 2) {
        throw std::invalid_argument("preshape needs at least two points");
    }
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : cloud.points) centroid += p;
    centroid /= static_cast<double>(n);

    double sumsq = 0.0;
    for (const Vec3& p : cloud.points) sumsq += (p - centroid).squaredNorm();
    const double scale = std::sqrt(sumsq);
    if (scale <= 0.0) {
        throw std::runtime_error("zero shape scale");
    }

    PreShape shape;
    shape.rows.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        shape.rows.row(i) = ((cloud.points[i] - centroid) / scale).transpose();
    }
    shape.centroid = centroid;
    shape.scale = scale;
    shape.source_indices.resize(n);
    std::iota(shape.source_indices.begin(), shape.source_indices.end(), 0);
    return shape;
}

}  // namespace pkss
