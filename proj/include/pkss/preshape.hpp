#pragma once

#include "pkss/geometry.hpp"

namespace pkss {

/// Pre-processing knobs: neighbor count for culling/features and the
/// resampling target.
struct PreprocessConfig {
    int knn_k = 12;
    int target_count = 3000;

    void validate() const;
};

/// A point cloud mapped onto the pre-shape sphere: centered rows with unit
/// Frobenius norm, plus the centroid and scale needed to undo the mapping.
struct PreShape {
    PointMatrix rows;                 // m x 3, zero row-mean, unit Frobenius norm
    Vec3 centroid = Vec3::Zero();     // model units
    double scale = 1.0;               // model units, > 0
    std::vector<int> source_indices;  // row -> index in the mapped cloud
};

struct CullResult {
    PointCloud cloud;          // survivors, input order preserved
    std::vector<int> removed;  // ascending indices into the input cloud
};

/// Removes points that fail neighbor duality: x is culled when no
/// neighbor of x counts x within its own k-neighbor radius (no mutual
/// neighbor). Single pass over the original cloud; no iteration after
/// removal. Throws std::runtime_error("degenerate cloud: no mutual
/// neighbors") when every point is flagged.
CullResult cull_outliers(const PointCloud& cloud, int k);

/// Farthest-point sampling down to m points. Seeded at the point nearest
/// the centroid; each pick maximizes the minimum distance to the selected
/// set; ties break toward the lower index. Returns the input unchanged
/// when it already has at most m points.
PointCloud resample(const PointCloud& cloud, int m);

/// Centers the cloud and divides by its Frobenius scale
/// s = sqrt(sum_j |x_j - centroid|^2).
/// Throws std::runtime_error("zero shape scale") when all points coincide.
PreShape to_preshape(const PointCloud& cloud);

}  // namespace pkss
