#pragma once

#include "pkss/preshape.hpp"

#include <map>
#include <optional>

namespace pkss {

/// Spherical grid around the pre-shape center: azimuth_bins x elevation_bins
/// cells, cell id = azimuth_bin * elevation_bins + elevation_bin.
struct PartitionLayout {
    int azimuth_bins = 12;
    int elevation_bins = 6;

    int cell_count() const { return azimuth_bins * elevation_bins; }
    bool operator==(const PartitionLayout&) const = default;
};

/// Cell the direction of `row` falls into. Azimuth in [0, 2pi), elevation
/// in [0, pi] measured from +z with the boundary value pi mapping to the
/// last elevation bin; the zero vector maps to cell 0.
int cell_of(const Vec3& row, const PartitionLayout& layout);

/// Every row binned into its cell; the result has layout.cell_count()
/// entries, each a list of row indices in ascending order.
std::vector<std::vector<int>> assign_cells(const PreShape& shape, const PartitionLayout& layout);

/// One representative point of a cell. `key` is the selection criterion
/// value: distance to center for contour samples, d_pca for feature samples.
struct CellSample {
    int row = -1;
    Vec3 point = Vec3::Zero();
    double key = 0.0;
};

/// Per-cell representative samples of a pre-shape: the outer contour set
/// (farthest point per cell) and the internal feature set (largest d_pca
/// per cell among feature candidates).
struct PartitionProfile {
    std::map<int, CellSample> contour;
    std::map<int, CellSample> features;
    PartitionLayout layout;
};

struct FeatureConfig {
    int pca_k = 12;
    double feature_fraction = 0.15;  // in (0, 1]

    void validate() const;
};

/// Contour part only: per non-empty cell the row with maximal norm,
/// ties toward the lower row index.
PartitionProfile extract_contour(const PreShape& shape, const PartitionLayout& layout);

/// Distance from point `index` to the least-squares plane of its
/// k-neighborhood (plane through the neighborhood centroid, normal along
/// the smallest-eigenvalue direction). Returns 0 for degenerate
/// neighborhoods with all points coincident.
double d_pca(const PointCloud& cloud, int index, int k);
double d_pca(const PointCloud& cloud, const KnnIndex& index, int point_index, int k);

/// d_pca for every point, sharing one spatial index.
std::vector<double> d_pca_all(const PointCloud& cloud, int k);

/// All feature candidates: rows whose d_pca lies strictly above the
/// (1 - feature_fraction) quantile, in ascending row order, with key =
/// d_pca. The threshold is a property of the cloud, not of its pose, so
/// the search re-bins this fixed set per candidate.
std::vector<CellSample> feature_candidates(const PointCloud& cloud, const PreShape& shape,
                                           const FeatureConfig& cfg);

/// Fills the feature part of `profile`: per non-empty cell the feature
/// candidate with maximal d_pca wins, ties toward the lower row index.
/// Rows of `shape` must align index-wise with `cloud` points.
void extract_features(const PointCloud& cloud, const PreShape& shape,
                      const PartitionLayout& layout, const FeatureConfig& cfg,
                      PartitionProfile& profile);

/// Contour + features in one pass.
PartitionProfile build_profile(const PointCloud& cloud, const PreShape& shape,
                               const PartitionLayout& layout, const FeatureConfig& cfg,
                               bool with_features = true);

enum class SampleSet { contour, features };

/// Sample points for every cell occupied in both profiles, ascending by
/// cell id. Empty result (std::nullopt) signals insufficient
/// correspondence: fewer than 4 matched cells.
struct MatchedPairs {
    std::vector<Vec3> a;
    std::vector<Vec3> b;
    std::vector<int> cells;
};
std::optional<MatchedPairs> matched_pairs(const PartitionProfile& a, const PartitionProfile& b,
                                          SampleSet which);

}  // namespace pkss
