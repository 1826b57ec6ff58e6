#pragma once

#include "pkss/geometry.hpp"

#include <array>
#include <numbers>
#include <optional>

namespace pkss {

/// Per-item registration quality. gt_cos is the normalized trace
/// similarity between the ground-truth and recovered rotations; success
/// follows the recall rule (gt_cos > 0.8, plus mse < 0.001 when the mse
/// condition is enabled).
struct Metrics {
    double mse = 0.0;
    double mse_n = 0.0;
    double gt_cos = 0.0;
    double time_s = 0.0;
    bool success = false;
};

enum class NoiseKind { gaussian, mean };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double r = 0.2;   // sigma = r * l_k
    int k = 12;       // neighbor count for l_k
    std::uint64_t seed = 0;

    void validate() const;
};

struct RandomSimilaritySpec {
    std::array<double, 2> rotation_range = {-std::numbers::pi, std::numbers::pi};
    std::array<double, 2> scale_range = {0.5, 2.0};
    double translation_frac = 0.5;  // per-axis bound as a fraction of the bbox diagonal
};

enum class Axis { x, y, z, longest };

struct BandSpec {
    int bands = 2;
    Axis axis = Axis::longest;
};

/// Everything needed to regenerate and score a perturbed corpus item.
struct PerturbationRecord {
    SimilarityTransform transform;  // applied ground truth (identity if absent)
    bool has_transform = false;
    std::optional<NoiseSpec> noise;
    double defect_fraction = 0.0;  // 0 = no defect
    std::optional<BandSpec> bands;
    std::uint64_t seed = 0;
};

/// Seeded random similarity transform: per-axis Euler angles composed
/// z*y*x, a uniform scale, and a per-axis translation bounded by
/// translation_frac * bbox_diagonal. Draw order: angles x/y/z, scale,
/// translation x/y/z.
SimilarityTransform random_similarity(std::uint64_t seed, double bbox_diagonal,
                                      const RandomSimilaritySpec& spec = {});

/// Mean distance to the k nearest neighbors, averaged over the cloud (the
/// noise model's length scale).
double mean_neighbor_distance(const PointCloud& cloud, int k);

/// Displaces each point along its normal by a random amount with scale
/// sigma = r * l_k: N(0, sigma^2) for gaussian noise, centered U(-sigma,
/// sigma) for mean noise. Normals are estimated when absent.
PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec);

/// Removes the ceil(fraction * n) points nearest to a uniformly random
/// seed point; survivors keep input order.
PointCloud make_defect(const PointCloud& cloud, double fraction, std::uint64_t seed);

/// Splits the bbox extent along the axis into 2*bands equal slabs and
/// keeps points in even-indexed slabs only.
PointCloud band_decimate(const PointCloud& cloud, int bands, Axis axis = Axis::longest);

/// Mean squared distance from each source point to its nearest template
/// point (one-way).
double mse_closest_point(const PointCloud& aligned_source, const PointCloud& templ);

/// Mean of (1 - n_s . n_t) over source points, n_t taken from the nearest
/// template point. Both clouds need oriented normals.
double mse_normal(const PointCloud& aligned_source, const PointCloud& templ);

/// tr(T_g^T T') / 3, the normalized Frobenius cosine between rotations.
double gt_cosine(const RotationMatrix& ground_truth, const RotationMatrix& recovered);

bool registration_success(double gt_cos, double mse, bool use_mse_condition);

/// Fraction of records passing the success rule.
double registration_recall(std::span<const Metrics> records, bool use_mse_condition);

}  // namespace pkss
