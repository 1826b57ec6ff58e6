#pragma once

#include "pkss/measurement.hpp"

#include <cstdint>

namespace pkss {

/// Exhaustive candidate pose grids: per-axis Euler rotations with unit
/// angle 2*pi/rotation_steps and center offsets along the source
/// pre-shape's principal axes within +-L/4 of the extent L along u.
struct CandidateGrid {
    std::vector<RotationMatrix> rotations;   // rotation_steps^3, lexicographic (n_x, n_y, n_z)
    std::vector<Vec3> translations;          // translation_steps^3, lexicographic (n_u, n_v, n_w)
    int rotation_steps = 12;
    int translation_steps = 5;
};

/// R_z(n_z t) R_y(n_y t) R_x(n_x t) for t = 2*pi/steps, enumerated in
/// lexicographic (n_x, n_y, n_z) order.
std::vector<RotationMatrix> build_rotation_grid(int steps);

/// Center offsets sum_d c_d e_d over the frame axes {u, v, w}, where each
/// c_d takes `steps` evenly spaced values in [-extent_u/4, +extent_u/4].
/// steps must be odd so the zero offset is a grid member.
std::vector<Vec3> build_translation_grid(const PcaFrame& frame, double extent_u, int steps);

/// Same, with the frame and extent taken from the source pre-shape's own
/// PCA (extent = max - min row projection onto u).
std::vector<Vec3> build_translation_grid(const PreShape& source, int steps);

CandidateGrid build_candidate_grid(const PreShape& source, int rotation_steps,
                                   int translation_steps);

struct SearchResult {
    double best_measure = std::numbers::pi;
    int best_rotation_index = -1;
    int best_translation_index = -1;
    RotationMatrix candidate_rotation;  // O_f
    Vec3 center_shift = Vec3::Zero();   // S_i
    RotationMatrix local_rotation;      // O_r of the winning candidate
    double local_scale = 1.0;
    std::int64_t evaluations = 0;
};

/// Measures one candidate pose: every source row is shifted by -S_i,
/// rotated by O_f, re-divided by the posed full-shape Frobenius norm (no
/// re-centering), re-binned into its cell, and the per-cell farthest
/// points are measured against the template profile. source_features (the
/// pose-independent d_pca candidate set) is re-binned the same way for
/// the feature term. Candidates without usable correspondence yield the
/// sentinel measure pi.
CombinedMeasure evaluate_candidate(const PartitionProfile& template_profile,
                                   const PreShape& source_shape,
                                   std::span<const CellSample> source_features,
                                   const RotationMatrix& o_f, const Vec3& s_i);

/// Evaluates every rotation x translation candidate and returns the strict
/// minimum, ties broken by smallest (translation_index, rotation_index).
/// The result is identical for any worker_count (0 = hardware parallelism);
/// candidates are reduced in canonical index order.
/// Throws std::runtime_error("registration failed: no valid correspondence")
/// when every candidate is a sentinel.
SearchResult global_search(const PartitionProfile& template_profile,
                           const PreShape& source_shape,
                           std::span<const CellSample> source_features,
                           const CandidateGrid& grid, int worker_count = 0);

/// Flattens source normalization, the winning candidate pose, the local
/// alignment, and template de-normalization into one model-unit transform
/// mapping the original source cloud into the template's frame.
SimilarityTransform compose_final_transform(const PreShape& template_shape,
                                            const PreShape& source_shape,
                                            const SearchResult& result);

}  // namespace pkss
