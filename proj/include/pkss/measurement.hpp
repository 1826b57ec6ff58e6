#pragma once

#include "pkss/partition.hpp"

#include <numbers>
#include <span>
#include <utility>

namespace pkss {

/// Result of aligning two matched sample sets on the pre-shape sphere.
/// `measure` is the spherical distance arccos<A, O_r B> in [0, pi];
/// `local_rotation` is the optimal rotation applied to the second set and
/// `local_scale` the ratio of the recomputed subset scale factors.
struct LocalAlignment {
    double measure = std::numbers::pi;
    RotationMatrix local_rotation;
    double local_scale = 1.0;
    int matched_count = 0;

    bool valid() const { return measure < std::numbers::pi; }
};

/// Orthogonal Procrustes step: for row-aligned, zero-mean, unit-Frobenius
/// A and B, returns the rotation O_r maximizing the Frobenius inner
/// product <A, B O_r^T> together with that maximum (the sum of the
/// reflection-corrected singular values of A^T B).
/// Throws std::runtime_error("degenerate correspondence") when A^T B has
/// rank 0.
std::pair<RotationMatrix, double> solve_local_rotation(const PointMatrix& A, const PointMatrix& B);

/// Full local measurement between two matched sample sequences: re-center
/// and re-normalize each subset, solve the optimal rotation, and take
/// arccos of the clamped trace. Inputs shorter than 4 yield the sentinel
/// alignment (measure = pi, identity rotation).
LocalAlignment measure_pair(std::span<const Vec3> samples_a, std::span<const Vec3> samples_b);

/// Combined shape measurement over a partition profile pair: the contour
/// measurement, raised to the feature measurement when at least 4 feature
/// cells match on both sides. The reported rotation and scale always come
/// from the contour alignment.
struct CombinedMeasure {
    double g_k = std::numbers::pi;
    LocalAlignment contour;
};
CombinedMeasure combined_measure(const PartitionProfile& a, const PartitionProfile& b);

}  // namespace pkss
