#include "pkss/measurement.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace pkss {

namespace {

struct Procrustes {
    Mat3 rotation;
    double trace = 0.0;
};

// Kabsch with reflection correction on the 3x3 cross-covariance M = A^T B.
Procrustes solve_cross_covariance(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(0) < 1e-12) {
        throw std::runtime_error("degenerate correspondence");
    }
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    const double sign = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

    Procrustes out;
    out.rotation = u * Vec3(1.0, 1.0, sign).asDiagonal() * v.transpose();
    out.trace = svd.singularValues()(0) + svd.singularValues()(1) + sign * svd.singularValues()(2);
    return out;
}

}  // namespace

std::pair<RotationMatrix, double> solve_local_rotation(const PointMatrix& A, const PointMatrix& B) {
    if (A.rows() != B.rows() || A.rows() < 3) {
        throw std::invalid_argument("row-aligned inputs with at least 3 rows required");
    }
    const Procrustes p = solve_cross_covariance(A.transpose() * B);
    return {RotationMatrix::unchecked(p.rotation), p.trace};
}

LocalAlignment measure_pair(std::span<const Vec3> samples_a, std::span<const Vec3> samples_b) {
    if (samples_a.size() != samples_b.size()) {
        throw std::invalid_argument("sample sequences must have equal length");
    }
    const int k = static_cast<int>(samples_a.size());
    LocalAlignment out;
    out.matched_count = k;
    if (k < 4) {
        return out;  // insufficient correspondence sentinel
    }

    Vec3 mean_a = Vec3::Zero(), mean_b = Vec3::Zero();
    for (int i = 0; i < k; ++i) {
        mean_a += samples_a[i];
        mean_b += samples_b[i];
    }
    mean_a /= k;
    mean_b /= k;

    double sq_a = 0.0, sq_b = 0.0;
    for (int i = 0; i < k; ++i) {
        sq_a += (samples_a[i] - mean_a).squaredNorm();
        sq_b += (samples_b[i] - mean_b).squaredNorm();
    }
    const double scale_a = std::sqrt(sq_a);
    const double scale_b = std::sqrt(sq_b);
    if (scale_a < 1e-300 || scale_b < 1e-300) {
        throw std::runtime_error("degenerate correspondence");
    }

    Mat3 cross = Mat3::Zero();
    for (int i = 0; i < k; ++i) {
        cross += ((samples_a[i] - mean_a) / scale_a) * ((samples_b[i] - mean_b) / scale_b).transpose();
    }

    const Procrustes p = solve_cross_covariance(cross);
    out.measure = std::acos(std::clamp(p.trace, -1.0, 1.0));
    out.local_rotation = RotationMatrix::unchecked(p.rotation);
    out.local_scale = scale_a / scale_b;
    return out;
}

CombinedMeasure combined_measure(const PartitionProfile& a, const PartitionProfile& b) {
    CombinedMeasure out;
    const auto contour_pairs = matched_pairs(a, b, SampleSet::contour);
    if (!contour_pairs) {
        return out;  // sentinel: no usable contour correspondence
    }
    out.contour = measure_pair(contour_pairs->a, contour_pairs->b);
    out.g_k = out.contour.measure;

    const auto feature_pairs = matched_pairs(a, b, SampleSet::features);
    if (feature_pairs) {
        const LocalAlignment feat = measure_pair(feature_pairs->a, feature_pairs->b);
        out.g_k = std::max(out.g_k, feat.measure);
    }
    return out;
}

}  // namespace pkss
