#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace pkss {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Point sets are stored row-wise: row i is point i.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Unordered 3D point set with optional per-point unit normals.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty, or aligned index-wise with points

    std::size_t size() const { return points.size(); }
    bool has_normals() const { return !normals.empty(); }

    /// Throws std::invalid_argument if the cloud breaks its invariants:
    /// at least one point, finite coordinates, unit normals matching points.
    void validate() const;
};

/// Axis-aligned bounding box helpers.
struct Bounds {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());
    Vec3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
};
Bounds bounds(const PointCloud& cloud);

/// Proper rotation (orthonormal, det = +1), validated on construction.
class RotationMatrix {
public:
    RotationMatrix() : m_(Mat3::Identity()) {}
    explicit RotationMatrix(const Mat3& m);

    static RotationMatrix identity() { return RotationMatrix(); }
    static RotationMatrix about_x(double angle);
    static RotationMatrix about_y(double angle);
    static RotationMatrix about_z(double angle);
    /// Builds a rotation without the orthonormality check. The caller
    /// guarantees m is a proper rotation (e.g. a product of rotations).
    static RotationMatrix unchecked(const Mat3& m) { return RotationMatrix(m, unchecked_t{}); }

    const Mat3& matrix() const { return m_; }
    RotationMatrix transposed() const { return RotationMatrix(m_.transpose(), unchecked_t{}); }

    Vec3 operator*(const Vec3& p) const { return m_ * p; }
    RotationMatrix operator*(const RotationMatrix& o) const {
        return RotationMatrix(m_ * o.m_, unchecked_t{});
    }

private:
    struct unchecked_t {};
    RotationMatrix(const Mat3& m, unchecked_t) : m_(m) {}
    Mat3 m_;
};

/// Angle (radians) of the relative rotation between a and b.
double rotation_angle(const RotationMatrix& a, const RotationMatrix& b);

/// p -> scale * R * p + translation, scale > 0.
struct SimilarityTransform {
    double scale = 1.0;
    RotationMatrix rotation;
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
    SimilarityTransform inverse() const;
    /// Composition: result(p) = this(other(p)).
    SimilarityTransform compose(const SimilarityTransform& other) const;
    Eigen::Matrix4d homogeneous() const;
};

PointCloud apply_transform(const SimilarityTransform& t, const PointCloud& cloud);

/// Principal axes of a point set. Eigenvalues in descending order,
/// eigenvector signs fixed deterministically (see pca()).
struct PcaFrame {
    Vec3 mean = Vec3::Zero();
    Vec3 u = Vec3::UnitX();
    Vec3 v = Vec3::UnitY();
    Vec3 w = Vec3::UnitZ();
    Vec3 eigenvalues = Vec3::Zero();  // descending, non-negative
};

/// PCA of the covariance (1/n normalization) of the given points.
/// Eigenvector signs are fixed so each has non-negative dot product with
/// (1,1,1); exact ties resolve toward +x, then +y, then +z.
/// Throws std::invalid_argument("empty point set") on empty input.
PcaFrame pca(std::span<const Vec3> points);

/// Static kd-tree over an immutable point set. Construction is
/// deterministic; concurrent read-only queries are safe.
class KnnIndex {
public:
    explicit KnnIndex(std::span<const Vec3> points);
    explicit KnnIndex(const PointCloud& cloud) : KnnIndex(std::span<const Vec3>(cloud.points)) {}

    std::size_t size() const { return pts_.size(); }

    /// Indices of the k nearest points to query, nearest first; ties break
    /// toward the lower index. exclude_index (if >= 0) is never returned.
    /// Throws std::invalid_argument("insufficient points") when fewer than
    /// k candidates are available.
    std::vector<int> knn(const Vec3& query, int k, int exclude_index = -1) const;

    /// Distance from query to its k-th nearest neighbor (same exclusion
    /// and tie rules as knn()).
    double kth_distance(const Vec3& query, int k, int exclude_index = -1) const;

private:
    struct Node {
        int axis = -1;        // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf payload range in order_
    };

    int build(int begin, int end);
    void search(int node, const Vec3& query, int k, int exclude_index,
                std::vector<std::pair<double, int>>& heap) const;

    std::vector<Vec3> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// k nearest neighbors of query within cloud. If query coincides exactly
/// with a cloud member, that member (the lowest such index) is excluded
/// from its own neighborhood.
std::vector<int> knn(const PointCloud& cloud, const Vec3& query, int k);

/// Per-point normals from k-neighborhood PCA (smallest-eigenvalue
/// eigenvector), oriented consistently by breadth-first propagation over
/// the k-NN graph. Each connected component starts from its highest-z
/// point, oriented toward +z.
PointCloud estimate_normals(const PointCloud& cloud, int k);

}  // namespace pkss
