#include "pkss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace pkss {

void PointCloud::validate() const {
    if (points.empty()) {
        throw std::invalid_argument("point cloud is empty");
    }
    for (const Vec3& p : points) {
        if (!p.allFinite()) {
            throw std::invalid_argument("point cloud contains non-finite coordinates");
        }
    }
    if (!normals.empty()) {
        if (normals.size() != points.size()) {
            throw std::invalid_argument("normal count does not match point count");
        }
        for (const Vec3& n : normals) {
            if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-6) {
                throw std::invalid_argument("normals must have unit length");
            }
        }
    }
}

Bounds bounds(const PointCloud& cloud) {
    Bounds b;
    for (const Vec3& p : cloud.points) {
        b.min = b.min.cwiseMin(p);
        b.max = b.max.cwiseMax(p);
    }
    return b;
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
    const Mat3 gram = m.transpose() * m;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("rotation matrix is not orthonormal");
    }
    if (std::abs(m.determinant() - 1.0) > 1e-9) {
        throw std::invalid_argument("rotation matrix must have determinant +1");
    }
}

RotationMatrix RotationMatrix::about_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return RotationMatrix(m, unchecked_t{});
}

RotationMatrix RotationMatrix::about_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return RotationMatrix(m, unchecked_t{});
}

RotationMatrix RotationMatrix::about_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 m;
    m << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return RotationMatrix(m, unchecked_t{});
}

double rotation_angle(const RotationMatrix& a, const RotationMatrix& b) {
    const double tr = (a.matrix().transpose() * b.matrix()).trace();
    return std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0));
}

SimilarityTransform SimilarityTransform::inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transposed();
    inv.translation = -(inv.rotation * translation) / scale;
    return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& other) const {
    SimilarityTransform out;
    out.scale = scale * other.scale;
    out.rotation = rotation * other.rotation;
    out.translation = scale * (rotation * other.translation) + translation;
    return out;
}

Eigen::Matrix4d SimilarityTransform::homogeneous() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = scale * rotation.matrix();
    m.block<3, 1>(0, 3) = translation;
    return m;
}

PointCloud apply_transform(const SimilarityTransform& t, const PointCloud& cloud) {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) {
        out.points.push_back(t.apply(p));
    }
    if (cloud.has_normals()) {
        out.normals.reserve(cloud.normals.size());
        for (const Vec3& n : cloud.normals) {
            out.normals.push_back((t.rotation * n).normalized());
        }
    }
    return out;
}

namespace {

// Sign convention for PCA eigenvectors: non-negative dot with (1,1,1),
// exact ties cascading to +x, +y, +z.
Vec3 fix_sign(const Vec3& e) {
    const double d = e.x() + e.y() + e.z();
    if (d > 0.0) return e;
    if (d < 0.0) return -e;
    if (e.x() != 0.0) return e.x() > 0.0 ? e : -e;
    if (e.y() != 0.0) return e.y() > 0.0 ? e : -e;
    if (e.z() != 0.0) return e.z() > 0.0 ? e : -e;
    return e;
}

}  // namespace

PcaFrame pca(std::span<const Vec3> points) {
    if (points.empty()) {
        throw std::invalid_argument("empty point set");
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : points) mean += p;
    mean /= static_cast<double>(points.size());

    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    // Solver returns ascending eigenvalues; we want descending.
    PcaFrame frame;
    frame.mean = mean;
    frame.u = fix_sign(solver.eigenvectors().col(2));
    frame.v = fix_sign(solver.eigenvectors().col(1));
    frame.w = fix_sign(solver.eigenvectors().col(0));
    frame.eigenvalues = Vec3(std::max(solver.eigenvalues()(2), 0.0),
                             std::max(solver.eigenvalues()(1), 0.0),
                             std::max(solver.eigenvalues()(0), 0.0));
    return frame;
}

KnnIndex::KnnIndex(std::span<const Vec3> points)
    : pts_(points.begin(), points.end()), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    if (!pts_.empty()) {
        nodes_.reserve(2 * pts_.size() / 8 + 1);
        root_ = build(0, static_cast<int>(pts_.size()));
    }
}

int KnnIndex::build(int begin, int end) {
    constexpr int kLeafSize = 16;
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        // Ascending index inside the leaf keeps tie handling trivial.
        std::sort(order_.begin() + begin, order_.begin() + end);
        return id;
    }
    // Split on the axis of largest spread.
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(pts_[order_[i]]);
        hi = hi.cwiseMax(pts_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double ca = pts_[a](axis), cb = pts_[b](axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    const double split = pts_[order_[mid]](axis);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

namespace {

// Max-heap ordering for (squared distance, index): the heap top is the
// current worst candidate, where larger distance is worse and, at equal
// distance, the larger index is worse.
inline bool heap_less(const std::pair<double, int>& a, const std::pair<double, int>& b) {
    return a.first < b.first || (a.first == b.first && a.second < b.second);
}

}  // namespace

void KnnIndex::search(int node, const Vec3& query, int k, int exclude_index,
                      std::vector<std::pair<double, int>>& heap) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const int idx = order_[i];
            if (idx == exclude_index) continue;
            const double d2 = (pts_[idx] - query).squaredNorm();
            const std::pair<double, int> cand{d2, idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), heap_less);
            } else if (heap_less(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), heap_less);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), heap_less);
            }
        }
        return;
    }
    const double delta = query(n.axis) - n.split;
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, query, k, exclude_index, heap);
    // The far side can still hold an equal-distance, lower-index candidate,
    // so only prune when it is strictly farther than the current worst.
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().first) {
        search(far, query, k, exclude_index, heap);
    }
}

std::vector<int> KnnIndex::knn(const Vec3& query, int k, int exclude_index) const {
    if (k <= 0) {
        throw std::invalid_argument("k must be positive");
    }
    const int available =
        static_cast<int>(pts_.size()) - (exclude_index >= 0 && exclude_index < static_cast<int>(pts_.size()) ? 1 : 0);
    if (k > available) {
        throw std::invalid_argument("insufficient points");
    }
    std::vector<std::pair<double, int>> heap;
    heap.reserve(k + 1);
    search(root_, query, k, exclude_index, heap);
    std::sort(heap.begin(), heap.end(), heap_less);
    std::vector<int> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
    return out;
}

double KnnIndex::kth_distance(const Vec3& query, int k, int exclude_index) const {
    if (k <= 0) {
        throw std::invalid_argument("k must be positive");
    }
    const int available =
        static_cast<int>(pts_.size()) - (exclude_index >= 0 && exclude_index < static_cast<int>(pts_.size()) ? 1 : 0);
    if (k > available) {
        throw std::invalid_argument("insufficient points");
    }
    std::vector<std::pair<double, int>> heap;
    heap.reserve(k + 1);
    search(root_, query, k, exclude_index, heap);
    double worst = 0.0;
    for (const auto& [d2, idx] : heap) worst = std::max(worst, d2);
    return std::sqrt(worst);
}

std::vector<int> knn(const PointCloud& cloud, const Vec3& query, int k) {
    KnnIndex index(cloud);
    int exclude = -1;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (cloud.points[i] == query) {
            exclude = static_cast<int>(i);
            break;
        }
    }
    return index.knn(query, k, exclude);
}

PointCloud estimate_normals(const PointCloud& cloud, int k) {
    const int n = static_cast<int>(cloud.size());
    if (n <= k) {
        throw std::invalid_argument("insufficient points");
    }
    KnnIndex index(cloud);

    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        neighbors[i] = index.knn(cloud.points[i], k, i);
    }

    PointCloud out = cloud;
    out.normals.assign(n, Vec3::UnitZ());
    std::vector<Vec3> scratch(k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) scratch[j] = cloud.points[neighbors[i][j]];
        const PcaFrame frame = pca(scratch);
        out.normals[i] = frame.w;  // smallest-eigenvalue direction
    }

    // Undirected k-NN graph; deterministic adjacency order.
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int j : neighbors[i]) {
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    // Orientation propagation, one component at a time, each seeded at its
    // highest-z point oriented toward +z.
    std::vector<char> visited(n, 0);
    std::vector<int> by_z(n);
    std::iota(by_z.begin(), by_z.end(), 0);
    std::sort(by_z.begin(), by_z.end(), [&](int a, int b) {
        const double za = cloud.points[a].z(), zb = cloud.points[b].z();
        return za > zb || (za == zb && a < b);
    });
    std::deque<int> queue;
    for (int seed : by_z) {
        if (visited[seed]) continue;
        if (out.normals[seed].z() < 0.0) out.normals[seed] = -out.normals[seed];
        visited[seed] = 1;
        queue.push_back(seed);
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            for (int nb : adj[cur]) {
                if (visited[nb]) continue;
                if (out.normals[cur].dot(out.normals[nb]) < 0.0) {
                    out.normals[nb] = -out.normals[nb];
                }
                visited[nb] = 1;
                queue.push_back(nb);
            }
        }
    }
    return out;
}

}  // namespace pkss
