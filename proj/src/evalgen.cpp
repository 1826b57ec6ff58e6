#include "pkss/evalgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pkss {

void NoiseSpec::validate() const {
    if (r <= 0.0) {
        throw std::invalid_argument("noise range r must be positive");
    }
    if (k < 1) {
        throw std::invalid_argument("noise neighbor count must be positive");
    }
}

SimilarityTransform random_similarity(std::uint64_t seed, double bbox_diagonal,
                                      const RandomSimilaritySpec& spec) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(spec.rotation_range[0], spec.rotation_range[1]);
    const double ax = angle(rng);
    const double ay = angle(rng);
    const double az = angle(rng);

    std::uniform_real_distribution<double> scale(spec.scale_range[0], spec.scale_range[1]);
    SimilarityTransform t;
    t.rotation = RotationMatrix::about_z(az) * RotationMatrix::about_y(ay) *
                 RotationMatrix::about_x(ax);
    t.scale = scale(rng);

    const double bound = spec.translation_frac * bbox_diagonal;
    if (bound > 0.0) {
        std::uniform_real_distribution<double> offset(-bound, bound);
        t.translation = Vec3(offset(rng), offset(rng), offset(rng));
    }
    return t;
}

double mean_neighbor_distance(const PointCloud& cloud, int k) {
    const int n = static_cast<int>(cloud.size());
    if (n <= k) {
        throw std::invalid_argument("insufficient points");
    }
    KnnIndex index(cloud);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::vector<int> nbrs = index.knn(cloud.points[i], k, i);
        double sum = 0.0;
        for (int j : nbrs) sum += (cloud.points[j] - cloud.points[i]).norm();
        total += sum / static_cast<double>(k);
    }
    return total / static_cast<double>(n);
}

PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec) {
    spec.validate();
    const PointCloud with_normals =
        cloud.has_normals() ? cloud : estimate_normals(cloud, spec.k);

    const double sigma = spec.r * mean_neighbor_distance(cloud, spec.k);
    PointCloud out = with_normals;
    if (sigma == 0.0) {
        return out;
    }
    std::mt19937_64 rng(spec.seed);
    if (spec.kind == NoiseKind::gaussian) {
        std::normal_distribution<double> dist(0.0, sigma);
        for (std::size_t i = 0; i < out.points.size(); ++i) {
            out.points[i] += with_normals.normals[i] * dist(rng);
        }
    } else {
        std::uniform_real_distribution<double> dist(-sigma, sigma);
        for (std::size_t i = 0; i < out.points.size(); ++i) {
            out.points[i] += with_normals.normals[i] * dist(rng);
        }
    }
    return out;
}

PointCloud make_defect(const PointCloud& cloud, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction >= 1.0) {
        throw std::invalid_argument("defect fraction must lie in [0, 1)");
    }
    const int n = static_cast<int>(cloud.size());
    const int n_remove = static_cast<int>(std::ceil(fraction * n));
    if (n_remove == 0) {
        return cloud;
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    const Vec3 center = cloud.points[pick(rng)];

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = (cloud.points[a] - center).squaredNorm();
        const double db = (cloud.points[b] - center).squaredNorm();
        return da < db || (da == db && a < b);
    });
    std::vector<char> removed(n, 0);
    for (int i = 0; i < n_remove; ++i) removed[order[i]] = 1;

    PointCloud out;
    out.points.reserve(n - n_remove);
    for (int i = 0; i < n; ++i) {
        if (removed[i]) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
    }
    return out;
}

PointCloud band_decimate(const PointCloud& cloud, int bands, Axis axis) {
    if (bands < 2) {
        throw std::invalid_argument("bands must be at least 2");
    }
    const Bounds box = bounds(cloud);
    int a = 0;
    switch (axis) {
        case Axis::x: a = 0; break;
        case Axis::y: a = 1; break;
        case Axis::z: a = 2; break;
        case Axis::longest: {
            const Vec3 e = box.extent();
            a = e.y() > e.x() ? 1 : 0;
            if (e.z() > e(a)) a = 2;
            break;
        }
    }
    const int slabs = 2 * bands;
    const double extent = box.extent()(a);
    PointCloud out;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        int slab = 0;
        if (extent > 0.0) {
            // Unclamped: the exact upper-boundary point lands in degenerate
            // slab 2*bands (even, kept), so the extent survives repetition
            // and re-applying the same spec is idempotent.
            slab = static_cast<int>((cloud.points[i](a) - box.min(a)) / extent * slabs);
        }
        if (slab % 2 == 0) {
            out.points.push_back(cloud.points[i]);
            if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
        }
    }
    return out;
}

double mse_closest_point(const PointCloud& aligned_source, const PointCloud& templ) {
    if (aligned_source.points.empty() || templ.points.empty()) {
        throw std::invalid_argument("clouds must be non-empty");
    }
    KnnIndex index(templ);
    double total = 0.0;
    for (const Vec3& p : aligned_source.points) {
        const int nearest = index.knn(p, 1).front();
        total += (templ.points[nearest] - p).squaredNorm();
    }
    return total / static_cast<double>(aligned_source.points.size());
}

double mse_normal(const PointCloud& aligned_source, const PointCloud& templ) {
    if (!aligned_source.has_normals() || !templ.has_normals()) {
        throw std::invalid_argument("both clouds need normals");
    }
    KnnIndex index(templ);
    double total = 0.0;
    for (std::size_t i = 0; i < aligned_source.points.size(); ++i) {
        const int nearest = index.knn(aligned_source.points[i], 1).front();
        total += 1.0 - aligned_source.normals[i].dot(templ.normals[nearest]);
    }
    return total / static_cast<double>(aligned_source.points.size());
}

double gt_cosine(const RotationMatrix& ground_truth, const RotationMatrix& recovered) {
    return (ground_truth.matrix().transpose() * recovered.matrix()).trace() / 3.0;
}

bool registration_success(double gt_cos, double mse, bool use_mse_condition) {
    return gt_cos > 0.8 && (!use_mse_condition || mse < 0.001);
}

double registration_recall(std::span<const Metrics> records, bool use_mse_condition) {
    if (records.empty()) {
        throw std::invalid_argument("empty record set");
    }
    std::size_t hits = 0;
    for (const Metrics& m : records) {
        if (registration_success(m.gt_cos, m.mse, use_mse_condition)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

}  // namespace pkss
