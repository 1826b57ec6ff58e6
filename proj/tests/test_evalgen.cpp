#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pkss/evalgen.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <array>
#include <numbers>
#include <random>
#include <set>

using namespace pkss;

TEST_CASE("random_similarity is reproducible and honors degenerate ranges") {
    const SimilarityTransform a = random_similarity(7, 2.5);
    const SimilarityTransform b = random_similarity(7, 2.5);
    CHECK(a.scale == b.scale);
    CHECK(a.translation == b.translation);
    CHECK((a.rotation.matrix() - b.rotation.matrix()).cwiseAbs().maxCoeff() == 0.0);

    RandomSimilaritySpec frozen;
    frozen.rotation_range = {0.0, 0.0};
    frozen.scale_range = {1.0, 1.0};
    frozen.translation_frac = 0.0;
    const SimilarityTransform id = random_similarity(123, 2.5, frozen);
    CHECK(id.scale == 1.0);
    CHECK(id.translation.norm() == 0.0);
    CHECK((id.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random_similarity scale draws have the uniform mean") {
    double total = 0.0;
    for (int i = 0; i < 10000; ++i) {
        total += random_similarity(1000 + i, 1.0).scale;
    }
    const double mean = total / 10000.0;
    CHECK(std::abs(mean - 1.25) < 0.025);
}

TEST_CASE("add_noise displacement variance matches the requested sigma") {
    const auto cloud = testsupport::fibonacci_sphere(50000);
    const PointCloud with_normals = estimate_normals(cloud, 12);

    NoiseSpec spec;
    spec.kind = NoiseKind::gaussian;
    spec.r = 0.6;
    spec.seed = 99;
    const double sigma = spec.r * mean_neighbor_distance(cloud, spec.k);

    const PointCloud noisy = add_noise(with_normals, spec);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double m = (noisy.points[i] - cloud.points[i]).dot(with_normals.normals[i]);
        sum += m;
        sumsq += m * m;
    }
    const double n = static_cast<double>(cloud.size());
    const double variance = sumsq / n - (sum / n) * (sum / n);
    CHECK(std::abs(variance - sigma * sigma) < 0.05 * sigma * sigma);
    CHECK(std::abs(sum / n) < 3.0 * sigma / std::sqrt(n));
}

TEST_CASE("add_noise vanishes in the small-r limit") {
    const auto cloud = testsupport::fibonacci_sphere(500);
    NoiseSpec spec;
    spec.r = 1e-12;
    spec.seed = 1;
    const PointCloud noisy = add_noise(cloud, spec);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((noisy.points[i] - cloud.points[i]).norm() < 1e-10);
    }
}

TEST_CASE("mean noise draws stay within the bound and center at zero") {
    const auto cloud = testsupport::fibonacci_sphere(20000);
    const PointCloud with_normals = estimate_normals(cloud, 12);
    NoiseSpec spec;
    spec.kind = NoiseKind::mean;
    spec.r = 0.4;
    spec.seed = 5;
    const double sigma = spec.r * mean_neighbor_distance(cloud, spec.k);
    const PointCloud noisy = add_noise(with_normals, spec);
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double m = (noisy.points[i] - cloud.points[i]).dot(with_normals.normals[i]);
        CHECK(std::abs(m) <= sigma);
        sum += m;
    }
    CHECK(std::abs(sum / cloud.size()) < 3.0 * sigma / std::sqrt(cloud.size()));
}

TEST_CASE("make_defect removes the requested count and keeps survivor order") {
    const auto cloud = testsupport::sphere_surface(1000, 71);
    const PointCloud kept = make_defect(cloud, 0.4, 11);
    CHECK(kept.size() == 600);

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < cloud.size() && cursor < kept.size(); ++i) {
        if (cloud.points[i] == kept.points[cursor]) ++cursor;
    }
    CHECK(cursor == kept.size());  // survivors keep input order
}

TEST_CASE("make_defect with fraction zero is the identity") {
    const auto cloud = testsupport::uniform_box(100, 73);
    const PointCloud kept = make_defect(cloud, 0.0, 3);
    CHECK(kept.points == cloud.points);
    CHECK_THROWS_AS(make_defect(cloud, 1.0, 3), std::invalid_argument);
}

TEST_CASE("make_defect removed region is exactly the nearest set to its seed") {
    const auto cloud = testsupport::uniform_box(500, 75);
    const PointCloud kept = make_defect(cloud, 0.3, 17);
    // Reconstruct the removal set.
    std::set<std::array<double, 3>> kept_set;
    for (const Vec3& p : kept.points) kept_set.insert({p.x(), p.y(), p.z()});
    std::vector<int> removed;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        const Vec3& p = cloud.points[i];
        if (!kept_set.count({p.x(), p.y(), p.z()})) removed.push_back(i);
    }
    REQUIRE(removed.size() == 150);
    // One of the removed points is the seed: distances from it order the
    // removed set strictly before the survivors.
    bool any_seed_works = false;
    for (int candidate : removed) {
        double max_removed = 0.0;
        for (int i : removed) {
            max_removed = std::max(max_removed, (cloud.points[i] - cloud.points[candidate]).norm());
        }
        double min_survivor = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
            if (kept_set.count({cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z()})) {
                min_survivor = std::min(min_survivor,
                                        (cloud.points[i] - cloud.points[candidate]).norm());
            }
        }
        if (max_removed <= min_survivor) {
            any_seed_works = true;
            break;
        }
    }
    CHECK(any_seed_works);
}

TEST_CASE("band_decimate keeps alternating slabs") {
    PointCloud line;
    for (int i = 0; i < 100; ++i) line.points.emplace_back(i * 0.01, 0.0, 0.0);
    const PointCloud kept = band_decimate(line, 2, Axis::x);
    CHECK(std::abs(static_cast<int>(kept.size()) - 50) <= 2);

    // Strict alternation: kept coordinates fall in even-indexed slabs.
    const double extent = 0.99;
    for (const Vec3& p : kept.points) {
        const int slab = static_cast<int>(p.x() / extent * 4.0);
        CHECK(slab % 2 == 0);
    }
    CHECK_THROWS_AS(band_decimate(line, 1, Axis::x), std::invalid_argument);
}

TEST_CASE("band_decimate is idempotent along the same axis") {
    const auto cloud = testsupport::uniform_box(2000, 77);
    const PointCloud once = band_decimate(cloud, 3, Axis::z);
    const PointCloud twice = band_decimate(once, 3, Axis::z);
    CHECK(once.points == twice.points);
}

TEST_CASE("mse_closest_point basics and oracle") {
    const auto cloud = testsupport::uniform_box(200, 79);
    CHECK(mse_closest_point(cloud, cloud) == 0.0);

    PointCloud single;
    single.points = {Vec3(0, 0, 0)};
    PointCloud shifted;
    shifted.points = {Vec3(0.3, 0, 0)};
    CHECK(mse_closest_point(single, shifted) == doctest::Approx(0.09).epsilon(1e-12));

    const auto a = testsupport::uniform_box(300, 81);
    const auto b = testsupport::uniform_box(400, 83);
    CHECK(mse_closest_point(a, b) ==
          doctest::Approx(oracles::brute_mse(a.points, b.points)).epsilon(1e-10));
}

TEST_CASE("mse_normal endpoints") {
    auto cloud = testsupport::fibonacci_sphere(300);
    const PointCloud oriented = estimate_normals(cloud, 12);
    CHECK(mse_normal(oriented, oriented) == doctest::Approx(0.0).epsilon(1e-12));

    PointCloud flipped = oriented;
    for (Vec3& n : flipped.normals) n = -n;
    CHECK(mse_normal(flipped, oriented) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mse_normal of independent random normals is one") {
    std::mt19937_64 rng(85);
    PointCloud a, b;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec3 p(static_cast<double>(i), 0.0, 0.0);
        a.points.push_back(p);
        b.points.push_back(p);
        a.normals.push_back(testsupport::random_direction(rng));
        b.normals.push_back(testsupport::random_direction(rng));
    }
    CHECK(mse_normal(a, b) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gt_cosine endpoints and the success threshold angle") {
    std::mt19937_64 rng(87);
    const RotationMatrix r = testsupport::random_rotation(rng);
    CHECK(gt_cosine(r, r) == doctest::Approx(1.0).epsilon(1e-12));

    const RotationMatrix half_turn = r * RotationMatrix::about_x(std::numbers::pi);
    CHECK(gt_cosine(r, half_turn) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));

    // tr = 1 + 2 cos(theta): gt_cos hits 0.8 near theta = 45.6 degrees.
    const double theta = 45.6 * std::numbers::pi / 180.0;
    const RotationMatrix off = r * RotationMatrix::about_z(theta);
    CHECK(gt_cosine(r, off) == doctest::Approx((1.0 + 2.0 * std::cos(theta)) / 3.0).epsilon(1e-9));
    CHECK(gt_cosine(r, off) == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("gt_cosine is invariant under common left rotation") {
    std::mt19937_64 rng(89);
    const RotationMatrix a = testsupport::random_rotation(rng);
    const RotationMatrix b = testsupport::random_rotation(rng);
    const RotationMatrix q = testsupport::random_rotation(rng);
    CHECK(gt_cosine(q * a, q * b) == doctest::Approx(gt_cosine(a, b)).epsilon(1e-9));
}

TEST_CASE("registration_recall counts the success rule") {
    std::vector<Metrics> records;
    Metrics good;
    good.gt_cos = 0.95;
    good.mse = 1e-5;
    Metrics bad_angle;
    bad_angle.gt_cos = 0.5;
    bad_angle.mse = 1e-5;
    Metrics bad_mse;
    bad_mse.gt_cos = 0.95;
    bad_mse.mse = 0.5;
    records = {good, good, bad_angle, bad_mse};
    CHECK(registration_recall(records, true) == doctest::Approx(0.5));
    CHECK(registration_recall(records, false) == doctest::Approx(0.75));

    records.assign(4, good);
    CHECK(registration_recall(records, true) == doctest::Approx(1.0));
    Metrics half;
    half.gt_cos = 0.5;
    records.assign(4, half);
    CHECK(registration_recall(records, true) == doctest::Approx(0.0));
}
