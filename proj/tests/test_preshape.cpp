#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pkss/preshape.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <random>
#include <set>

using namespace pkss;

TEST_CASE("cull_outliers removes the far point of a line with a straggler") {
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(100, 0, 0)};
    const CullResult result = cull_outliers(cloud, 1);
    CHECK(result.removed == std::vector<int>{3});
    REQUIRE(result.cloud.size() == 3);
    CHECK(result.cloud.points[2].isApprox(Vec3(2, 0, 0), 0.0));
}

TEST_CASE("cull_outliers keeps a mutual pair") {
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    const CullResult result = cull_outliers(cloud, 1);
    CHECK(result.removed.empty());
    CHECK(result.cloud.size() == 2);
}

TEST_CASE("cull_outliers keeps every point of a uniform grid") {
    const auto cloud = testsupport::integer_grid(10);
    const CullResult result = cull_outliers(cloud, 6);
    CHECK(result.removed.empty());
    CHECK(result.cloud.size() == cloud.size());
}

TEST_CASE("cull_outliers equals the brute-force mutual-neighbor oracle") {
    for (int trial = 0; trial < 8; ++trial) {
        const auto cloud = testsupport::uniform_box(120 + 60 * trial, 900 + trial);
        const CullResult result = cull_outliers(cloud, 12);
        const auto flags = oracles::brute_cull_flags(cloud.points, 12);
        std::vector<int> expected;
        for (int i = 0; i < static_cast<int>(flags.size()); ++i) {
            if (flags[i]) expected.push_back(i);
        }
        CHECK(result.removed == expected);
    }
}

TEST_CASE("cull_outliers preserves survivor order") {
    auto cloud = testsupport::uniform_box(200, 77);
    cloud.points.push_back(Vec3(50, 50, 50));  // certain outlier
    const CullResult result = cull_outliers(cloud, 4);
    std::size_t cursor = 0;
    std::set<int> removed(result.removed.begin(), result.removed.end());
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        if (removed.count(i)) continue;
        REQUIRE(cursor < result.cloud.size());
        CHECK(result.cloud.points[cursor] == cloud.points[i]);
        ++cursor;
    }
    CHECK(cursor == result.cloud.size());
}

TEST_CASE("cull_outliers is idempotent on its own output") {
    for (int trial = 0; trial < 4; ++trial) {
        const auto cloud = testsupport::random_blob(400, 3000 + trial);
        const CullResult first = cull_outliers(cloud, 12);
        const CullResult second = cull_outliers(first.cloud, 12);
        CHECK(second.removed.empty());
    }
}

TEST_CASE("resample picks the centroid corner then the opposite corner") {
    PointCloud cube;
    for (int i = 0; i < 8; ++i) {
        cube.points.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
    }
    const PointCloud out = resample(cube, 2);
    REQUIRE(out.size() == 2);
    // All corners are equidistant from the centroid; the tie goes to index 0.
    CHECK(out.points[0] == cube.points[0]);
    CHECK(out.points[1] == cube.points[7]);
}

TEST_CASE("resample is the identity when the target covers the cloud") {
    const auto cloud = testsupport::uniform_box(50, 8);
    const PointCloud out = resample(cloud, 50);
    CHECK(out.points == cloud.points);
    CHECK(resample(cloud, 500).points == cloud.points);
}

TEST_CASE("resample rejects a zero target") {
    const auto cloud = testsupport::uniform_box(10, 9);
    CHECK_THROWS_AS(resample(cloud, 0), std::invalid_argument);
}

TEST_CASE("resample spreads sphere samples to near-uniform spacing") {
    const auto cloud = testsupport::sphere_surface(5000, 13);
    const PointCloud out = resample(cloud, 1000);
    REQUIRE(out.size() == 1000);
    double min_pair = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            min_pair = std::min(min_pair, (out.points[i] - out.points[j]).norm());
        }
    }
    const double expected_spacing = std::sqrt(4.0 * std::numbers::pi / 1000.0);
    CHECK(min_pair >= 0.5 * expected_spacing);
}

TEST_CASE("resample output is a subset of the input") {
    const auto cloud = testsupport::uniform_box(300, 15);
    const PointCloud out = resample(cloud, 40);
    std::set<std::array<double, 3>> members;
    for (const Vec3& p : cloud.points) members.insert({p.x(), p.y(), p.z()});
    for (const Vec3& p : out.points) {
        CHECK(members.count({p.x(), p.y(), p.z()}) == 1);
    }
}

TEST_CASE("to_preshape of a symmetric pair") {
    PointCloud cloud;
    cloud.points = {Vec3(1, 0, 0), Vec3(-1, 0, 0)};
    const PreShape shape = to_preshape(cloud);
    CHECK(shape.centroid.isApprox(Vec3(0, 0, 0), 0.0));
    CHECK(shape.scale == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(shape.rows(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(shape.rows(1, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("to_preshape rows have zero mean and unit Frobenius norm") {
    const auto cloud = testsupport::uniform_box(500, 17);
    const PreShape shape = to_preshape(cloud);
    CHECK(shape.rows.colwise().mean().norm() < 1e-9);
    CHECK(shape.rows.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("to_preshape quotients out scale and translation") {
    std::mt19937_64 rng(19);
    const auto cloud = testsupport::uniform_box(200, 23);
    const PreShape base = to_preshape(cloud);
    for (int trial = 0; trial < 20; ++trial) {
        SimilarityTransform t;
        t.scale = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        t.translation = 20.0 * testsupport::random_direction(rng);
        const PreShape moved = to_preshape(apply_transform(t, cloud));
        CHECK((moved.rows - base.rows).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("to_preshape rejects degenerate inputs") {
    PointCloud one;
    one.points = {Vec3(1, 2, 3)};
    CHECK_THROWS_AS(to_preshape(one), std::invalid_argument);

    PointCloud same;
    same.points = {Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3(1, 2, 3)};
    CHECK_THROWS_WITH_AS(to_preshape(same), "zero shape scale", std::runtime_error);
}

TEST_CASE("preprocess config validation") {
    CHECK_NOTHROW(PreprocessConfig{}.validate());
    CHECK_THROWS_AS((PreprocessConfig{0, 100}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((PreprocessConfig{100, 100}.validate()), std::invalid_argument);
}
