#pragma once

#include "pkss/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

// Procedural point clouds shared by the unit and acceptance suites.
namespace testsupport {

using pkss::PointCloud;
using pkss::Vec3;

inline PointCloud uniform_box(int n, std::uint64_t seed, double half = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-half, half);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        cloud.points.emplace_back(coord(rng), coord(rng), coord(rng));
    }
    return cloud;
}

inline Vec3 random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 d;
    do {
        d = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (d.norm() < 1e-9);
    return d.normalized();
}

inline PointCloud sphere_surface(int n, std::uint64_t seed, double radius = 1.0) {
    std::mt19937_64 rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        cloud.points.push_back(radius * random_direction(rng));
    }
    return cloud;
}

// Deterministic, evenly spread spherical sample.
inline PointCloud fibonacci_sphere(int n, double radius = 1.0) {
    PointCloud cloud;
    cloud.points.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        cloud.points.emplace_back(radius * r * std::cos(phi), radius * r * std::sin(phi),
                                  radius * z);
    }
    return cloud;
}

// Smooth star-shaped surface with random bumps; generically asymmetric.
inline PointCloud random_blob(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.15, 0.4);
    std::uniform_real_distribution<double> sharp(6.0, 16.0);
    constexpr int n_lobes = 6;
    std::array<Vec3, n_lobes> lobe_dir;
    std::array<double, n_lobes> lobe_amp, lobe_sharp;
    for (int j = 0; j < n_lobes; ++j) {
        lobe_dir[j] = random_direction(rng);
        lobe_amp[j] = amp(rng);
        lobe_sharp[j] = sharp(rng);
    }
    PointCloud cloud;
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Vec3 d = random_direction(rng);
        double r = 1.0;
        for (int j = 0; j < n_lobes; ++j) {
            r += lobe_amp[j] * std::exp(lobe_sharp[j] * (lobe_dir[j].dot(d) - 1.0));
        }
        cloud.points.push_back(r * d);
    }
    return cloud;
}

// Surface of revolution about z, replicated over 12 azimuth sectors so the
// outer contour is exactly 12-fold rotationally symmetric, plus an interior
// cluster constellation whose radii vary with azimuth. Contour-only
// matching cannot pin the rotation about z; the interior feature points can.
inline PointCloud symmetric_feature_shape(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr int sectors = 12;
    const int per_sector = (n * 4 / 5) / sectors;
    const int n_surface = per_sector * sectors;

    PointCloud cloud;
    cloud.points.reserve(n);
    std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi / sectors);
    std::uniform_real_distribution<double> polar(0.05, std::numbers::pi - 0.05);
    std::vector<Vec3> sector_points;
    sector_points.reserve(per_sector);
    for (int i = 0; i < per_sector; ++i) {
        const double t = polar(rng);
        const double a = az(rng);
        const double radius = 1.0 + 0.25 * std::sin(2.0 * t);
        sector_points.push_back(radius *
                                Vec3(std::sin(t) * std::cos(a), std::sin(t) * std::sin(a),
                                     std::cos(t)));
    }
    for (int k = 0; k < sectors; ++k) {
        const pkss::RotationMatrix turn =
            pkss::RotationMatrix::about_z(k * 2.0 * std::numbers::pi / sectors);
        for (const Vec3& p : sector_points) cloud.points.push_back(turn * p);
    }

    // Interior clusters in antipodal pairs (so the centroid stays on the
    // symmetry axis) with radii growing around the azimuth, which makes the
    // constellation unique under rotation about z.
    const int n_clusters = 2 * sectors;
    const int per_cluster = (n - n_surface) / n_clusters;
    std::normal_distribution<double> jitter(0.0, 0.02);
    for (int j = 0; j < sectors; ++j) {
        const double azimuth = (j + 0.5) * 2.0 * std::numbers::pi / sectors;
        const double t = 1.1;
        const double radius = 0.30 + 0.012 * j;
        const Vec3 center = radius * Vec3(std::sin(t) * std::cos(azimuth),
                                          std::sin(t) * std::sin(azimuth), std::cos(t));
        for (int pair = 0; pair < 2; ++pair) {
            const Vec3 c = pair == 0 ? center : Vec3(-center);
            for (int i = 0; i < per_cluster; ++i) {
                cloud.points.push_back(c + Vec3(jitter(rng), jitter(rng), jitter(rng)));
            }
        }
    }
    return cloud;
}

inline PointCloud plane_grid(int side, double spacing = 0.1) {
    PointCloud cloud;
    cloud.points.reserve(side * side);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            cloud.points.emplace_back(i * spacing, j * spacing, 0.0);
        }
    }
    return cloud;
}

inline PointCloud integer_grid(int side) {
    PointCloud cloud;
    cloud.points.reserve(side * side * side);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            for (int k = 0; k < side; ++k) {
                cloud.points.emplace_back(i, j, k);
            }
        }
    }
    return cloud;
}

// Axis-aligned cube surface sample with crisp edges and corners.
inline PointCloud cube_surface(int per_axis, std::uint64_t seed, double half = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-half, half);
    std::uniform_int_distribution<int> face(0, 5);
    PointCloud cloud;
    cloud.points.reserve(per_axis);
    for (int i = 0; i < per_axis; ++i) {
        const int f = face(rng);
        const double a = coord(rng), b = coord(rng);
        const double s = (f % 2 == 0) ? half : -half;
        switch (f / 2) {
            case 0: cloud.points.emplace_back(s, a, b); break;
            case 1: cloud.points.emplace_back(a, s, b); break;
            default: cloud.points.emplace_back(a, b, s); break;
        }
    }
    return cloud;
}

inline pkss::RotationMatrix random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    while (q.norm() < 1e-9) {
        q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    }
    q.normalize();
    return pkss::RotationMatrix(q.toRotationMatrix());
}

}  // namespace testsupport
