#include "pkss/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace pkss {

std::vector<RotationMatrix> build_rotation_grid(int steps) {
    if (steps < 1) {
        throw std::invalid_argument("rotation steps must be at least 1");
    }
    const double theta = 2.0 * std::numbers::pi / steps;
    std::vector<RotationMatrix> axis_x, axis_y, axis_z;
    axis_x.reserve(steps);
    axis_y.reserve(steps);
    axis_z.reserve(steps);
    for (int n = 0; n < steps; ++n) {
        axis_x.push_back(RotationMatrix::about_x(n * theta));
        axis_y.push_back(RotationMatrix::about_y(n * theta));
        axis_z.push_back(RotationMatrix::about_z(n * theta));
    }
    std::vector<RotationMatrix> grid;
    grid.reserve(steps * steps * steps);
    for (int nx = 0; nx < steps; ++nx) {
        for (int ny = 0; ny < steps; ++ny) {
            for (int nz = 0; nz < steps; ++nz) {
                grid.push_back(axis_z[nz] * axis_y[ny] * axis_x[nx]);
            }
        }
    }
    return grid;
}

std::vector<Vec3> build_translation_grid(const PcaFrame& frame, double extent_u, int steps) {
    if (steps < 1) {
        throw std::invalid_argument("translation steps must be at least 1");
    }
    if (steps % 2 == 0) {
        throw std::invalid_argument("zero offset must be a grid member");
    }
    std::vector<double> coeffs(steps, 0.0);
    if (steps > 1) {
        const double quarter = extent_u / 4.0;
        const double step = (extent_u / 2.0) / (steps - 1);
        for (int j = 0; j < steps; ++j) coeffs[j] = -quarter + j * step;
    }
    std::vector<Vec3> grid;
    grid.reserve(steps * steps * steps);
    for (int nu = 0; nu < steps; ++nu) {
        for (int nv = 0; nv < steps; ++nv) {
            for (int nw = 0; nw < steps; ++nw) {
                grid.push_back(coeffs[nu] * frame.u + coeffs[nv] * frame.v + coeffs[nw] * frame.w);
            }
        }
    }
    return grid;
}

std::vector<Vec3> build_translation_grid(const PreShape& source, int steps) {
    std::vector<Vec3> pts(source.rows.rows());
    for (int i = 0; i < source.rows.rows(); ++i) pts[i] = source.rows.row(i).transpose();
    const PcaFrame frame = pca(pts);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec3& p : pts) {
        const double proj = frame.u.dot(p);
        lo = std::min(lo, proj);
        hi = std::max(hi, proj);
    }
    return build_translation_grid(frame, hi - lo, steps);
}

CandidateGrid build_candidate_grid(const PreShape& source, int rotation_steps,
                                   int translation_steps) {
    CandidateGrid grid;
    grid.rotation_steps = rotation_steps;
    grid.translation_steps = translation_steps;
    grid.rotations = build_rotation_grid(rotation_steps);
    grid.translations = build_translation_grid(source, translation_steps);
    return grid;
}

namespace {

// Dense cell-indexed view of a profile; row < 0 marks an empty cell.
struct DenseProfile {
    std::vector<CellSample> contour;
    std::vector<CellSample> features;
};

DenseProfile densify(const PartitionProfile& profile) {
    DenseProfile dense;
    dense.contour.assign(profile.layout.cell_count(), CellSample{});
    dense.features.assign(profile.layout.cell_count(), CellSample{});
    for (const auto& [cell, sample] : profile.contour) dense.contour[cell] = sample;
    for (const auto& [cell, sample] : profile.features) dense.features[cell] = sample;
    return dense;
}

std::vector<CellSample> all_rows(const PreShape& shape) {
    std::vector<CellSample> out(shape.rows.rows());
    for (int i = 0; i < shape.rows.rows(); ++i) {
        const Vec3 p = shape.rows.row(i).transpose();
        out[i] = CellSample{i, p, p.norm()};
    }
    return out;
}

struct EvalScratch {
    std::vector<CellSample> posed_contour;
    std::vector<CellSample> posed_features;
    std::vector<Vec3> a;
    std::vector<Vec3> b;
};

void rebin(const std::vector<CellSample>& samples, const PartitionLayout& layout,
           const Mat3& o_f, const Vec3& s_i, double inv_norm, bool key_is_radius,
           std::vector<CellSample>& posed) {
    posed.assign(layout.cell_count(), CellSample{});
    for (const CellSample& s : samples) {
        const Vec3 q = (o_f * (s.point - s_i)) * inv_norm;
        const int cell = cell_of(q, layout);
        const double key = key_is_radius ? q.norm() : s.key;
        CellSample& cur = posed[cell];
        if (cur.row < 0 || key > cur.key || (key == cur.key && s.row < cur.row)) {
            cur = CellSample{s.row, q, key};
        }
    }
}

CombinedMeasure evaluate_posed(const DenseProfile& tpl,
                               const std::vector<CellSample>& src_contour,
                               const std::vector<CellSample>& src_features,
                               const PartitionLayout& layout,
                               const Mat3& o_f, const Vec3& s_i, double inv_norm,
                               EvalScratch& scratch) {
    const int cells = layout.cell_count();
    rebin(src_contour, layout, o_f, s_i, inv_norm, true, scratch.posed_contour);

    scratch.a.clear();
    scratch.b.clear();
    for (int c = 0; c < cells; ++c) {
        if (tpl.contour[c].row >= 0 && scratch.posed_contour[c].row >= 0) {
            scratch.a.push_back(tpl.contour[c].point);
            scratch.b.push_back(scratch.posed_contour[c].point);
        }
    }
    CombinedMeasure out;
    if (scratch.a.size() < 4) {
        return out;  // insufficient correspondence for this pose
    }
    out.contour = measure_pair(scratch.a, scratch.b);
    out.g_k = out.contour.measure;

    if (!src_features.empty()) {
        rebin(src_features, layout, o_f, s_i, inv_norm, false, scratch.posed_features);
        scratch.a.clear();
        scratch.b.clear();
        for (int c = 0; c < cells; ++c) {
            if (tpl.features[c].row >= 0 && scratch.posed_features[c].row >= 0) {
                scratch.a.push_back(tpl.features[c].point);
                scratch.b.push_back(scratch.posed_features[c].point);
            }
        }
        if (scratch.a.size() >= 4) {
            const LocalAlignment feat = measure_pair(scratch.a, scratch.b);
            out.g_k = std::max(out.g_k, feat.measure);
        }
    }
    return out;
}

// Frobenius norm of the shifted rows. Rows are centered, so it has the
// closed form sqrt(1 + m |s_i|^2) without touching the m rows.
double posed_norm(const PreShape& shape, const Vec3& s_i) {
    return std::sqrt(1.0 + static_cast<double>(shape.rows.rows()) * s_i.squaredNorm());
}

struct ChunkBest {
    double measure = std::numbers::pi;
    std::int64_t index = -1;  // linear candidate index; -1 = nothing valid
    CombinedMeasure detail;
};

// Local alignment refinement at the winning candidate. A single
// Procrustes step on cell representatives cannot see rotation residuals
// below the cell size (per-cell maxima align cells to cells), so the
// measure itself is descended by a nested 3x3x3 grid of per-axis rotation
// offsets, shrinking threefold per level from half the global grid step
// down to fp scale. The Procrustes rotation of the best evaluation
// supplies the final sub-cell polish once the pairing has stabilized.
struct Refined {
    Mat3 local_rotation;  // relative to the winning candidate rotation
    double local_scale = 1.0;
    double measure = std::numbers::pi;
};

Refined refine_alignment(const DenseProfile& tpl, const std::vector<CellSample>& contour,
                         const std::vector<CellSample>& features, const PartitionLayout& layout,
                         const Mat3& o_f, const Vec3& s_i, double inv_norm, double grid_step,
                         const CombinedMeasure& at_winner, EvalScratch& scratch) {
    constexpr int kLevels = 12;
    Refined best;
    best.local_rotation = at_winner.contour.local_rotation.matrix();
    best.local_scale = at_winner.contour.local_scale;
    best.measure = at_winner.g_k;

    Mat3 center = Mat3::Identity();
    double center_measure = at_winner.g_k;
    double h = grid_step / 2.0;
    for (int level = 0; level < kLevels; ++level) {
        Mat3 level_best = center;
        double level_measure = center_measure;
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                for (int k = -1; k <= 1; ++k) {
                    if (i == 0 && j == 0 && k == 0) continue;
                    const Mat3 offset = (RotationMatrix::about_z(k * h) *
                                         RotationMatrix::about_y(j * h) *
                                         RotationMatrix::about_x(i * h))
                                            .matrix() *
                                        center;
                    const CombinedMeasure m = evaluate_posed(tpl, contour, features, layout,
                                                             offset * o_f, s_i, inv_norm, scratch);
                    if (!m.contour.valid()) continue;
                    if (m.g_k < level_measure) {
                        level_measure = m.g_k;
                        level_best = offset;
                    }
                    if (m.g_k < best.measure) {
                        best.measure = m.g_k;
                        best.local_rotation = m.contour.local_rotation.matrix() * offset;
                        best.local_scale = m.contour.local_scale;
                    }
                }
            }
        }
        center = level_best;
        center_measure = level_measure;
        h /= 3.0;
    }
    return best;
}

}  // namespace

CombinedMeasure evaluate_candidate(const PartitionProfile& template_profile,
                                   const PreShape& source_shape,
                                   std::span<const CellSample> source_features,
                                   const RotationMatrix& o_f, const Vec3& s_i) {
    const DenseProfile tpl = densify(template_profile);
    const std::vector<CellSample> contour = all_rows(source_shape);
    const std::vector<CellSample> features(source_features.begin(), source_features.end());
    EvalScratch scratch;
    const double inv_norm = 1.0 / posed_norm(source_shape, s_i);
    return evaluate_posed(tpl, contour, features, template_profile.layout, o_f.matrix(), s_i,
                          inv_norm, scratch);
}

SearchResult global_search(const PartitionProfile& template_profile,
                           const PreShape& source_shape,
                           std::span<const CellSample> source_features,
                           const CandidateGrid& grid, int worker_count) {
    if (grid.rotations.empty() || grid.translations.empty()) {
        throw std::invalid_argument("empty candidate grid");
    }
    const std::int64_t n_rot = static_cast<std::int64_t>(grid.rotations.size());
    const std::int64_t n_tr = static_cast<std::int64_t>(grid.translations.size());
    const std::int64_t total = n_rot * n_tr;

    const DenseProfile tpl = densify(template_profile);
    const std::vector<CellSample> contour = all_rows(source_shape);
    const std::vector<CellSample> features(source_features.begin(), source_features.end());
    const PartitionLayout layout = template_profile.layout;

    std::vector<double> inv_norms(n_tr);
    for (std::int64_t t = 0; t < n_tr; ++t) {
        inv_norms[t] = 1.0 / posed_norm(source_shape, grid.translations[t]);
    }

    // Candidates are ordered translation-major so the linear index realizes
    // the (translation_index, rotation_index) tie-break.
    auto scan = [&](std::int64_t begin, std::int64_t end, ChunkBest& best) {
        EvalScratch scratch;
        for (std::int64_t c = begin; c < end; ++c) {
            const std::int64_t t = c / n_rot;
            const std::int64_t r = c % n_rot;
            const CombinedMeasure m =
                evaluate_posed(tpl, contour, features, layout, grid.rotations[r].matrix(),
                               grid.translations[t], inv_norms[t], scratch);
            if (!m.contour.valid()) continue;
            // Ascending scan order: a strict improvement test keeps the
            // smallest candidate index on ties.
            if (best.index < 0 || m.g_k < best.measure) {
                best.measure = m.g_k;
                best.index = c;
                best.detail = m;
            }
        }
    };

    int workers = worker_count > 0 ? worker_count
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(total, 256)));

    std::vector<ChunkBest> bests(workers);
    if (workers == 1) {
        scan(0, total, bests[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            const std::int64_t begin = total * w / workers;
            const std::int64_t end = total * (w + 1) / workers;
            pool.emplace_back(scan, begin, end, std::ref(bests[w]));
        }
        for (auto& th : pool) th.join();
    }

    // Chunks cover ascending index ranges; merging in chunk order keeps the
    // reduction canonical for any worker count.
    ChunkBest best;
    for (const ChunkBest& b : bests) {
        if (b.index < 0) continue;
        if (best.index < 0 || b.measure < best.measure) {
            best = b;
        }
    }
    if (best.index < 0) {
        throw std::runtime_error("registration failed: no valid correspondence");
    }

    SearchResult result;
    result.best_measure = best.measure;
    result.best_translation_index = static_cast<int>(best.index / n_rot);
    result.best_rotation_index = static_cast<int>(best.index % n_rot);
    result.candidate_rotation = grid.rotations[result.best_rotation_index];
    result.center_shift = grid.translations[result.best_translation_index];
    result.evaluations = total;

    EvalScratch scratch;
    const double grid_step = 2.0 * std::numbers::pi / grid.rotation_steps;
    const Refined refined = refine_alignment(
        tpl, contour, features, layout, result.candidate_rotation.matrix(), result.center_shift,
        inv_norms[result.best_translation_index], grid_step, best.detail, scratch);
    result.local_rotation = RotationMatrix::unchecked(refined.local_rotation);
    result.local_scale = refined.local_scale;
    return result;
}

SimilarityTransform compose_final_transform(const PreShape& template_shape,
                                            const PreShape& source_shape,
                                            const SearchResult& result) {
    const double inv_norm = 1.0 / posed_norm(source_shape, result.center_shift);
    const Mat3 rotation = result.local_rotation.matrix() * result.candidate_rotation.matrix();
    const double pre_scale = result.local_scale * inv_norm;  // pre-shape units

    SimilarityTransform t;
    t.rotation = RotationMatrix::unchecked(rotation);
    t.scale = template_shape.scale * pre_scale / source_shape.scale;
    t.translation =
        template_shape.centroid -
        template_shape.scale * pre_scale *
            (rotation * (source_shape.centroid / source_shape.scale + result.center_shift));
    return t;
}

}  // namespace pkss
