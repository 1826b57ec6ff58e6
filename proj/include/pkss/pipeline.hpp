#pragma once

#include "pkss/search.hpp"

namespace pkss {

/// End-to-end registration parameters. Defaults follow the reference
/// configuration: 12^3 candidate rotations, 5^3 candidate translations,
/// k = 12 neighborhoods, 3000-point resampling.
struct RunConfig {
    int target_count = 3000;
    int rotation_steps = 12;
    int translation_steps = 5;
    int azimuth_bins = 12;
    int elevation_bins = 6;
    double feature_fraction = 0.15;
    int knn_k = 12;
    int worker_count = 0;  // 0 = available parallelism
    std::uint64_t seed = 0;
    bool enable_mse_condition = true;
    bool use_features = true;

    PartitionLayout layout() const { return {azimuth_bins, elevation_bins}; }
    FeatureConfig feature_config() const { return {knn_k, feature_fraction}; }
    void validate() const;
};

struct StageTimings {
    double preprocess_s = 0.0;
    double profile_s = 0.0;
    double search_s = 0.0;
    double total_s = 0.0;
};

/// Full pipeline result: the composed source-to-template transform in
/// model units plus the winning search state.
struct RegistrationReport {
    SimilarityTransform transform;
    double final_measure = std::numbers::pi;
    SearchResult search;
    StageTimings timings;
    RunConfig config;
    std::size_t source_points_used = 0;
    std::size_t template_points_used = 0;
};

/// Preprocessed cloud: culled, resampled, mapped to the pre-shape sphere,
/// with its partition profile and the feature candidate set the search
/// re-bins per pose.
struct PreparedCloud {
    PointCloud cloud;
    PreShape shape;
    PartitionProfile profile;
    std::vector<CellSample> features;
};

PreparedCloud prepare_cloud(const PointCloud& cloud, const RunConfig& config);

/// cull -> resample -> pre-shape -> profiles -> global search -> compose.
RegistrationReport register_clouds(const PointCloud& source, const PointCloud& templ,
                                   const RunConfig& config);

}  // namespace pkss
