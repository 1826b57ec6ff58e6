#include "pkss/pipeline.hpp"

#include <chrono>
#include <stdexcept>

namespace pkss {

void RunConfig::validate() const {
    PreprocessConfig{knn_k, target_count}.validate();
    feature_config().validate();
    if (rotation_steps < 1 || translation_steps < 1) {
        throw std::invalid_argument("grid steps must be positive");
    }
    if (azimuth_bins < 1 || elevation_bins < 1) {
        throw std::invalid_argument("partition bins must be positive");
    }
}

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PreparedCloud prepare_cloud(const PointCloud& cloud, const RunConfig& config) {
    PreparedCloud prepared;
    prepared.cloud = resample(cull_outliers(cloud, config.knn_k).cloud, config.target_count);
    prepared.shape = to_preshape(prepared.cloud);
    if (config.use_features) {
        prepared.features =
            feature_candidates(prepared.cloud, prepared.shape, config.feature_config());
    }
    prepared.profile = build_profile(prepared.cloud, prepared.shape, config.layout(),
                                     config.feature_config(), config.use_features);
    return prepared;
}

RegistrationReport register_clouds(const PointCloud& source, const PointCloud& templ,
                                   const RunConfig& config) {
    config.validate();
    RegistrationReport report;
    report.config = config;

    const auto t_start = std::chrono::steady_clock::now();
    PreparedCloud src, tpl;
    src.cloud = resample(cull_outliers(source, config.knn_k).cloud, config.target_count);
    src.shape = to_preshape(src.cloud);
    tpl.cloud = resample(cull_outliers(templ, config.knn_k).cloud, config.target_count);
    tpl.shape = to_preshape(tpl.cloud);
    report.timings.preprocess_s = seconds_since(t_start);
    report.source_points_used = src.cloud.size();
    report.template_points_used = tpl.cloud.size();

    const auto t_profile = std::chrono::steady_clock::now();
    if (config.use_features) {
        src.features = feature_candidates(src.cloud, src.shape, config.feature_config());
    }
    tpl.profile = build_profile(tpl.cloud, tpl.shape, config.layout(), config.feature_config(),
                                config.use_features);
    const CandidateGrid grid =
        build_candidate_grid(src.shape, config.rotation_steps, config.translation_steps);
    report.timings.profile_s = seconds_since(t_profile);

    const auto t_search = std::chrono::steady_clock::now();
    report.search =
        global_search(tpl.profile, src.shape, src.features, grid, config.worker_count);
    report.timings.search_s = seconds_since(t_search);

    report.transform = compose_final_transform(tpl.shape, src.shape, report.search);
    report.final_measure = report.search.best_measure;
    report.timings.total_s = seconds_since(t_start);
    return report;
}

}  // namespace pkss
