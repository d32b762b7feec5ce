#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoaux/model.hpp"
#include "geoaux/synthdata.hpp"

namespace geoaux {

// JSON <-> spec conversions used by the config file, the run manifest, and
// the rerun path. Parsing starts from defaults and overrides the keys
// present; unknown keys are an error.
nlohmann::json dataset_spec_to_json(const DatasetSpec& s);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j, DatasetSpec defaults = {});
nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig defaults = {});
nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

// Short content hash of a resolved spec, used to name run directories.
std::string spec_hash(const nlohmann::json& spec);

struct SweepCell {
    double lambda = 0.0;
    std::uint64_t seed = 0;
    double oa = 0.0;
    double ma = 0.0;
};

// One geossl training run per (lambda, seed); evaluated on the test split.
std::vector<SweepCell> sweep_lambda(const Dataset& train_split, const Dataset& test_split,
                                    const ModelConfig& config, const TrainConfig& base,
                                    const std::vector<double>& lambdas,
                                    const std::vector<std::uint64_t>& seeds, int jobs = 1);
std::string sweep_csv(const std::vector<SweepCell>& cells);

struct AblateCell {
    std::string variant;  // P | P+n | P+u | P+n+u
    std::string mode;     // input | supervision
    std::uint64_t seed = 0;
    double oa = 0.0;
};

// 8-cell grid: each property set either concatenated to the network input
// or routed to the regression head. "P" in either mode is the plain
// baseline.
std::vector<AblateCell> ablate_properties(const Dataset& train_split, const Dataset& test_split,
                                          const ModelConfig& config, const TrainConfig& base,
                                          const std::vector<std::uint64_t>& seeds, int jobs = 1);
std::string ablate_csv(const std::vector<AblateCell>& cells);

struct NoiseReport {
    double sigma = 0.0;
    // Mean oriented cosine distance of each estimator's normals against the
    // clean-surface reference and against the stored self-computed labels.
    double pca_vs_analytic = 0.0;
    double pca_vs_geossl = 0.0;
    double learned_vs_analytic = 0.0;
    double learned_vs_geossl = 0.0;
    // Angular error counts vs the clean-surface reference: one bin per
    // degree over [0, 30), final bin catches everything above.
    std::vector<long> pca_angle_bins;
    std::vector<long> learned_angle_bins;
    int points = 0;

    std::string to_json() const;
};

// Perturbs the test clouds with Gaussian noise, then compares normals
// estimated directly from the noisy points (neighborhood PCA) against the
// trained model's predictions on the same noisy points.
NoiseReport noise_robustness(const Dataset& test_split, const ParamSet& params,
                             const ModelConfig& config, double sigma, int pca_k,
                             std::uint64_t noise_seed);

struct ProbeRow {
    std::string variant;  // scratch | frozen | geossl
    std::uint64_t seed = 0;
    double cosine_similarity = 0.0;
};

// Table-style three-way comparison of normal-regression quality: scratch
// training, a frozen classification backbone, and a frozen geossl backbone.
std::vector<ProbeRow> probe_suite(const Dataset& train_split, const Dataset& test_split,
                                  const ModelConfig& config, const TrainConfig& cls_base,
                                  const TrainConfig& reg_base,
                                  const std::vector<std::uint64_t>& seeds, int jobs = 1);
std::string probe_csv(const std::vector<ProbeRow>& rows);

double mean_of(const std::vector<double>& v);

}  // namespace geoaux
