#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoaux/checkpoint.hpp"
#include "geoaux/dataset_io.hpp"
#include "geoaux/metrics.hpp"
#include "geoaux/optim.hpp"
#include "geoaux/tape.hpp"

namespace geoaux {

// Shared edge-convolution encoder with a semantic head (classification or
// segmentation) and a per-point geometric regression head (normal + u).

struct ModelConfig {
    int k_graph = 20;
    std::vector<int> edge_channels = {32, 32, 64};
    int embed_dim = 128;
    std::vector<int> cls_hidden = {64, 32};
    std::vector<int> seg_hidden = {64, 32};
    std::vector<int> reg_hidden = {64, 32};
    std::string task = "classification";  // or "segmentation"
    bool dynamic_graph = true;
    // Regression branch input: "embedding" = the last shared per-point
    // representation; "edge_stack" = the concatenated edge-conv outputs
    // feeding the embedding layer.
    std::string reg_input = "embedding";
    // Extra per-point columns appended to the xyz input: "none", "normals",
    // "curvature", or "both" (self-computed properties fed as features).
    std::string input_props = "none";

    int input_dim() const;
    void validate() const;
};

struct TrainConfig {
    double lambda = 0.01;
    double lr = 0.01;
    double momentum = 0.9;
    double gamma = 0.5;
    int decay_period = 20;
    int epochs = 100;
    int batch_size = 8;
    std::uint64_t seed = 0;
    std::string supervision = "geossl";  // geossl | geopl | none
    int pretrain_geom_epochs = 0;
    // "joint": semantic task plus lambda-weighted regression (Eq-style
    // combined objective). "regression": regression loss only, semantic head
    // left untouched (probe / normal-estimation runs).
    std::string objective = "joint";
    // With the regression objective: update only the regression head,
    // keeping shared encoder parameters frozen.
    bool freeze_shared = false;
    // Which geometric targets the regression loss covers.
    std::string reg_targets = "both";  // both | normals | curvature

    void validate() const;
};

enum class ParamGroup { shared, task, reg };
ParamGroup param_group(const std::string& name);

// Fresh parameters for the configured architecture: edge layers, embedding,
// the active semantic head, and the regression head (always present so that
// checkpoints are comparable across supervision modes).
ParamSet init_params(const ModelConfig& config, int num_classes, int num_parts,
                     std::uint64_t seed);

// Exact brute-force kNN over rows of a feature matrix (squared Euclidean,
// ties to the smaller index, self excluded). Row-major n x k indices.
std::vector<int> knn_rows(const Array& feats, int k);

// One edge-convolution block on explicit features: kNN graph in the feature
// space, shared per-edge layer on [x_i ‖ x_j − x_i], ReLU, max over the k
// edges of each point.
Array edge_conv(const Array& feats, int k, const Array& weight, const Array& bias);

struct TapeForward {
    Id task_logits = -1;  // (1, C) classification, (n, P) segmentation
    Id geom = -1;         // (n, 4): normal xyz + u
};

// Builds the forward graph for one cloud on `tape`. `pids` maps parameter
// names to tape ids. with_task / with_reg select which branches to build.
TapeForward forward_on_tape(Tape& tape, const std::map<std::string, Id>& pids,
                            const ModelConfig& config, const Array& input,
                            bool with_task, bool with_reg);

struct ForwardOutput {
    Array task_logits;
    Array geom;
};

// Value-only forward pass. `input` is (n, input_dim).
ForwardOutput forward(const ParamSet& params, const ModelConfig& config, const Array& input);

struct LossIds {
    Id total = -1;
    Id task = -1;  // -1 when the objective has no semantic term
    Id reg = -1;   // -1 when the regression term is skipped
};

// total = task + lambda * reg on the tape. The regression term is the
// masked row-mean squared normal error plus the masked row-mean squared
// curvature error; rows flagged degenerate are excluded. `targets` narrows
// the regression term to one property.
LossIds joint_loss(Tape& tape, Id task_logits, const std::vector<int>& labels, Id geom,
                   const GeomProps& gt, double lambda, const std::string& targets = "both");

struct TrainResult {
    ParamSet params;
    std::vector<HistoryRow> history;
};

// Called after each epoch with the epoch index and the parameters as of that
// epoch; returning false ends training early (the result keeps those
// parameters and the history so far).
using EpochObserver = std::function<bool(int epoch, const ParamSet& params)>;

// Mini-batch SGD with momentum and stepped lr decay. Deterministic for a
// fixed seed, and independent of the epoch budget: the first e epochs of any
// longer run are bit-identical to a run of e epochs. `init` warm-starts from
// existing parameters (must match the architecture). Phase 1
// (pretrain_geom_epochs) trains the regression objective on shared +
// regression parameters; phase 2 is the configured objective. With lambda = 0
// (or supervision "none") the regression branch is never built, so such runs
// are bit-identical to a baseline run.
TrainResult train(const Dataset& data, const ModelConfig& config, const TrainConfig& tc,
                  const ParamSet* init = nullptr, const EpochObserver& on_epoch = {});

struct EvalOptions {
    bool geom_metrics = false;
    std::string geom_reference = "geopl";  // geossl | geopl
    // When set, receives one entry per cloud: the predicted class
    // (classification, size 1) or the per-point part labels (segmentation).
    std::vector<std::vector<int>>* predictions = nullptr;
};

MetricsReport evaluate(const ParamSet& params, const ModelConfig& config, const Dataset& data,
                       const EvalOptions& opts = {});

// Argmax with ties to the smallest index.
int argmax_row(const Array& a, int row);

struct ProbeResult {
    ParamSet params;
    std::vector<HistoryRow> history;
    MetricsReport metrics;
};

// Trains the regression head on top of the frozen shared encoder of
// `pretrained`, then reports normal metrics on `testset`. The shared
// parameters are bit-identical before and after.
ProbeResult probe_frozen_backbone(const ParamSet& pretrained, const Dataset& trainset,
                                  const Dataset& testset, const ModelConfig& config,
                                  TrainConfig tc);

// Per-cloud network input: xyz coordinates plus the property columns the
// config asks for (taken from the entry's self-computed labels).
Array cloud_input(const CloudEntry& entry, const ModelConfig& config);

}  // namespace geoaux
