#include "geoaux/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "geoaux/rng.hpp"

namespace geoaux {

namespace {

int sum_widths(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

void require_positive(const std::vector<int>& widths, const char* what) {
    if (widths.empty()) throw std::invalid_argument(std::string("ModelConfig: empty ") + what);
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument(std::string("ModelConfig: non-positive ") + what);
}

}  // namespace

int ModelConfig::input_dim() const {
    if (input_props == "none") return 3;
    if (input_props == "normals") return 6;
    if (input_props == "curvature") return 4;
    if (input_props == "both") return 7;
    throw std::invalid_argument("ModelConfig: unknown input_props '" + input_props + "'");
}

void ModelConfig::validate() const {
    if (k_graph < 1) throw std::invalid_argument("ModelConfig: k_graph must be at least 1");
    require_positive(edge_channels, "edge channel width");
    if (embed_dim <= 0) throw std::invalid_argument("ModelConfig: embed_dim must be positive");
    require_positive(cls_hidden, "classification head width");
    require_positive(seg_hidden, "segmentation head width");
    require_positive(reg_hidden, "regression head width");
    if (task != "classification" && task != "segmentation")
        throw std::invalid_argument("ModelConfig: task must be classification or segmentation");
    if (reg_input != "embedding" && reg_input != "edge_stack")
        throw std::invalid_argument("ModelConfig: reg_input must be embedding or edge_stack");
    input_dim();
}

void TrainConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be non-negative");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be at least 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be at least 1");
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be positive");
    if (supervision != "geossl" && supervision != "geopl" && supervision != "none")
        throw std::invalid_argument("TrainConfig: supervision must be geossl, geopl or none");
    if (objective != "joint" && objective != "regression")
        throw std::invalid_argument("TrainConfig: objective must be joint or regression");
    if (pretrain_geom_epochs < 0)
        throw std::invalid_argument("TrainConfig: negative pretrain_geom_epochs");
    if ((pretrain_geom_epochs > 0 || objective == "regression") && supervision == "none")
        throw std::invalid_argument(
            "TrainConfig: geometric training needs supervision geossl or geopl");
    if (freeze_shared && objective != "regression")
        throw std::invalid_argument("TrainConfig: freeze_shared requires the regression objective");
    if (reg_targets != "both" && reg_targets != "normals" && reg_targets != "curvature")
        throw std::invalid_argument("TrainConfig: reg_targets must be both, normals or curvature");
}

ParamGroup param_group(const std::string& name) {
    if (name.rfind("edge", 0) == 0 || name.rfind("embed", 0) == 0) return ParamGroup::shared;
    if (name.rfind("cls", 0) == 0 || name.rfind("seg", 0) == 0) return ParamGroup::task;
    if (name.rfind("reg", 0) == 0) return ParamGroup::reg;
    throw std::invalid_argument("param_group: unknown parameter '" + name + "'");
}

namespace {

Array he_init(int rows, int cols, SplitRng& rng) {
    Array w(rows, cols);
    const double scale = std::sqrt(2.0 / rows);
    for (double& v : w.data) v = scale * rng.normal();
    return w;
}

void init_mlp(ParamSet& params, const std::string& prefix, int in_dim,
              const std::vector<int>& hidden, int out_dim, SplitRng& rng) {
    std::vector<int> dims;
    dims.push_back(in_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::string base = prefix + std::to_string(l);
        params.emplace(base + ".w", he_init(dims[l], dims[l + 1], rng));
        params.emplace(base + ".b", Array(1, dims[l + 1]));
    }
}

}  // namespace

ParamSet init_params(const ModelConfig& config, int num_classes, int num_parts,
                     std::uint64_t seed) {
    config.validate();
    if (num_classes < 2) throw std::invalid_argument("init_params: need at least 2 classes");
    if (config.task == "segmentation" && num_parts < 2)
        throw std::invalid_argument("init_params: need at least 2 parts");
    SplitRng rng = SplitRng(seed).split(0x9a17);

    ParamSet params;
    int d = config.input_dim();
    for (std::size_t l = 0; l < config.edge_channels.size(); ++l) {
        const int c = config.edge_channels[l];
        const std::string base = "edge" + std::to_string(l);
        params.emplace(base + ".w", he_init(2 * d, c, rng));
        params.emplace(base + ".b", Array(1, c));
        d = c;
    }
    const int cat_dim = sum_widths(config.edge_channels);
    params.emplace("embed.w", he_init(cat_dim, config.embed_dim, rng));
    params.emplace("embed.b", Array(1, config.embed_dim));

    if (config.task == "classification")
        init_mlp(params, "cls", config.embed_dim, config.cls_hidden, num_classes, rng);
    else
        init_mlp(params, "seg", 2 * config.embed_dim, config.seg_hidden, num_parts, rng);

    const int reg_in = config.reg_input == "embedding" ? config.embed_dim : cat_dim;
    init_mlp(params, "reg", reg_in, config.reg_hidden, 4, rng);
    return params;
}

std::vector<int> knn_rows(const Array& feats, int k) {
    const int n = feats.rows;
    if (k < 1 || k >= n)
        throw std::invalid_argument("knn_rows: k = " + std::to_string(k) + " needs 1 <= k < " +
                                    std::to_string(n) + " rows");
    std::vector<int> out(static_cast<std::size_t>(n) * k);
    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double* ri = feats.row(i);
        for (int j = 0; j < n; ++j) {
            double d2 = 0.0;
            const double* rj = feats.row(j);
            for (int c = 0; c < feats.cols; ++c) {
                const double d = ri[c] - rj[c];
                d2 += d * d;
            }
            order[static_cast<std::size_t>(j)] = {d2, j};
        }
        order[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::infinity();
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        for (int t = 0; t < k; ++t)
            out[static_cast<std::size_t>(i) * k + t] = order[static_cast<std::size_t>(t)].second;
    }
    return out;
}

namespace {

Id checked_pid(const std::map<std::string, Id>& pids, const std::string& name) {
    auto it = pids.find(name);
    if (it == pids.end())
        throw std::invalid_argument("forward: missing parameter '" + name + "'");
    return it->second;
}

// hidden layers with ReLU, final layer linear
Id mlp_on_tape(Tape& tape, const std::map<std::string, Id>& pids, const std::string& prefix,
               int layers, Id x) {
    for (int l = 0; l < layers; ++l) {
        const std::string base = prefix + std::to_string(l);
        x = tape.add_bias(tape.matmul(x, checked_pid(pids, base + ".w")),
                          checked_pid(pids, base + ".b"));
        if (l + 1 < layers) x = tape.relu(x);
    }
    return x;
}

}  // namespace

TapeForward forward_on_tape(Tape& tape, const std::map<std::string, Id>& pids,
                            const ModelConfig& config, const Array& input, bool with_task,
                            bool with_reg) {
    if (input.cols != config.input_dim())
        throw std::invalid_argument("forward: input has " + std::to_string(input.cols) +
                                    " columns, config expects " +
                                    std::to_string(config.input_dim()));
    const int n = input.rows;
    if (n < config.k_graph + 1)
        throw std::invalid_argument("forward: " + std::to_string(n) +
                                    " points cannot support k_graph = " +
                                    std::to_string(config.k_graph));
    const int k = config.k_graph;

    std::vector<int> centers(static_cast<std::size_t>(n) * k);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < k; ++t) centers[static_cast<std::size_t>(i) * k + t] = i;

    Id x = tape.input(input, "points");
    std::vector<int> neighbors = knn_rows(input, k);
    std::vector<Id> layer_outs;
    for (std::size_t l = 0; l < config.edge_channels.size(); ++l) {
        if (l > 0 && config.dynamic_graph) neighbors = knn_rows(tape.value(x), k);
        const std::string base = "edge" + std::to_string(l);
        Id e = tape.edge_features(x, centers, neighbors);
        Id h = tape.relu(tape.add_bias(tape.matmul(e, checked_pid(pids, base + ".w")),
                                       checked_pid(pids, base + ".b")));
        x = tape.group_max_rows(h, k);
        layer_outs.push_back(x);
    }
    Id cat = layer_outs[0];
    for (std::size_t l = 1; l < layer_outs.size(); ++l) cat = tape.concat_cols(cat, layer_outs[l]);
    Id embed = tape.relu(tape.add_bias(tape.matmul(cat, checked_pid(pids, "embed.w")),
                                       checked_pid(pids, "embed.b")));

    TapeForward out;
    if (with_task) {
        if (config.task == "classification") {
            Id pooled = tape.max_over_axis(embed, 0);
            out.task_logits = mlp_on_tape(tape, pids, "cls",
                                          static_cast<int>(config.cls_hidden.size()) + 1, pooled);
        } else {
            Id global = tape.max_over_axis(embed, 0);
            Id bcast = tape.gather_rows(global, std::vector<int>(static_cast<std::size_t>(n), 0));
            Id pp = tape.concat_cols(embed, bcast);
            out.task_logits =
                mlp_on_tape(tape, pids, "seg", static_cast<int>(config.seg_hidden.size()) + 1, pp);
        }
    }
    if (with_reg) {
        Id rin = config.reg_input == "embedding" ? embed : cat;
        out.geom =
            mlp_on_tape(tape, pids, "reg", static_cast<int>(config.reg_hidden.size()) + 1, rin);
    }
    return out;
}

ForwardOutput forward(const ParamSet& params, const ModelConfig& config, const Array& input) {
    Tape tape;
    std::map<std::string, Id> pids;
    for (const auto& [name, value] : params) pids.emplace(name, tape.input(value, name));
    const TapeForward f = forward_on_tape(tape, pids, config, input, true, true);
    return {tape.value(f.task_logits), tape.value(f.geom)};
}

Array edge_conv(const Array& feats, int k, const Array& weight, const Array& bias) {
    const int n = feats.rows;
    if (k < 1 || k >= n)
        throw std::invalid_argument("edge_conv: k = " + std::to_string(k) +
                                    " out of range for " + std::to_string(n) + " points");
    Tape tape;
    Id x = tape.input(feats);
    std::vector<int> centers(static_cast<std::size_t>(n) * k);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < k; ++t) centers[static_cast<std::size_t>(i) * k + t] = i;
    Id e = tape.edge_features(x, centers, knn_rows(feats, k));
    Id h = tape.relu(tape.add_bias(tape.matmul(e, tape.input(weight)), tape.input(bias)));
    return tape.value(tape.group_max_rows(h, k));
}

namespace {

struct RegTarget {
    Id normals = -1;
    Id curvature = -1;
    std::vector<double> mask;
};

RegTarget reg_target_ids(Tape& tape, const GeomProps& gt) {
    const int n = static_cast<int>(gt.size());
    Array nrm(n, 3);
    Array crv(n, 1);
    RegTarget t;
    t.mask.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        nrm.at(i, 0) = gt.normals[s].x;
        nrm.at(i, 1) = gt.normals[s].y;
        nrm.at(i, 2) = gt.normals[s].z;
        crv.at(i, 0) = gt.curvature[s];
        t.mask[s] = gt.degenerate[s] ? 0.0 : 1.0;
    }
    t.normals = tape.input(std::move(nrm), "gt.normals");
    t.curvature = tape.input(std::move(crv), "gt.curvature");
    return t;
}

Id reg_loss_on_tape(Tape& tape, Id geom, const GeomProps& gt,
                    const std::string& targets = "both") {
    const Array& g = tape.value(geom);
    if (g.cols != 4 || g.rows != static_cast<int>(gt.size()))
        throw std::invalid_argument("regression loss: output " + g.shape_str() + " vs " +
                                    std::to_string(gt.size()) + " labeled points");
    RegTarget t = reg_target_ids(tape, gt);
    if (std::all_of(t.mask.begin(), t.mask.end(), [](double m) { return m == 0.0; }))
        std::cerr << "warning: all points degenerate, regression loss is 0\n";
    const Id pred_n = tape.slice_cols(geom, 0, 3);
    const Id pred_u = tape.slice_cols(geom, 3, 4);
    if (targets == "normals") return tape.mse_rows(pred_n, t.normals, t.mask);
    if (targets == "curvature") return tape.mse_rows(pred_u, t.curvature, t.mask);
    return tape.add(tape.mse_rows(pred_n, t.normals, t.mask),
                    tape.mse_rows(pred_u, t.curvature, t.mask));
}

}  // namespace

LossIds joint_loss(Tape& tape, Id task_logits, const std::vector<int>& labels, Id geom,
                   const GeomProps& gt, double lambda, const std::string& targets) {
    if (lambda < 0.0) throw std::invalid_argument("joint_loss: lambda must be non-negative");
    LossIds out;
    out.task = tape.softmax_cross_entropy(task_logits, labels);
    if (lambda > 0.0 && geom >= 0) {
        out.reg = reg_loss_on_tape(tape, geom, gt, targets);
        out.total = tape.add(out.task, tape.scale(out.reg, lambda));
    } else {
        out.total = out.task;
    }
    return out;
}

int argmax_row(const Array& a, int row) {
    const double* r = a.row(row);
    int best = 0;
    for (int j = 1; j < a.cols; ++j)
        if (r[j] > r[best]) best = j;
    return best;
}

Array cloud_input(const CloudEntry& entry, const ModelConfig& config) {
    const int n = static_cast<int>(entry.cloud.points.size());
    const bool want_n = config.input_props == "normals" || config.input_props == "both";
    const bool want_u = config.input_props == "curvature" || config.input_props == "both";
    Array in(n, config.input_dim());
    for (int i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        double* r = in.row(i);
        r[0] = entry.cloud.points[s].x;
        r[1] = entry.cloud.points[s].y;
        r[2] = entry.cloud.points[s].z;
        int c = 3;
        if (want_n) {
            r[c++] = entry.geossl.normals[s].x;
            r[c++] = entry.geossl.normals[s].y;
            r[c++] = entry.geossl.normals[s].z;
        }
        if (want_u) r[c++] = entry.geossl.curvature[s];
    }
    return in;
}

namespace {

const GeomProps& pick_labels(const CloudEntry& e, const std::string& source) {
    if (source == "geossl") return e.geossl;
    if (source == "geopl") return e.geopl;
    throw std::invalid_argument("unknown geometric label source '" + source + "'");
}

std::vector<int> cloud_task_labels(const CloudEntry& e, const std::string& task) {
    if (task == "classification") return {e.cloud.class_label};
    return e.cloud.part_labels;
}

bool group_trainable(ParamGroup g, bool phase1, const std::string& objective,
                     bool freeze_shared) {
    if (phase1) return g != ParamGroup::task;
    if (objective == "regression") {
        if (g == ParamGroup::task) return false;
        if (g == ParamGroup::shared) return !freeze_shared;
        return true;
    }
    return true;
}

}  // namespace

TrainResult train(const Dataset& data, const ModelConfig& config, const TrainConfig& tc,
                  const ParamSet* init, const EpochObserver& on_epoch) {
    config.validate();
    tc.validate();
    if (data.clouds.empty()) throw std::invalid_argument("train: empty dataset");
    data.validate();

    const int num_classes = data.num_classes();
    const int num_parts = data.num_parts();
    TrainResult out;
    out.params = init ? *init : init_params(config, num_classes, num_parts, tc.seed);
    if (init) {
        const ParamSet expected = init_params(config, num_classes, num_parts, tc.seed);
        if (expected.size() != out.params.size())
            throw std::invalid_argument("train: warm-start parameter set does not match config");
        for (const auto& [name, a] : expected) {
            auto it = out.params.find(name);
            if (it == out.params.end() || !it->second.same_shape(a))
                throw std::invalid_argument("train: warm-start parameter '" + name +
                                            "' missing or mis-shaped");
        }
    }

    OptimState opt;
    opt.base_lr = tc.lr;
    opt.momentum = tc.momentum;
    opt.gamma = tc.gamma;
    opt.decay_period = tc.decay_period;
    opt.validate();

    const double lambda_eff = tc.supervision == "none" ? 0.0 : tc.lambda;
    const int total_epochs = tc.pretrain_geom_epochs + tc.epochs;
    const SplitRng shuffle_root = SplitRng(tc.seed).split(0x5481);
    const int n_clouds = static_cast<int>(data.clouds.size());

    std::vector<int> order(static_cast<std::size_t>(n_clouds));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < total_epochs; ++epoch) {
        opt.epoch = epoch;
        const bool phase1 = epoch < tc.pretrain_geom_epochs;
        const std::string objective = phase1 ? "regression" : tc.objective;
        const bool joint = objective == "joint";
        const bool with_reg = !joint || lambda_eff > 0.0;

        SplitRng shuffle_rng = shuffle_root.split(static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double task_sum = 0.0, reg_sum = 0.0;
        for (int start = 0; start < n_clouds; start += tc.batch_size) {
            const int stop = std::min(n_clouds, start + tc.batch_size);
            const double inv_batch = 1.0 / (stop - start);
            ParamSet grads;
            for (int b = start; b < stop; ++b) {
                const CloudEntry& entry = data.clouds[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])];
                Tape tape;
                std::map<std::string, Id> pids;
                for (const auto& [name, value] : out.params)
                    pids.emplace(name, tape.param(value, name));
                const Array input = cloud_input(entry, config);
                const TapeForward f =
                    forward_on_tape(tape, pids, config, input, joint, with_reg);

                // With lambda_eff = 0 the regression term is skipped, so no
                // label source is consulted (supervision may be "none").
                static const GeomProps no_labels;
                const GeomProps& geo_labels =
                    with_reg ? pick_labels(entry, tc.supervision) : no_labels;

                Id total, task = -1, reg = -1;
                if (joint) {
                    const LossIds ids =
                        joint_loss(tape, f.task_logits, cloud_task_labels(entry, config.task),
                                   f.geom, geo_labels, lambda_eff, tc.reg_targets);
                    total = ids.total;
                    task = ids.task;
                    reg = ids.reg;
                } else {
                    reg = reg_loss_on_tape(tape, f.geom, geo_labels, tc.reg_targets);
                    total = reg;
                }
                if (!std::isfinite(tape.value(total).item()))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", batch " +
                                             std::to_string(start / tc.batch_size));
                if (task >= 0) task_sum += tape.value(task).item();
                if (reg >= 0) reg_sum += tape.value(reg).item();

                tape.backward(tape.scale(total, inv_batch));
                for (const auto& [name, pid] : pids) {
                    if (!tape.has_grad(pid)) continue;
                    if (!group_trainable(param_group(name), phase1, objective, tc.freeze_shared))
                        continue;
                    const Array& g = tape.grad(pid);
                    auto [it, fresh] = grads.try_emplace(name, g);
                    if (!fresh)
                        for (std::size_t i = 0; i < g.data.size(); ++i)
                            it->second.data[i] += g.data[i];
                }
            }
            sgd_step(out.params, grads, opt);
        }

        HistoryRow row;
        row.epoch = epoch;
        row.lr = lr_at_epoch(opt, epoch);
        row.task_loss = task_sum / n_clouds;
        row.reg_loss = reg_sum / n_clouds;
        row.total = joint ? row.task_loss + lambda_eff * row.reg_loss : row.reg_loss;
        out.history.push_back(row);
        if (on_epoch && !on_epoch(epoch, out.params)) break;
    }
    return out;
}

MetricsReport evaluate(const ParamSet& params, const ModelConfig& config, const Dataset& data,
                       const EvalOptions& opts) {
    config.validate();
    if (data.clouds.empty()) throw std::invalid_argument("evaluate: empty dataset");
    data.validate();

    MetricsReport report;
    std::vector<int> cls_pred, cls_truth;
    std::vector<int> pt_pred, pt_truth;
    std::vector<Vec3> nrm_pred, nrm_ref;
    std::vector<std::uint8_t> nrm_excl;
    double crv_sq = 0.0;
    long crv_n = 0;

    for (const CloudEntry& entry : data.clouds) {
        const ForwardOutput f = forward(params, config, cloud_input(entry, config));
        if (config.task == "classification") {
            if (f.task_logits.cols != data.num_classes())
                throw std::invalid_argument("evaluate: model emits " +
                                            std::to_string(f.task_logits.cols) +
                                            " classes, dataset has " +
                                            std::to_string(data.num_classes()));
            cls_pred.push_back(argmax_row(f.task_logits, 0));
            cls_truth.push_back(entry.cloud.class_label);
            if (opts.predictions) opts.predictions->push_back({cls_pred.back()});
        } else {
            if (f.task_logits.cols != data.num_parts())
                throw std::invalid_argument("evaluate: model emits " +
                                            std::to_string(f.task_logits.cols) +
                                            " parts, dataset has " +
                                            std::to_string(data.num_parts()));
            const auto& parts =
                data.category_parts[static_cast<std::size_t>(entry.cloud.class_label)];
            std::vector<int> shape_pred;
            for (int i = 0; i < f.task_logits.rows; ++i) {
                // argmax restricted to the parts of the cloud's own category
                int best = parts[0];
                for (int p : parts)
                    if (f.task_logits.at(i, p) > f.task_logits.at(i, best)) best = p;
                shape_pred.push_back(best);
            }
            if (opts.predictions) opts.predictions->push_back(shape_pred);
            const double iou = shape_iou(shape_pred, entry.cloud.part_labels, parts);
            report.per_shape_iou.push_back(iou);
            pt_pred.insert(pt_pred.end(), shape_pred.begin(), shape_pred.end());
            pt_truth.insert(pt_truth.end(), entry.cloud.part_labels.begin(),
                            entry.cloud.part_labels.end());
        }
        if (opts.geom_metrics) {
            const GeomProps& ref = pick_labels(entry, opts.geom_reference);
            for (int i = 0; i < f.geom.rows; ++i) {
                const std::size_t s = static_cast<std::size_t>(i);
                const Vec3 pn = Vec3{f.geom.at(i, 0), f.geom.at(i, 1), f.geom.at(i, 2)}.normalized();
                nrm_pred.push_back(pn);
                nrm_ref.push_back(ref.normals[s]);
                nrm_excl.push_back(ref.degenerate[s]);
                if (!ref.degenerate[s]) {
                    const double d = f.geom.at(i, 3) - ref.curvature[s];
                    crv_sq += d * d;
                    ++crv_n;
                }
            }
        }
    }

    if (config.task == "classification") {
        int k = 0;
        report.mean_class_accuracy = mean_class_accuracy(cls_pred, cls_truth, &k);
        report.class_count = k;
        report.overall_accuracy = overall_accuracy(cls_pred, cls_truth);
    } else {
        report.overall_accuracy = overall_accuracy(pt_pred, pt_truth);
        double iou_sum = 0.0;
        for (double v : report.per_shape_iou) iou_sum += v;
        report.mean_iou = iou_sum / static_cast<double>(report.per_shape_iou.size());
    }
    if (opts.geom_metrics) {
        const NormalErrorStats s = normal_errors(nrm_pred, nrm_ref, nrm_excl);
        report.normal_cosine_similarity = s.cosine_similarity;
        report.normal_cosine_distance = s.cosine_distance;
        report.normal_rms_angle_deg = s.rms_angle_deg;
        report.normal_cosine_similarity_unoriented = s.cosine_similarity_unoriented;
        report.normal_rms_angle_deg_unoriented = s.rms_angle_deg_unoriented;
        if (crv_n > 0) report.curvature_rmse = std::sqrt(crv_sq / static_cast<double>(crv_n));
    }
    return report;
}

ProbeResult probe_frozen_backbone(const ParamSet& pretrained, const Dataset& trainset,
                                  const Dataset& testset, const ModelConfig& config,
                                  TrainConfig tc) {
    for (const auto& [name, a] : pretrained) {
        (void)a;
        param_group(name);  // throws on foreign names
    }
    for (const char* needed : {"edge0.w", "embed.w", "reg0.w"})
        if (!pretrained.count(needed))
            throw std::invalid_argument(std::string("probe_frozen_backbone: pretrained set lacks '") +
                                        needed + "'");
    tc.objective = "regression";
    tc.freeze_shared = true;
    tc.pretrain_geom_epochs = 0;
    ProbeResult out;
    TrainResult tr = train(trainset, config, tc, &pretrained);
    out.params = std::move(tr.params);
    out.history = std::move(tr.history);
    EvalOptions opts;
    opts.geom_metrics = true;
    opts.geom_reference = "geopl";
    out.metrics = evaluate(out.params, config, testset, opts);
    return out;
}

}  // namespace geoaux
