#include "geoaux/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "geoaux/dataset_io.hpp"
#include "geoaux/rng.hpp"

namespace geoaux {

namespace {

// Runs `body(cell)` for every cell index in a small worker pool. Each cell
// writes only its own preallocated result slot, so the output is identical
// no matter how cells interleave. The first exception wins and is rethrown.
void run_cells(int n_cells, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::clamp(jobs, 1, n_cells);
    if (jobs == 1) {
        for (int i = 0; i < n_cells; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_cells || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const char* what) {
    if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw std::invalid_argument(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json dataset_spec_to_json(const DatasetSpec& s) {
    return {{"train_per_class", s.train_per_class},
            {"test_per_class", s.test_per_class},
            {"points_per_cloud", s.points_per_cloud},
            {"dense_points", s.dense_points},
            {"jitter_train", s.jitter_train},
            {"jitter_test", s.jitter_test},
            {"geossl_k", s.geossl_k},
            {"geopl_source", s.geopl_source},
            {"dense_k", s.dense_k},
            {"seed", s.seed}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j, DatasetSpec s) {
    reject_unknown_keys(j,
                        {"train_per_class", "test_per_class", "points_per_cloud", "dense_points",
                         "jitter_train", "jitter_test", "geossl_k", "geopl_source", "dense_k",
                         "seed"},
                        "dataset spec");
    maybe(j, "train_per_class", s.train_per_class);
    maybe(j, "test_per_class", s.test_per_class);
    maybe(j, "points_per_cloud", s.points_per_cloud);
    maybe(j, "dense_points", s.dense_points);
    maybe(j, "jitter_train", s.jitter_train);
    maybe(j, "jitter_test", s.jitter_test);
    maybe(j, "geossl_k", s.geossl_k);
    maybe(j, "geopl_source", s.geopl_source);
    maybe(j, "dense_k", s.dense_k);
    maybe(j, "seed", s.seed);
    s.validate();
    return s;
}

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"k_graph", c.k_graph},
            {"edge_channels", c.edge_channels},
            {"embed_dim", c.embed_dim},
            {"cls_hidden", c.cls_hidden},
            {"seg_hidden", c.seg_hidden},
            {"reg_hidden", c.reg_hidden},
            {"task", c.task},
            {"dynamic_graph", c.dynamic_graph},
            {"reg_input", c.reg_input},
            {"input_props", c.input_props}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
    reject_unknown_keys(j,
                        {"k_graph", "edge_channels", "embed_dim", "cls_hidden", "seg_hidden",
                         "reg_hidden", "task", "dynamic_graph", "reg_input", "input_props"},
                        "model config");
    maybe(j, "k_graph", c.k_graph);
    maybe(j, "edge_channels", c.edge_channels);
    maybe(j, "embed_dim", c.embed_dim);
    maybe(j, "cls_hidden", c.cls_hidden);
    maybe(j, "seg_hidden", c.seg_hidden);
    maybe(j, "reg_hidden", c.reg_hidden);
    maybe(j, "task", c.task);
    maybe(j, "dynamic_graph", c.dynamic_graph);
    maybe(j, "reg_input", c.reg_input);
    maybe(j, "input_props", c.input_props);
    c.validate();
    return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"lambda", c.lambda},
            {"lr", c.lr},
            {"momentum", c.momentum},
            {"gamma", c.gamma},
            {"decay_period", c.decay_period},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"supervision", c.supervision},
            {"pretrain_geom_epochs", c.pretrain_geom_epochs},
            {"objective", c.objective},
            {"freeze_shared", c.freeze_shared},
            {"reg_targets", c.reg_targets}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    reject_unknown_keys(j,
                        {"lambda", "lr", "momentum", "gamma", "decay_period", "epochs",
                         "batch_size", "seed", "supervision", "pretrain_geom_epochs", "objective",
                         "freeze_shared", "reg_targets"},
                        "train config");
    maybe(j, "lambda", c.lambda);
    maybe(j, "lr", c.lr);
    maybe(j, "momentum", c.momentum);
    maybe(j, "gamma", c.gamma);
    maybe(j, "decay_period", c.decay_period);
    maybe(j, "epochs", c.epochs);
    maybe(j, "batch_size", c.batch_size);
    maybe(j, "seed", c.seed);
    maybe(j, "supervision", c.supervision);
    maybe(j, "pretrain_geom_epochs", c.pretrain_geom_epochs);
    maybe(j, "objective", c.objective);
    maybe(j, "freeze_shared", c.freeze_shared);
    maybe(j, "reg_targets", c.reg_targets);
    c.validate();
    return c;
}

std::string spec_hash(const nlohmann::json& spec) { return sha256_hex(spec.dump()).substr(0, 12); }

std::vector<SweepCell> sweep_lambda(const Dataset& train_split, const Dataset& test_split,
                                    const ModelConfig& config, const TrainConfig& base,
                                    const std::vector<double>& lambdas,
                                    const std::vector<std::uint64_t>& seeds, int jobs) {
    if (lambdas.empty() || seeds.empty())
        throw std::invalid_argument("sweep_lambda: empty lambda grid or seed list");
    std::vector<SweepCell> cells(lambdas.size() * seeds.size());
    run_cells(static_cast<int>(cells.size()), jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const double lambda = lambdas[i / seeds.size()];
        const std::uint64_t seed = seeds[i % seeds.size()];
        TrainConfig tc = base;
        tc.lambda = lambda;
        tc.seed = seed;
        tc.supervision = lambda > 0.0 ? "geossl" : "none";
        const TrainResult tr = train(train_split, config, tc);
        const MetricsReport rep = evaluate(tr.params, config, test_split);
        SweepCell& cell = cells[i];
        cell.lambda = lambda;
        cell.seed = seed;
        cell.oa = rep.overall_accuracy.value();
        cell.ma = rep.mean_class_accuracy ? *rep.mean_class_accuracy : rep.mean_iou.value();
    });
    return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,seed,oa,ma\n";
    for (const SweepCell& c : cells)
        os << c.lambda << ',' << c.seed << ',' << c.oa << ',' << c.ma << '\n';
    return os.str();
}

std::vector<AblateCell> ablate_properties(const Dataset& train_split, const Dataset& test_split,
                                          const ModelConfig& config, const TrainConfig& base,
                                          const std::vector<std::uint64_t>& seeds, int jobs) {
    if (seeds.empty()) throw std::invalid_argument("ablate_properties: empty seed list");
    struct Variant {
        const char* name;
        const char* props;  // input_props / reg_targets value
    };
    const Variant variants[] = {
        {"P", "none"}, {"P+n", "normals"}, {"P+u", "curvature"}, {"P+n+u", "both"}};
    const char* modes[] = {"input", "supervision"};
    const std::size_t per_mode = 4 * seeds.size();
    std::vector<AblateCell> cells(2 * per_mode);
    run_cells(static_cast<int>(cells.size()), jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const char* mode = modes[i / per_mode];
        const Variant& v = variants[(i % per_mode) / seeds.size()];
        const std::uint64_t seed = seeds[i % seeds.size()];
        ModelConfig mc = config;
        TrainConfig tc = base;
        tc.seed = seed;
        const bool plain = std::string(v.props) == "none";
        if (std::string(mode) == "input") {
            mc.input_props = v.props;
            tc.supervision = "none";
        } else {
            mc.input_props = "none";
            if (plain) {
                tc.supervision = "none";
            } else {
                tc.supervision = base.supervision == "none" ? "geossl" : base.supervision;
                tc.reg_targets = v.props;
            }
        }
        const TrainResult tr = train(train_split, mc, tc);
        const MetricsReport rep = evaluate(tr.params, mc, test_split);
        AblateCell& cell = cells[i];
        cell.variant = v.name;
        cell.mode = mode;
        cell.seed = seed;
        cell.oa = rep.overall_accuracy.value();
    });
    return cells;
}

std::string ablate_csv(const std::vector<AblateCell>& cells) {
    std::ostringstream os;
    os.precision(17);
    os << "variant,mode,seed,oa\n";
    for (const AblateCell& c : cells)
        os << c.variant << ',' << c.mode << ',' << c.seed << ',' << c.oa << '\n';
    return os.str();
}

namespace {

struct NormalSets {
    std::vector<Vec3> pred;
    std::vector<Vec3> ref;
    std::vector<std::uint8_t> excl;
};

double cos_distance(const NormalSets& s) {
    return normal_errors(s.pred, s.ref, s.excl).cosine_distance;
}

void bin_angles(const std::vector<Vec3>& pred, const std::vector<Vec3>& ref,
                const std::vector<std::uint8_t>& excl, std::vector<long>& bins) {
    constexpr double kRad2Deg = 57.295779513082320877;
    bins.assign(31, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (excl[i]) continue;
        const double d = std::clamp(pred[i].dot(ref[i]), -1.0, 1.0);
        const double ang = std::acos(d) * kRad2Deg;
        const int bin = ang >= 30.0 ? 30 : static_cast<int>(ang);
        bins[static_cast<std::size_t>(bin)] += 1;
    }
}

}  // namespace

NoiseReport noise_robustness(const Dataset& test_split, const ParamSet& params,
                             const ModelConfig& config, double sigma, int pca_k,
                             std::uint64_t noise_seed) {
    if (test_split.clouds.empty()) throw std::invalid_argument("noise_robustness: empty test split");
    if (sigma < 0.0) throw std::invalid_argument("noise_robustness: negative sigma");
    if (config.input_props != "none")
        throw std::invalid_argument("noise_robustness: needs a coordinates-only model");

    NoiseReport rep;
    rep.sigma = sigma;
    NormalSets pca_ana, pca_ssl, net_ana, net_ssl;
    SplitRng seed_rng = SplitRng(noise_seed).split(0x6e02);

    for (std::size_t ci = 0; ci < test_split.clouds.size(); ++ci) {
        const CloudEntry& entry = test_split.clouds[ci];
        const PointCloud noisy =
            add_gaussian_noise(entry.cloud, sigma, seed_rng.split(ci).next_u64());
        const GeomProps pca = compute_props(noisy, pca_k);

        CloudEntry noisy_entry = entry;
        noisy_entry.cloud = noisy;
        const ForwardOutput f = forward(params, config, cloud_input(noisy_entry, config));

        const int n = static_cast<int>(noisy.points.size());
        for (int i = 0; i < n; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            const Vec3 net_n =
                Vec3{f.geom.at(i, 0), f.geom.at(i, 1), f.geom.at(i, 2)}.normalized();
            pca_ana.pred.push_back(pca.normals[s]);
            pca_ana.ref.push_back(entry.geopl.normals[s]);
            pca_ana.excl.push_back(entry.geopl.degenerate[s] || pca.degenerate[s] ? 1 : 0);
            pca_ssl.pred.push_back(pca.normals[s]);
            pca_ssl.ref.push_back(entry.geossl.normals[s]);
            pca_ssl.excl.push_back(entry.geossl.degenerate[s] || pca.degenerate[s] ? 1 : 0);
            net_ana.pred.push_back(net_n);
            net_ana.ref.push_back(entry.geopl.normals[s]);
            net_ana.excl.push_back(entry.geopl.degenerate[s]);
            net_ssl.pred.push_back(net_n);
            net_ssl.ref.push_back(entry.geossl.normals[s]);
            net_ssl.excl.push_back(entry.geossl.degenerate[s]);
        }
    }
    rep.points = static_cast<int>(pca_ana.pred.size());
    rep.pca_vs_analytic = cos_distance(pca_ana);
    rep.pca_vs_geossl = cos_distance(pca_ssl);
    rep.learned_vs_analytic = cos_distance(net_ana);
    rep.learned_vs_geossl = cos_distance(net_ssl);
    bin_angles(pca_ana.pred, pca_ana.ref, pca_ana.excl, rep.pca_angle_bins);
    bin_angles(net_ana.pred, net_ana.ref, net_ana.excl, rep.learned_angle_bins);
    return rep;
}

std::string NoiseReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "geoaux.noise.v1";
    j["sigma"] = sigma;
    j["points"] = points;
    j["cosine_distance"] = {{"pca_vs_analytic", pca_vs_analytic},
                            {"pca_vs_geossl", pca_vs_geossl},
                            {"learned_vs_analytic", learned_vs_analytic},
                            {"learned_vs_geossl", learned_vs_geossl}};
    nlohmann::json edges = nlohmann::json::array();
    for (int e = 0; e <= 30; ++e) edges.push_back(e);
    j["angle_histogram"] = {{"bin_edges_deg", edges},
                            {"last_bin_is_overflow", true},
                            {"pca", pca_angle_bins},
                            {"learned", learned_angle_bins}};
    return j.dump(2);
}

std::vector<ProbeRow> probe_suite(const Dataset& train_split, const Dataset& test_split,
                                  const ModelConfig& config, const TrainConfig& cls_base,
                                  const TrainConfig& reg_base,
                                  const std::vector<std::uint64_t>& seeds, int jobs) {
    if (seeds.empty()) throw std::invalid_argument("probe_suite: empty seed list");
    std::vector<ProbeRow> rows(3 * seeds.size());
    run_cells(static_cast<int>(seeds.size()), jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const std::uint64_t seed = seeds[i];
        EvalOptions geom_eval;
        geom_eval.geom_metrics = true;
        geom_eval.geom_reference = "geopl";

        // scratch: regression objective end to end
        TrainConfig scratch = reg_base;
        scratch.seed = seed;
        scratch.objective = "regression";
        scratch.freeze_shared = false;
        scratch.supervision = "geopl";
        scratch.reg_targets = "both";
        const TrainResult scratch_tr = train(train_split, config, scratch);
        const MetricsReport scratch_rep = evaluate(scratch_tr.params, config, test_split, geom_eval);
        rows[3 * i + 0] = {"scratch", seed, scratch_rep.normal_cosine_similarity.value()};

        // frozen: classification backbone, regression head trained on top
        TrainConfig cls = cls_base;
        cls.seed = seed;
        cls.supervision = "none";
        cls.objective = "joint";
        const TrainResult cls_tr = train(train_split, config, cls);
        TrainConfig frozen = scratch;
        const ProbeResult frozen_probe =
            probe_frozen_backbone(cls_tr.params, train_split, test_split, config, frozen);
        rows[3 * i + 1] = {"frozen", seed, frozen_probe.metrics.normal_cosine_similarity.value()};

        // geossl: auxiliary-regression backbone, probed the same way
        TrainConfig ssl = cls_base;
        ssl.seed = seed;
        ssl.supervision = "geossl";
        ssl.objective = "joint";
        const TrainResult ssl_tr = train(train_split, config, ssl);
        const ProbeResult ssl_probe =
            probe_frozen_backbone(ssl_tr.params, train_split, test_split, config, frozen);
        rows[3 * i + 2] = {"geossl", seed, ssl_probe.metrics.normal_cosine_similarity.value()};
    });
    return rows;
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "variant,seed,cosine_similarity\n";
    for (const ProbeRow& r : rows)
        os << r.variant << ',' << r.seed << ',' << r.cosine_similarity << '\n';
    return os.str();
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace geoaux
