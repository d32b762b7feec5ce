// Experiment driver. Every command resolves its spec (defaults <- config
// file <- flags), runs under <out-root>/<command>-<spec-hash>/, and records
// a manifest with the resolved spec plus SHA-256 of every input and output.
// Rerunning a command from its manifest reproduces all outputs byte for
// byte on the same platform.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoaux/checkpoint.hpp"
#include "geoaux/dataset_io.hpp"
#include "geoaux/experiments.hpp"
#include "geoaux/geomprops.hpp"
#include "geoaux/model.hpp"
#include "geoaux/pointcloud.hpp"
#include "geoaux/synthdata.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geoaux;

namespace {

std::string resolve_out_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("GEOAUX_OUT"); env && *env) return env;
    return "runs";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
    return j;
}

// A config file is either a raw spec or a manifest from a previous run;
// manifests contribute their embedded spec, enabling bit-exact reruns.
json unwrap_config(const json& j, const std::string& command) {
    if (j.is_object() && j.value("schema", "") == "geoaux.manifest.v1") {
        const std::string recorded = j.value("command", "");
        if (recorded != command)
            throw std::runtime_error("manifest records command '" + recorded +
                                     "', but '" + command + "' was invoked");
        if (!j.contains("spec")) throw std::runtime_error("manifest has no spec field");
        return j.at("spec");
    }
    return j;
}

void reject_unknown_top_keys(const json& spec, const std::set<std::string>& known,
                             const std::string& command) {
    if (!spec.is_object())
        throw std::runtime_error(command + ": spec must be a JSON object");
    for (const auto& [key, value] : spec.items()) {
        (void)value;
        if (!known.count(key))
            throw std::runtime_error(command + ": unknown spec key '" + key + "'");
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// One run directory per resolved spec. The name hashes the command plus the
// spec so distinct experiments never collide or overwrite one another.
struct Run {
    std::string command;
    json spec;
    fs::path dir;
    std::map<std::string, std::string> inputs;   // path as given -> sha256
    std::vector<std::string> outputs;            // file names inside dir

    Run(const std::string& cmd, const json& resolved, const std::string& out_root)
        : command(cmd), spec(resolved) {
        json hashed = resolved;
        hashed["command"] = cmd;
        dir = fs::path(out_root) / (cmd + "-" + spec_hash(hashed));
        fs::create_directories(dir);
    }

    void add_input(const std::string& path) { inputs[path] = sha256_file(path); }

    void emit(const std::string& name, const std::string& content) {
        write_text(dir / name, content);
        outputs.push_back(name);
    }

    // Registers a file some library call already wrote into the run dir.
    void note_output(const std::string& name) { outputs.push_back(name); }

    void finish() {
        json m;
        m["schema"] = "geoaux.manifest.v1";
        m["command"] = command;
        m["spec"] = spec;
        m["inputs"] = json::object();
        for (const auto& [path, hash] : inputs) m["inputs"][path] = hash;
        m["outputs"] = json::object();
        for (const std::string& name : outputs)
            m["outputs"][name] = sha256_file((dir / name).string());
        write_text(dir / "manifest.json", m.dump(2) + "\n");
        std::cout << (dir / "manifest.json").string() << "\n";
    }
};

// Shared spec fragment: a dataset either generated inline from its spec or
// loaded from a previous gen run directory.
struct DataSource {
    DatasetSpec spec;
    std::string data_dir;  // when nonempty, load train.json/test.json here
};

DataSource data_source_from_spec(const json& spec) {
    DataSource src;
    if (spec.contains("data_dir")) src.data_dir = spec.at("data_dir").get<std::string>();
    src.spec = dataset_spec_from_json(spec.value("dataset", json::object()));
    return src;
}

void data_source_to_spec(const DataSource& src, json& spec) {
    spec["dataset"] = dataset_spec_to_json(src.spec);
    if (!src.data_dir.empty()) spec["data_dir"] = src.data_dir;
}

GeneratedDataset materialize(const DataSource& src, Run& run) {
    if (src.data_dir.empty()) return gen_dataset(src.spec);
    const std::string train_path = (fs::path(src.data_dir) / "train.json").string();
    const std::string test_path = (fs::path(src.data_dir) / "test.json").string();
    run.add_input(train_path);
    run.add_input(test_path);
    GeneratedDataset gd;
    gd.train = load_dataset(train_path);
    gd.test = load_dataset(test_path);
    return gd;
}

std::string predictions_csv(const Dataset& data, const std::vector<std::vector<int>>& preds,
                            const std::string& task) {
    std::ostringstream os;
    if (task == "classification") {
        os << "cloud,truth,pred\n";
        for (std::size_t c = 0; c < preds.size(); ++c)
            os << c << ',' << data.clouds[c].cloud.class_label << ',' << preds[c][0] << '\n';
    } else {
        os << "cloud,index,truth,pred\n";
        for (std::size_t c = 0; c < preds.size(); ++c)
            for (std::size_t i = 0; i < preds[c].size(); ++i)
                os << c << ',' << i << ',' << data.clouds[c].cloud.part_labels[i] << ','
                   << preds[c][i] << '\n';
    }
    return os.str();
}

std::vector<std::uint64_t> seeds_from_spec(const json& spec) {
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    if (spec.contains("seeds")) seeds = spec.at("seeds").get<std::vector<std::uint64_t>>();
    if (seeds.empty()) throw std::runtime_error("seed list is empty");
    return seeds;
}

// mean and sample standard deviation (n-1 denominator; 0 for n=1)
std::pair<double, double> mean_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    if (v.size() < 2) return {m, 0.0};
    double sq = 0.0;
    for (double x : v) sq += (x - m) * (x - m);
    return {m, std::sqrt(sq / static_cast<double>(v.size() - 1))};
}

// ---------------------------------------------------------------- commands

void cmd_gen(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(cfg, {"dataset"}, "gen");
    const DatasetSpec ds = dataset_spec_from_json(cfg.value("dataset", json::object()));
    json spec;
    spec["dataset"] = dataset_spec_to_json(ds);
    Run run("gen", spec, out_root);
    const GeneratedDataset gd = gen_dataset(ds);
    save_dataset(gd.train, (run.dir / "train.json").string());
    run.note_output("train.json");
    save_dataset(gd.test, (run.dir / "test.json").string());
    run.note_output("test.json");
    run.finish();
}

void cmd_props(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(cfg,
                            {"input", "k", "index", "points", "sample_seed", "curvature",
                             "orientation", "covariance"},
                            "props");
    if (!cfg.contains("input")) throw std::runtime_error("props: spec needs an input file");
    const std::string input = cfg.at("input").get<std::string>();
    const int k = cfg.value("k", 20);
    const int index = cfg.value("index", 0);
    const int points = cfg.value("points", 1024);
    const std::uint64_t sample_seed = cfg.value("sample_seed", std::uint64_t{0});
    const std::string curvature = cfg.value("curvature", "eigen_ratio");
    const std::string orientation = cfg.value("orientation", "outward");
    const std::string covariance = cfg.value("covariance", "displacement");

    PropsOptions opts;
    if (curvature == "eigen_ratio") opts.curvature = CurvatureKind::eigen_ratio;
    else if (curvature == "normal_deviation") opts.curvature = CurvatureKind::normal_deviation;
    else throw std::runtime_error("props: unknown curvature kind '" + curvature + "'");
    if (orientation == "outward") opts.orientation = NormalOrientation::outward;
    else if (orientation == "canonical") opts.orientation = NormalOrientation::canonical;
    else throw std::runtime_error("props: unknown orientation '" + orientation + "'");
    if (covariance == "displacement") opts.covariance = CovarianceMode::displacement;
    else if (covariance == "centered") opts.covariance = CovarianceMode::centered;
    else throw std::runtime_error("props: unknown covariance mode '" + covariance + "'");

    json spec;
    spec["input"] = input;
    spec["k"] = k;
    spec["index"] = index;
    spec["points"] = points;
    spec["sample_seed"] = sample_seed;
    spec["curvature"] = curvature;
    spec["orientation"] = orientation;
    spec["covariance"] = covariance;
    Run run("props", spec, out_root);
    run.add_input(input);

    PointCloud cloud;
    const std::string ext = fs::path(input).extension().string();
    if (ext == ".xyz") {
        cloud = read_xyz(input);
    } else if (ext == ".off") {
        cloud = sample_surface(load_off(input), points, sample_seed);
    } else if (ext == ".json") {
        const Dataset ds = load_dataset(input);
        if (index < 0 || static_cast<std::size_t>(index) >= ds.clouds.size())
            throw std::runtime_error("props: cloud index " + std::to_string(index) +
                                     " outside dataset of " + std::to_string(ds.clouds.size()));
        cloud = ds.clouds[static_cast<std::size_t>(index)].cloud;
    } else {
        throw std::runtime_error("props: unsupported input type '" + ext +
                                 "' (expected .xyz, .off, or .json)");
    }

    const GeomProps props = compute_props(cloud, k, opts);
    write_props_csv(props, (run.dir / "props.csv").string());
    run.note_output("props.csv");
    run.finish();
}

// train and eval share the reporting tail: metrics + prediction dump.
void report_metrics(Run& run, const ParamSet& params, const ModelConfig& mc,
                    const Dataset& testset, bool eval_geom, const std::string& geom_reference) {
    std::vector<std::vector<int>> preds;
    EvalOptions opts;
    opts.geom_metrics = eval_geom;
    opts.geom_reference = geom_reference;
    opts.predictions = &preds;
    const MetricsReport rep = evaluate(params, mc, testset, opts);
    run.emit("metrics.json", rep.to_json() + "\n");
    run.emit("predictions.csv", predictions_csv(testset, preds, mc.task));
}

void cmd_train(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(
        cfg, {"dataset", "data_dir", "model", "train", "eval_geom", "geom_reference"}, "train");
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    const TrainConfig tc = train_config_from_json(cfg.value("train", json::object()));
    const bool eval_geom = cfg.value("eval_geom", false);
    const std::string geom_reference = cfg.value("geom_reference", "geopl");

    json spec;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["train"] = train_config_to_json(tc);
    spec["eval_geom"] = eval_geom;
    spec["geom_reference"] = geom_reference;
    Run run("train", spec, out_root);

    const GeneratedDataset gd = materialize(src, run);
    const TrainResult tr = train(gd.train, mc, tc);
    save_checkpoint(tr.params, (run.dir / "checkpoint.json").string());
    run.note_output("checkpoint.json");
    write_history_csv(tr.history, (run.dir / "history.csv").string());
    run.note_output("history.csv");
    report_metrics(run, tr.params, mc, gd.test, eval_geom, geom_reference);
    run.finish();
}

void cmd_eval(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(
        cfg, {"checkpoint", "dataset", "data_dir", "model", "split", "eval_geom", "geom_reference"},
        "eval");
    if (!cfg.contains("checkpoint")) throw std::runtime_error("eval: spec needs a checkpoint");
    const std::string checkpoint = cfg.at("checkpoint").get<std::string>();
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    const std::string split = cfg.value("split", "test");
    if (split != "train" && split != "test")
        throw std::runtime_error("eval: split must be train or test, got '" + split + "'");
    const bool eval_geom = cfg.value("eval_geom", false);
    const std::string geom_reference = cfg.value("geom_reference", "geopl");

    json spec;
    spec["checkpoint"] = checkpoint;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["split"] = split;
    spec["eval_geom"] = eval_geom;
    spec["geom_reference"] = geom_reference;
    Run run("eval", spec, out_root);
    run.add_input(checkpoint);

    const ParamSet params = load_checkpoint(checkpoint);
    const GeneratedDataset gd = materialize(src, run);
    report_metrics(run, params, mc, split == "test" ? gd.test : gd.train, eval_geom,
                   geom_reference);
    run.finish();
}

void cmd_sweep_lambda(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(cfg, {"dataset", "data_dir", "model", "train", "lambdas", "seeds", "jobs"},
                            "sweep-lambda");
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    TrainConfig base_defaults;
    base_defaults.supervision = "geossl";
    const TrainConfig tc = train_config_from_json(cfg.value("train", json::object()), base_defaults);
    std::vector<double> lambdas = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    if (cfg.contains("lambdas")) lambdas = cfg.at("lambdas").get<std::vector<double>>();
    const std::vector<std::uint64_t> seeds = seeds_from_spec(cfg);
    const int jobs = cfg.value("jobs", 1);

    json spec;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["train"] = train_config_to_json(tc);
    spec["lambdas"] = lambdas;
    spec["seeds"] = seeds;
    spec["jobs"] = jobs;
    Run run("sweep-lambda", spec, out_root);

    const GeneratedDataset gd = materialize(src, run);
    const std::vector<SweepCell> cells = sweep_lambda(gd.train, gd.test, mc, tc, lambdas, seeds, jobs);
    run.emit("sweep.csv", sweep_csv(cells));

    json summary;
    summary["schema"] = "geoaux.sweep_summary.v1";
    summary["rows"] = json::array();
    for (double lambda : lambdas) {
        std::vector<double> oa, ma;
        for (const SweepCell& c : cells)
            if (c.lambda == lambda) {
                oa.push_back(c.oa);
                ma.push_back(c.ma);
            }
        const auto [oam, oas] = mean_std(oa);
        const auto [mam, mas] = mean_std(ma);
        summary["rows"].push_back({{"lambda", lambda},
                                   {"oa_mean", oam},
                                   {"oa_std", oas},
                                   {"ma_mean", mam},
                                   {"ma_std", mas},
                                   {"seeds", oa.size()}});
    }
    run.emit("summary.json", summary.dump(2) + "\n");
    run.finish();
}

void cmd_ablate_props(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(cfg, {"dataset", "data_dir", "model", "train", "seeds", "jobs"},
                            "ablate-props");
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    TrainConfig base_defaults;
    base_defaults.supervision = "geossl";
    const TrainConfig tc = train_config_from_json(cfg.value("train", json::object()), base_defaults);
    const std::vector<std::uint64_t> seeds = seeds_from_spec(cfg);
    const int jobs = cfg.value("jobs", 1);

    json spec;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["train"] = train_config_to_json(tc);
    spec["seeds"] = seeds;
    spec["jobs"] = jobs;
    Run run("ablate-props", spec, out_root);

    const GeneratedDataset gd = materialize(src, run);
    const std::vector<AblateCell> cells = ablate_properties(gd.train, gd.test, mc, tc, seeds, jobs);
    run.emit("ablate.csv", ablate_csv(cells));

    json summary;
    summary["schema"] = "geoaux.ablate_summary.v1";
    summary["rows"] = json::array();
    for (const char* mode : {"input", "supervision"}) {
        for (const char* variant : {"P", "P+n", "P+u", "P+n+u"}) {
            std::vector<double> oa;
            for (const AblateCell& c : cells)
                if (c.mode == mode && c.variant == variant) oa.push_back(c.oa);
            const auto [m, s] = mean_std(oa);
            summary["rows"].push_back({{"variant", variant},
                                       {"mode", mode},
                                       {"oa_mean", m},
                                       {"oa_std", s},
                                       {"seeds", oa.size()}});
        }
    }
    run.emit("summary.json", summary.dump(2) + "\n");
    run.finish();
}

void cmd_noise(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(
        cfg, {"dataset", "data_dir", "model", "train", "checkpoint", "sigma", "pca_k", "noise_seed"},
        "noise");
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    TrainConfig reg_defaults;
    reg_defaults.objective = "regression";
    reg_defaults.supervision = "geopl";
    const TrainConfig tc = train_config_from_json(cfg.value("train", json::object()), reg_defaults);
    const std::string checkpoint = cfg.value("checkpoint", "");
    const double sigma = cfg.value("sigma", 0.01);
    const int pca_k = cfg.value("pca_k", 20);
    const std::uint64_t noise_seed = cfg.value("noise_seed", std::uint64_t{7});

    json spec;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["train"] = train_config_to_json(tc);
    spec["checkpoint"] = checkpoint;
    spec["sigma"] = sigma;
    spec["pca_k"] = pca_k;
    spec["noise_seed"] = noise_seed;
    Run run("noise", spec, out_root);

    const GeneratedDataset gd = materialize(src, run);
    ParamSet params;
    if (!checkpoint.empty()) {
        run.add_input(checkpoint);
        params = load_checkpoint(checkpoint);
    } else {
        params = train(gd.train, mc, tc).params;
    }
    const NoiseReport rep = noise_robustness(gd.test, params, mc, sigma, pca_k, noise_seed);
    run.emit("noise.json", rep.to_json() + "\n");
    run.finish();
}

void cmd_probe(const json& cfg, const std::string& out_root) {
    reject_unknown_top_keys(
        cfg, {"dataset", "data_dir", "model", "cls_train", "reg_train", "seeds", "jobs"}, "probe");
    const DataSource src = data_source_from_spec(cfg);
    const ModelConfig mc = model_config_from_json(cfg.value("model", json::object()));
    TrainConfig cls_defaults;
    cls_defaults.supervision = "none";
    const TrainConfig cls_tc =
        train_config_from_json(cfg.value("cls_train", json::object()), cls_defaults);
    TrainConfig reg_defaults;
    reg_defaults.objective = "regression";
    reg_defaults.supervision = "geopl";
    reg_defaults.lr = 0.001;
    const TrainConfig reg_tc =
        train_config_from_json(cfg.value("reg_train", json::object()), reg_defaults);
    const std::vector<std::uint64_t> seeds = seeds_from_spec(cfg);
    const int jobs = cfg.value("jobs", 1);

    json spec;
    data_source_to_spec(src, spec);
    spec["model"] = model_config_to_json(mc);
    spec["cls_train"] = train_config_to_json(cls_tc);
    spec["reg_train"] = train_config_to_json(reg_tc);
    spec["seeds"] = seeds;
    spec["jobs"] = jobs;
    Run run("probe", spec, out_root);

    const GeneratedDataset gd = materialize(src, run);
    const std::vector<ProbeRow> rows = probe_suite(gd.train, gd.test, mc, cls_tc, reg_tc, seeds, jobs);
    run.emit("probe.csv", probe_csv(rows));

    json summary;
    summary["schema"] = "geoaux.probe_summary.v1";
    summary["rows"] = json::array();
    for (const char* variant : {"scratch", "frozen", "geossl"}) {
        std::vector<double> cs;
        for (const ProbeRow& r : rows)
            if (r.variant == variant) cs.push_back(r.cosine_similarity);
        const auto [m, s] = mean_std(cs);
        summary["rows"].push_back({{"variant", variant},
                                   {"cosine_similarity_mean", m},
                                   {"cosine_similarity_std", s},
                                   {"seeds", cs.size()}});
    }
    run.emit("summary.json", summary.dump(2) + "\n");
    run.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-cloud learning with geometric-property regression"};
    app.require_subcommand(1);

    std::string config_path, out_root;
    // Flag overrides live per subcommand; the spec file fills the rest.
    struct Flags {
        std::optional<double> lambda, sigma, jitter_train;
        std::optional<std::uint64_t> seed, dataset_seed;
        std::optional<int> epochs, jobs, k, pca_k, points, train_per_class, test_per_class, index;
        std::optional<std::string> task, supervision, objective, input, checkpoint, data_dir, split;
    } flags;

    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const char* name :
         {"gen", "props", "train", "eval", "sweep-lambda", "ablate-props", "noise", "probe"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "spec JSON, or a manifest.json to rerun");
        sub->add_option("--out-root", out_root,
                        "output root (default: $GEOAUX_OUT, then ./runs)");
        subs.emplace_back(name, sub);
    }
    auto sub = [&](const std::string& name) -> CLI::App* {
        for (auto& [n, s] : subs)
            if (n == name) return s;
        return nullptr;
    };

    // dataset knobs
    for (const char* name : {"gen", "train", "eval", "sweep-lambda", "ablate-props", "noise", "probe"}) {
        CLI::App* s = sub(name);
        s->add_option("--dataset-seed", flags.dataset_seed, "dataset generation seed");
        s->add_option("--points", flags.points, "points per cloud");
        s->add_option("--train-per-class", flags.train_per_class, "training clouds per class");
        s->add_option("--test-per-class", flags.test_per_class, "test clouds per class");
        s->add_option("--jitter-train", flags.jitter_train, "train-split jitter sigma");
    }
    // training knobs
    for (const char* name : {"train", "sweep-lambda", "ablate-props", "noise"}) {
        CLI::App* s = sub(name);
        s->add_option("--seed", flags.seed, "training seed");
        s->add_option("--epochs", flags.epochs, "training epochs");
        s->add_option("--supervision", flags.supervision, "none | geossl | geopl");
        s->add_option("--objective", flags.objective, "joint | regression");
    }
    sub("train")->add_option("--lambda", flags.lambda, "regression loss weight");
    // model knobs
    for (const char* name : {"train", "eval", "sweep-lambda", "ablate-props", "probe"})
        sub(name)->add_option("--task", flags.task, "classification | segmentation");
    // misc
    for (const char* name : {"sweep-lambda", "ablate-props", "probe"})
        sub(name)->add_option("--jobs", flags.jobs, "parallel cells (default 1)");
    sub("props")->add_option("--input", flags.input, "cloud file: .xyz, .off, or dataset .json");
    sub("props")->add_option("--k", flags.k, "neighborhood size");
    sub("props")->add_option("--index", flags.index, "cloud index for dataset .json inputs");
    sub("noise")->add_option("--sigma", flags.sigma, "noise standard deviation");
    sub("noise")->add_option("--pca-k", flags.pca_k, "neighborhood size for the PCA baseline");
    for (const char* name : {"eval", "noise"})
        sub(name)->add_option("--checkpoint", flags.checkpoint, "parameter checkpoint to load");
    for (const char* name : {"train", "eval", "sweep-lambda", "ablate-props", "noise", "probe"})
        sub(name)->add_option("--data-dir", flags.data_dir, "gen run dir with train/test.json");
    sub("eval")->add_option("--split", flags.split, "train | test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().at(0)->get_name();
    try {
        json cfg = json::object();
        if (!config_path.empty()) cfg = unwrap_config(read_json_file(config_path), command);
        if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");

        // flags override the config file
        auto patch = [&cfg](const char* section, const char* key, const auto& opt) {
            if (opt) cfg[section][key] = *opt;
        };
        patch("dataset", "seed", flags.dataset_seed);
        patch("dataset", "points_per_cloud", flags.points);
        patch("dataset", "train_per_class", flags.train_per_class);
        patch("dataset", "test_per_class", flags.test_per_class);
        patch("dataset", "jitter_train", flags.jitter_train);
        patch("train", "seed", flags.seed);
        patch("train", "epochs", flags.epochs);
        patch("train", "lambda", flags.lambda);
        patch("train", "supervision", flags.supervision);
        patch("train", "objective", flags.objective);
        patch("model", "task", flags.task);
        auto top = [&cfg](const char* key, const auto& opt) {
            if (opt) cfg[key] = *opt;
        };
        top("jobs", flags.jobs);
        top("input", flags.input);
        top("k", flags.k);
        top("index", flags.index);
        top("sigma", flags.sigma);
        top("pca_k", flags.pca_k);
        top("checkpoint", flags.checkpoint);
        top("data_dir", flags.data_dir);
        top("split", flags.split);

        const std::string root = resolve_out_root(out_root);
        if (command == "gen") cmd_gen(cfg, root);
        else if (command == "props") cmd_props(cfg, root);
        else if (command == "train") cmd_train(cfg, root);
        else if (command == "eval") cmd_eval(cfg, root);
        else if (command == "sweep-lambda") cmd_sweep_lambda(cfg, root);
        else if (command == "ablate-props") cmd_ablate_props(cfg, root);
        else if (command == "noise") cmd_noise(cfg, root);
        else if (command == "probe") cmd_probe(cfg, root);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"command", command}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
