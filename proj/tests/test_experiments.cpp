#include <doctest.h>

#include <set>
#include <sstream>

#include "geoaux/experiments.hpp"

using namespace geoaux;

namespace {

struct TinySetup {
    GeneratedDataset data;
    ModelConfig mc;
    TrainConfig tc;
};

TinySetup tiny_setup() {
    TinySetup s;
    DatasetSpec ds;
    ds.train_per_class = 1;
    ds.test_per_class = 1;
    ds.points_per_cloud = 64;
    ds.dense_points = 256;
    ds.geossl_k = 10;
    ds.dense_k = 16;
    ds.seed = 7;
    s.data = gen_dataset(ds);
    s.mc.k_graph = 8;
    s.mc.edge_channels = {8, 8};
    s.mc.embed_dim = 16;
    s.mc.cls_hidden = {8};
    s.mc.seg_hidden = {8};
    s.mc.reg_hidden = {8};
    s.tc.epochs = 1;
    s.tc.batch_size = 4;
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("spec json round trips, rejects unknown keys, starts from defaults") {
    DatasetSpec ds;
    ds.train_per_class = 3;
    ds.geopl_source = "dense";
    ds.seed = 42;
    const DatasetSpec ds2 = dataset_spec_from_json(dataset_spec_to_json(ds));
    CHECK(ds2.train_per_class == 3);
    CHECK(ds2.geopl_source == "dense");
    CHECK(ds2.seed == 42);
    CHECK(dataset_spec_to_json(ds2).dump() == dataset_spec_to_json(ds).dump());
    // partial json only overrides what it names
    const DatasetSpec ds3 = dataset_spec_from_json({{"points_per_cloud", 128}});
    CHECK(ds3.points_per_cloud == 128);
    CHECK(ds3.train_per_class == DatasetSpec{}.train_per_class);
    CHECK_THROWS(dataset_spec_from_json({{"points", 128}}));

    ModelConfig mc;
    mc.edge_channels = {16, 24};
    mc.task = "segmentation";
    mc.input_props = "both";
    const ModelConfig mc2 = model_config_from_json(model_config_to_json(mc));
    CHECK(mc2.edge_channels == std::vector<int>{16, 24});
    CHECK(mc2.task == "segmentation");
    CHECK(mc2.input_props == "both");
    CHECK(model_config_to_json(mc2).dump() == model_config_to_json(mc).dump());
    CHECK_THROWS(model_config_from_json({{"k", 10}}));

    TrainConfig tc;
    tc.lambda = 0.5;
    tc.supervision = "geopl";
    tc.freeze_shared = true;
    tc.objective = "regression";
    const TrainConfig tc2 = train_config_from_json(train_config_to_json(tc));
    CHECK(tc2.lambda == 0.5);
    CHECK(tc2.supervision == "geopl");
    CHECK(tc2.freeze_shared);
    CHECK(tc2.objective == "regression");
    CHECK(train_config_to_json(tc2).dump() == train_config_to_json(tc).dump());
    CHECK_THROWS(train_config_from_json({{"learning_rate", 0.1}}));
}

TEST_CASE("spec hash is short, stable, and input-sensitive") {
    const nlohmann::json a = {{"x", 1}, {"y", "z"}};
    const std::string h = spec_hash(a);
    CHECK(h.size() == 12);
    for (char c : h) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
    CHECK(spec_hash(a) == h);
    CHECK(spec_hash({{"x", 2}, {"y", "z"}}) != h);
    // key order in the source object does not matter
    CHECK(spec_hash({{"y", "z"}, {"x", 1}}) == h);
}

TEST_CASE("lambda sweep covers the grid and is parallel-safe") {
    const TinySetup s = tiny_setup();
    const std::vector<double> lambdas = {0.0, 0.1};
    const std::vector<std::uint64_t> seeds = {1, 2};
    const auto cells = sweep_lambda(s.data.train, s.data.test, s.mc, s.tc, lambdas, seeds, 1);
    REQUIRE(cells.size() == 4);
    // row-major over (lambda, seed)
    CHECK(cells[0].lambda == 0.0);
    CHECK(cells[0].seed == 1);
    CHECK(cells[1].lambda == 0.0);
    CHECK(cells[1].seed == 2);
    CHECK(cells[3].lambda == 0.1);
    CHECK(cells[3].seed == 2);
    for (const SweepCell& c : cells) {
        CHECK(c.oa >= 0.0);
        CHECK(c.oa <= 1.0);
        CHECK(c.ma >= 0.0);
        CHECK(c.ma <= 1.0);
    }

    // a second worker thread must not change any result
    const auto cells2 = sweep_lambda(s.data.train, s.data.test, s.mc, s.tc, lambdas, seeds, 2);
    REQUIRE(cells2.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells2[i].lambda == cells[i].lambda);
        CHECK(cells2[i].seed == cells[i].seed);
        CHECK(cells2[i].oa == cells[i].oa);
        CHECK(cells2[i].ma == cells[i].ma);
    }

    const auto lines = lines_of(sweep_csv(cells));
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "lambda,seed,oa,ma");
    CHECK(lines[1].substr(0, 2) == "0,");

    // an error inside a cell surfaces to the caller
    ModelConfig bad = s.mc;
    bad.k_graph = 64;  // clouds have only 64 points: kNN needs n > k
    CHECK_THROWS(sweep_lambda(s.data.train, s.data.test, bad, s.tc, lambdas, seeds, 2));
}

TEST_CASE("property ablation produces the full 8-cell grid") {
    const TinySetup s = tiny_setup();
    const std::vector<std::uint64_t> seeds = {3};
    const auto cells = ablate_properties(s.data.train, s.data.test, s.mc, s.tc, seeds, 1);
    REQUIRE(cells.size() == 8);
    std::set<std::pair<std::string, std::string>> combos;
    for (const AblateCell& c : cells) {
        combos.insert({c.mode, c.variant});
        CHECK(c.seed == 3);
        CHECK(c.oa >= 0.0);
        CHECK(c.oa <= 1.0);
    }
    REQUIRE(combos.size() == 8);
    for (const char* mode : {"input", "supervision"})
        for (const char* variant : {"P", "P+n", "P+u", "P+n+u"})
            CHECK(combos.count({mode, variant}) == 1);

    // "P" is the property-free baseline, so it matches across modes exactly
    double base_input = -1.0, base_sup = -2.0;
    for (const AblateCell& c : cells)
        if (c.variant == "P") (c.mode == "input" ? base_input : base_sup) = c.oa;
    CHECK(base_input == base_sup);

    const auto lines = lines_of(ablate_csv(cells));
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] == "variant,mode,seed,oa");
}

TEST_CASE("probe suite compares the three backbone variants") {
    const TinySetup s = tiny_setup();
    TrainConfig reg_base = s.tc;
    reg_base.objective = "regression";
    reg_base.supervision = "geopl";
    const std::vector<std::uint64_t> seeds = {1, 2};
    const auto rows = probe_suite(s.data.train, s.data.test, s.mc, s.tc, reg_base, seeds, 1);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(rows[3 * i + 0].variant == "scratch");
        CHECK(rows[3 * i + 1].variant == "frozen");
        CHECK(rows[3 * i + 2].variant == "geossl");
        for (int v = 0; v < 3; ++v) {
            CHECK(rows[3 * i + v].seed == seeds[i]);
            CHECK(rows[3 * i + v].cosine_similarity >= -1.0);
            CHECK(rows[3 * i + v].cosine_similarity <= 1.0);
        }
    }
    const auto lines = lines_of(probe_csv(rows));
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "variant,seed,cosine_similarity");
}

TEST_CASE("noise robustness report has the documented shape") {
    const TinySetup s = tiny_setup();
    TrainConfig tc = s.tc;
    tc.objective = "regression";
    tc.supervision = "geopl";
    tc.epochs = 2;
    const TrainResult r = train(s.data.train, s.mc, tc);

    const NoiseReport rep = noise_robustness(s.data.test, r.params, s.mc, 0.01, 10, 5);
    CHECK(rep.sigma == 0.01);
    CHECK(rep.points == 5 * 64);
    REQUIRE(rep.pca_angle_bins.size() == 31);
    REQUIRE(rep.learned_angle_bins.size() == 31);
    long pca_total = 0, learned_total = 0;
    for (long b : rep.pca_angle_bins) {
        CHECK(b >= 0);
        pca_total += b;
    }
    for (long b : rep.learned_angle_bins) learned_total += b;
    CHECK(pca_total == rep.points);
    CHECK(learned_total == rep.points);
    for (double v : {rep.pca_vs_analytic, rep.pca_vs_geossl, rep.learned_vs_analytic,
                     rep.learned_vs_geossl}) {
        CHECK(v >= 0.0);
        CHECK(v <= 2.0);  // cosine distance range
    }

    const nlohmann::json j = nlohmann::json::parse(rep.to_json());
    CHECK(j.at("schema") == "geoaux.noise.v1");
    CHECK(j.at("sigma") == 0.01);
    CHECK(j.at("points") == rep.points);
    CHECK(j.at("cosine_distance").at("pca_vs_analytic") == rep.pca_vs_analytic);
    CHECK(j.at("cosine_distance").at("learned_vs_geossl") == rep.learned_vs_geossl);
    CHECK(j.at("angle_histogram").at("pca").size() == 31);
    CHECK(j.at("angle_histogram").at("learned").size() == 31);
    CHECK(j.at("angle_histogram").at("bin_edges_deg").size() == 31);
    CHECK(j.at("angle_histogram").at("last_bin_is_overflow") == true);

    // same seed reproduces the perturbation, different seed does not
    const NoiseReport rep2 = noise_robustness(s.data.test, r.params, s.mc, 0.01, 10, 5);
    CHECK(rep2.pca_vs_analytic == rep.pca_vs_analytic);
    const NoiseReport rep3 = noise_robustness(s.data.test, r.params, s.mc, 0.01, 10, 6);
    CHECK(rep3.pca_vs_analytic != rep.pca_vs_analytic);

    // sigma zero keeps the stored points; with pca_k equal to the dataset's
    // geossl_k the re-estimate reproduces the stored labels
    const NoiseReport clean = noise_robustness(s.data.test, r.params, s.mc, 0.0, 10, 5);
    CHECK(std::abs(clean.pca_vs_geossl) <= 1e-12);
    CHECK(clean.pca_vs_geossl < clean.learned_vs_geossl);
}

TEST_CASE("mean_of") {
    CHECK(mean_of({1.0, 2.0, 6.0}) == 3.0);
    CHECK_THROWS(mean_of({}));
}
