#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "geoaux/model.hpp"
#include "geoaux/rng.hpp"
#include "geoaux/tape.hpp"
#include "oracles.hpp"

using namespace geoaux;

namespace {

Array random_array(int r, int c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    SplitRng rng(seed);
    Array a(r, c);
    for (double& x : a.data) x = rng.uniform(lo, hi);
    return a;
}

// uniform values bounded away from zero, for kink-free relu/max checks
Array random_array_off_zero(int r, int c, std::uint64_t seed) {
    SplitRng rng(seed);
    Array a(r, c);
    for (double& x : a.data) {
        x = rng.uniform(0.05, 1.0);
        if (rng.next_below(2)) x = -x;
    }
    return a;
}

// Checks d loss / d inputs[i] for every element against central differences.
// build() must register each input as a param (in order) and return the
// scalar loss id.
void fd_check(std::vector<Array> inputs,
              const std::function<Id(Tape&, const std::vector<Id>&)>& build,
              double tol = 1e-4) {
    Tape tape;
    std::vector<Id> ids;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        ids.push_back(tape.param(inputs[i], "p" + std::to_string(i)));
    const Id loss = build(tape, ids);
    tape.backward(loss);

    auto loss_at = [&](const std::vector<Array>& xs) {
        Tape t;
        std::vector<Id> tids;
        for (std::size_t i = 0; i < xs.size(); ++i)
            tids.push_back(t.param(xs[i], "p" + std::to_string(i)));
        return t.value(build(t, tids)).item();
    };

    const double h = 1e-5;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        REQUIRE(tape.has_grad(ids[i]));
        const Array& g = tape.grad(ids[i]);
        for (std::size_t e = 0; e < inputs[i].data.size(); ++e) {
            std::vector<Array> xs = inputs;
            xs[i].data[e] += h;
            const double up = loss_at(xs);
            xs[i].data[e] -= 2 * h;
            const double dn = loss_at(xs);
            const double fd = (up - dn) / (2 * h);
            CHECK(oracle::rel_err(g.data[e], fd) < tol);
        }
    }
}

}  // namespace

TEST_CASE("matmul forward matches the naive triple loop") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Array a = random_array(4, 6, seed);
        Array b = random_array(6, 5, seed + 100);
        // exercise the zero-skip path
        a.at(0, 0) = 0.0;
        a.at(2, 3) = 0.0;
        b.at(1, 1) = 0.0;
        Tape tape;
        const Id out = tape.matmul(tape.input(a), tape.input(b));
        const Array want = oracle::matmul_naive(a, b);
        for (std::size_t e = 0; e < want.data.size(); ++e)
            CHECK(std::abs(tape.value(out).data[e] - want.data[e]) <= 1e-12);
    }
}

TEST_CASE("matmul gradients") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(3, 4, seed), random_array(4, 2, seed + 50),
                  random_array(3, 2, seed + 90)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.matmul(p[0], p[1]), p[2]);
                 });
}

TEST_CASE("add_bias forward and gradients") {
    Array x = random_array(3, 4, 1);
    Array b = random_array(1, 4, 2);
    Tape tape;
    const Id out = tape.add_bias(tape.input(x), tape.input(b));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(tape.value(out).at(i, j) == x.at(i, j) + b.at(0, j));

    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(3, 4, seed), random_array(1, 4, seed + 30),
                  random_array(3, 4, seed + 60)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.add_bias(p[0], p[1]), p[2]);
                 });
}

TEST_CASE("edge_features forward is [center, neighbor - center]") {
    Array x = random_array(4, 3, 9);
    const std::vector<int> centers = {0, 0, 2, 3};
    const std::vector<int> neighbors = {1, 3, 1, 3};  // one self edge
    Tape tape;
    const Id out = tape.edge_features(tape.input(x), centers, neighbors);
    const Array& v = tape.value(out);
    REQUIRE(v.rows == 4);
    REQUIRE(v.cols == 6);
    for (int r = 0; r < 4; ++r)
        for (int j = 0; j < 3; ++j) {
            CHECK(v.at(r, j) == x.at(centers[r], j));
            CHECK(v.at(r, 3 + j) == x.at(neighbors[r], j) - x.at(centers[r], j));
        }
}

TEST_CASE("edge_features gradients, including self edges") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(5, 3, seed), random_array(6, 6, seed + 40)},
                 [](Tape& t, const std::vector<Id>& p) {
                     // repeated centers and a self edge stress accumulation
                     return t.mse_rows(
                         t.edge_features(p[0], {0, 0, 1, 2, 4, 4}, {1, 2, 1, 0, 3, 4}), p[1]);
                 });
}

TEST_CASE("relu forward and gradients") {
    Tape tape;
    const Id out = tape.relu(tape.input(Array(1, 4, {-2.0, 0.0, 0.5, 3.0})));
    CHECK(tape.value(out).data == std::vector<double>{0.0, 0.0, 0.5, 3.0});

    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array_off_zero(3, 4, seed), random_array(3, 4, seed + 70)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.relu(p[0]), p[1]);
                 });
}

TEST_CASE("concat, slice, gather forwards and gradients") {
    Array a = random_array(3, 2, 1);
    Array b = random_array(3, 3, 2);
    Tape tape;
    const Id cat = tape.concat_cols(tape.input(a), tape.input(b));
    CHECK(tape.value(cat).shape_str() == "(3, 5)");
    CHECK(tape.value(cat).at(1, 0) == a.at(1, 0));
    CHECK(tape.value(cat).at(1, 3) == b.at(1, 1));
    const Id back = tape.slice_cols(cat, 2, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(tape.value(back).at(i, j) == b.at(i, j));
    const Id picked = tape.gather_rows(cat, {2, 0, 2});
    CHECK(tape.value(picked).at(0, 0) == tape.value(cat).at(2, 0));
    CHECK(tape.value(picked).at(1, 0) == tape.value(cat).at(0, 0));

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        fd_check({random_array(3, 2, seed), random_array(3, 3, seed + 10),
                  random_array(3, 5, seed + 20)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.concat_cols(p[0], p[1]), p[2]);
                 });
        fd_check({random_array(4, 5, seed), random_array(4, 2, seed + 30)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.slice_cols(p[0], 1, 3), p[1]);
                 });
        // repeated gather indices accumulate gradient
        fd_check({random_array(4, 3, seed), random_array(5, 3, seed + 40)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.gather_rows(p[0], {0, 0, 3, 2, 0}), p[1]);
                 });
    }
}

TEST_CASE("group_max_rows forward, ties to the earliest row") {
    Tape tape;
    // two groups of three rows, one column; second group has a tie
    const Id x = tape.param(Array(6, 1, {1.0, 5.0, 2.0, 7.0, 7.0, 3.0}), "x");
    const Id out = tape.group_max_rows(x, 3);
    CHECK(tape.value(out).rows == 2);
    CHECK(tape.value(out).at(0, 0) == 5.0);
    CHECK(tape.value(out).at(1, 0) == 7.0);
    const Id loss = tape.mse_rows(out, tape.input(Array::zeros(2, 1)));
    tape.backward(loss);
    const Array& g = tape.grad(x);
    CHECK(g.at(1, 0) != 0.0);
    CHECK(g.at(3, 0) != 0.0);  // earliest of the tied rows
    CHECK(g.at(4, 0) == 0.0);
    CHECK(g.at(0, 0) == 0.0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(8, 3, seed), random_array(2, 3, seed + 80)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.group_max_rows(p[0], 4), p[1]);
                 });
}

TEST_CASE("max and mean over axes") {
    Array x(2, 3, {1.0, 9.0, 4.0, 7.0, 2.0, 4.0});
    Tape tape;
    const Id xi = tape.input(x);
    const Id m0 = tape.max_over_axis(xi, 0);
    CHECK(tape.value(m0).rows == 1);
    CHECK(tape.value(m0).data == std::vector<double>{7.0, 9.0, 4.0});
    const Id m1 = tape.max_over_axis(xi, 1);
    CHECK(tape.value(m1).cols == 1);
    CHECK(tape.value(m1).data == std::vector<double>{9.0, 7.0});
    const Id a0 = tape.mean_over_axis(xi, 0);
    CHECK(tape.value(a0).at(0, 0) == doctest::Approx(4.0));
    const Id a1 = tape.mean_over_axis(xi, 1);
    CHECK(tape.value(a1).at(0, 0) == doctest::Approx(14.0 / 3.0));

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        fd_check({random_array_off_zero(4, 3, seed), random_array(1, 3, seed + 11)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.max_over_axis(p[0], 0), p[1]);
                 });
        fd_check({random_array_off_zero(4, 3, seed), random_array(4, 1, seed + 12)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.max_over_axis(p[0], 1), p[1]);
                 });
        fd_check({random_array(4, 3, seed), random_array(1, 3, seed + 13)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.mean_over_axis(p[0], 0), p[1]);
                 });
        fd_check({random_array(4, 3, seed), random_array(4, 1, seed + 14)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(t.mean_over_axis(p[0], 1), p[1]);
                 });
    }
}

TEST_CASE("softmax cross entropy forward, stability, gradients") {
    // hand computation for a 2x3 batch
    Array logits(2, 3, {1.0, 2.0, 0.5, -1.0, 0.0, 3.0});
    const std::vector<int> labels = {1, 2};
    double want = 0.0;
    for (int i = 0; i < 2; ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < 3; ++j) mx = std::max(mx, logits.at(i, j));
        double z = 0.0;
        for (int j = 0; j < 3; ++j) z += std::exp(logits.at(i, j) - mx);
        want -= (logits.at(i, labels[i]) - mx) - std::log(z);
    }
    want /= 2.0;
    Tape tape;
    const Id loss = tape.softmax_cross_entropy(tape.input(logits), labels);
    CHECK(tape.value(loss).item() == doctest::Approx(want).epsilon(1e-12));

    // huge logits stay finite thanks to max subtraction
    Tape big;
    const Id bl = big.softmax_cross_entropy(
        big.input(Array(1, 3, {1000.0, 1001.0, 999.0})), {1});
    CHECK(std::isfinite(big.value(bl).item()));
    CHECK(big.value(bl).item() > 0.0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(3, 4, seed)}, [](Tape& t, const std::vector<Id>& p) {
            return t.softmax_cross_entropy(p[0], {2, 0, 3});
        });
}

TEST_CASE("mse_rows hand example with mask") {
    // two supervision rows [normal | u]; second row masked out
    Array pred(2, 4, {0.9, 0.1, 0.0, 0.2, 1.0, 0.0, 0.0, 0.9});
    Array target(2, 4, {1.0, 0.0, 0.0, 0.1, 0.0, 1.0, 0.0, 0.0});
    const double row0 = 0.1 * 0.1 + 0.1 * 0.1 + 0.0 + 0.1 * 0.1;
    Tape tape;
    const Id all = tape.mse_rows(tape.input(pred), tape.input(target));
    const double row1 = 1.0 + 1.0 + 0.0 + 0.81;
    CHECK(tape.value(all).item() == doctest::Approx((row0 + row1) / 2.0).epsilon(1e-12));

    const Id masked = tape.mse_rows(tape.input(pred), tape.input(target), {1.0, 0.0});
    CHECK(tape.value(masked).item() == doctest::Approx(row0).epsilon(1e-12));

    // nothing active -> exactly zero
    const Id none = tape.mse_rows(tape.input(pred), tape.input(target), {0.0, 0.0});
    CHECK(tape.value(none).item() == 0.0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(4, 3, seed), random_array(4, 3, seed + 21)},
                 [](Tape& t, const std::vector<Id>& p) {
                     return t.mse_rows(p[0], p[1], {1.0, 0.0, 1.0, 1.0});
                 });
}

TEST_CASE("add, sub, scale gradients") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        fd_check({random_array(3, 3, seed), random_array(3, 3, seed + 31),
                  random_array(3, 3, seed + 32)},
                 [](Tape& t, const std::vector<Id>& p) {
                     const Id s = t.scale(t.sub(t.add(p[0], p[1]), p[2]), 1.7);
                     return t.mse_rows(s, t.input(Array::zeros(3, 3)));
                 });
}

TEST_CASE("tape error paths") {
    Tape tape;
    const Id a = tape.input(random_array(2, 3, 1));
    const Id b = tape.input(random_array(4, 2, 2));
    // shape errors name both shapes
    try {
        tape.matmul(a, b);
        FAIL("expected shape error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(2, 3)") != std::string::npos);
        CHECK(msg.find("(4, 2)") != std::string::npos);
    }
    CHECK_THROWS_AS(tape.add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(tape.add_bias(a, tape.input(Array::zeros(1, 2))), std::invalid_argument);
    CHECK_THROWS_AS(tape.concat_cols(a, b), std::invalid_argument);
    CHECK_THROWS_AS(tape.gather_rows(a, {0, 5}), std::out_of_range);
    CHECK_THROWS_AS(tape.group_max_rows(a, 4), std::invalid_argument);
    CHECK_THROWS_AS(tape.slice_cols(a, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(tape.max_over_axis(a, 2), std::invalid_argument);
    CHECK_THROWS_AS(tape.softmax_cross_entropy(a, {0}), std::invalid_argument);
    CHECK_THROWS_AS(tape.softmax_cross_entropy(a, {0, 7}), std::out_of_range);

    // backward wants a scalar
    CHECK_THROWS_AS(tape.backward(a), std::invalid_argument);

    // non-finite values trip the checked mode
    Tape strict;
    strict.check_finite = true;
    Array bad(1, 2, {1.0, std::nan("")});
    CHECK_THROWS(strict.input(bad));
}

TEST_CASE("gradients flow only toward params and are cleared per backward") {
    Tape tape;
    const Id p = tape.param(random_array(2, 2, 3), "p");
    const Id x = tape.input(random_array(2, 2, 4));
    const Id loss1 = tape.mse_rows(p, x);
    const Id loss2 = tape.mse_rows(tape.scale(p, 2.0), x);
    tape.backward(loss1);
    REQUIRE(tape.has_grad(p));
    const Array g1 = tape.grad(p);
    CHECK_FALSE(tape.has_grad(x));  // inputs get no gradient storage

    tape.backward(loss2);
    const Array& g2 = tape.grad(p);
    // fresh accumulation, not g1 + g2
    for (std::size_t e = 0; e < g1.data.size(); ++e) CHECK(g2.data[e] != g1.data[e]);
}

TEST_CASE("full tiny network gradient check") {
    ModelConfig mc;
    mc.k_graph = 4;
    mc.edge_channels = {6, 8};
    mc.embed_dim = 8;
    mc.cls_hidden = {8, 4};
    mc.seg_hidden = {8, 4};
    mc.reg_hidden = {8, 4};
    mc.dynamic_graph = false;  // keeps the loss smooth so FD is valid
    const int n = 16, classes = 3;

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ParamSet params = init_params(mc, classes, 4, seed);
        const Array input = random_array(n, 3, seed + 200);
        const std::vector<int> labels = {static_cast<int>(seed) % classes};
        GeomProps gt;
        SplitRng grng(seed + 300);
        for (int i = 0; i < n; ++i) {
            gt.normals.push_back(
                Vec3{grng.uniform(-1, 1), grng.uniform(-1, 1), grng.uniform(-1, 1)}.normalized());
            gt.curvature.push_back(grng.uniform(0, 1.0 / 3.0));
            gt.degenerate.push_back(i % 5 == 0 ? 1 : 0);  // mask must participate
        }

        auto loss_at = [&](const ParamSet& ps) {
            Tape t;
            std::map<std::string, Id> pids;
            for (const auto& [name, arr] : ps) pids[name] = t.param(arr, name);
            const TapeForward f = forward_on_tape(t, pids, mc, input, true, true);
            const LossIds l = joint_loss(t, f.task_logits, labels, f.geom, gt, 0.7);
            return t.value(l.total).item();
        };

        Tape tape;
        std::map<std::string, Id> pids;
        for (const auto& [name, arr] : params) pids[name] = tape.param(arr, name);
        const TapeForward f = forward_on_tape(tape, pids, mc, input, true, true);
        const LossIds l = joint_loss(tape, f.task_logits, labels, f.geom, gt, 0.7);
        tape.backward(l.total);

        const double h = 1e-5;
        for (const auto& [name, arr] : params) {
            REQUIRE(tape.has_grad(pids.at(name)));
            const Array& g = tape.grad(pids.at(name));
            for (std::size_t e = 0; e < arr.data.size(); ++e) {
                ParamSet mod = params;
                mod.at(name).data[e] += h;
                const double up = loss_at(mod);
                mod.at(name).data[e] -= 2 * h;
                const double dn = loss_at(mod);
                const double fd = (up - dn) / (2 * h);
                CHECK(oracle::rel_err(g.data[e], fd) < 1e-4);
            }
        }
    }
}

TEST_CASE("joint loss collapses to the task loss at lambda zero") {
    ModelConfig mc;
    mc.k_graph = 3;
    mc.edge_channels = {4};
    mc.embed_dim = 4;
    mc.cls_hidden = {4};
    mc.seg_hidden = {4};
    mc.reg_hidden = {4};
    const ParamSet params = init_params(mc, 2, 2, 5);
    const Array input = random_array(8, 3, 6);
    GeomProps gt;
    for (int i = 0; i < 8; ++i) {
        gt.normals.push_back({0, 0, 1});
        gt.curvature.push_back(0.1);
        gt.degenerate.push_back(0);
    }

    Tape tape;
    std::map<std::string, Id> pids;
    for (const auto& [name, arr] : params) pids[name] = tape.param(arr, name);
    const TapeForward f = forward_on_tape(tape, pids, mc, input, true, true);
    const LossIds l = joint_loss(tape, f.task_logits, {1}, f.geom, gt, 0.0);
    CHECK(l.total == l.task);  // same node, not merely equal values
    CHECK(l.reg == -1);
}
