#include "geoaux/dataset_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace geoaux {

int Dataset::num_parts() const {
    int hi = -1;
    for (const auto& parts : category_parts)
        for (int p : parts) hi = std::max(hi, p);
    return hi + 1;
}

void Dataset::validate() const {
    if (split != "train" && split != "test")
        throw std::runtime_error("Dataset: split must be 'train' or 'test', got '" + split + "'");
    if (classes.empty()) throw std::runtime_error("Dataset: no classes");
    if (category_parts.size() != classes.size())
        throw std::runtime_error("Dataset: category_parts count does not match classes");
    if (points_per_cloud <= 0) throw std::runtime_error("Dataset: points_per_cloud must be positive");
    std::set<int> seen;
    for (const auto& parts : category_parts) {
        if (parts.empty()) throw std::runtime_error("Dataset: a class has no parts");
        for (int p : parts) {
            if (p < 0) throw std::runtime_error("Dataset: negative part id");
            if (!seen.insert(p).second)
                throw std::runtime_error("Dataset: part id " + std::to_string(p) +
                                         " assigned to two classes");
        }
    }
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        const CloudEntry& e = clouds[i];
        const std::string where = "Dataset: cloud " + std::to_string(i);
        e.cloud.validate();
        if (static_cast<int>(e.cloud.points.size()) != points_per_cloud)
            throw std::runtime_error(where + ": wrong point count");
        if (e.cloud.class_label < 0 || e.cloud.class_label >= num_classes())
            throw std::runtime_error(where + ": class label out of range");
        if (!e.cloud.has_part_labels()) throw std::runtime_error(where + ": missing part labels");
        const auto& parts = category_parts[static_cast<std::size_t>(e.cloud.class_label)];
        for (int p : e.cloud.part_labels)
            if (std::find(parts.begin(), parts.end(), p) == parts.end())
                throw std::runtime_error(where + ": part label " + std::to_string(p) +
                                         " outside its category");
        for (const GeomProps* g : {&e.geossl, &e.geopl}) {
            if (static_cast<int>(g->normals.size()) != points_per_cloud ||
                static_cast<int>(g->curvature.size()) != points_per_cloud ||
                static_cast<int>(g->degenerate.size()) != points_per_cloud)
                throw std::runtime_error(where + ": geometric label arrays mismatch point count");
        }
    }
}

namespace {

nlohmann::json props_to_json(const GeomProps& g) {
    nlohmann::json j;
    auto& normals = j["normals"] = nlohmann::json::array();
    for (const Vec3& n : g.normals) normals.push_back({n.x, n.y, n.z});
    j["curvature"] = g.curvature;
    auto& deg = j["degenerate"] = nlohmann::json::array();
    for (std::uint8_t d : g.degenerate) deg.push_back(d != 0);
    return j;
}

GeomProps props_from_json(const nlohmann::json& j) {
    GeomProps g;
    for (const auto& n : j.at("normals"))
        g.normals.push_back({n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()});
    g.curvature = j.at("curvature").get<std::vector<double>>();
    for (const auto& d : j.at("degenerate")) g.degenerate.push_back(d.get<bool>() ? 1 : 0);
    return g;
}

}  // namespace

nlohmann::json dataset_to_json(const Dataset& ds) {
    nlohmann::json j;
    j["schema"] = "geoaux.dataset.v1";
    j["split"] = ds.split;
    j["classes"] = ds.classes;
    j["category_parts"] = ds.category_parts;
    j["points_per_cloud"] = ds.points_per_cloud;
    j["seed"] = ds.seed;
    auto& clouds = j["clouds"] = nlohmann::json::array();
    for (const CloudEntry& e : ds.clouds) {
        nlohmann::json c;
        c["class"] = e.cloud.class_label;
        c["seed"] = e.seed;
        auto& pts = c["points"] = nlohmann::json::array();
        for (const Vec3& p : e.cloud.points) pts.push_back({p.x, p.y, p.z});
        c["part_labels"] = e.cloud.part_labels;
        c["geossl"] = props_to_json(e.geossl);
        c["geopl"] = props_to_json(e.geopl);
        clouds.push_back(std::move(c));
    }
    return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "geoaux.dataset.v1")
        throw std::runtime_error("dataset_from_json: unknown schema");
    Dataset ds;
    ds.split = j.at("split").get<std::string>();
    ds.classes = j.at("classes").get<std::vector<std::string>>();
    ds.category_parts = j.at("category_parts").get<std::vector<std::vector<int>>>();
    ds.points_per_cloud = j.at("points_per_cloud").get<int>();
    ds.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& c : j.at("clouds")) {
        CloudEntry e;
        e.cloud.class_label = c.at("class").get<int>();
        e.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& p : c.at("points"))
            e.cloud.points.push_back(
                {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
        e.cloud.part_labels = c.at("part_labels").get<std::vector<int>>();
        e.geossl = props_from_json(c.at("geossl"));
        e.geopl = props_from_json(c.at("geopl"));
        ds.clouds.push_back(std::move(e));
    }
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_dataset: cannot open " + path);
    f << dataset_to_json(ds).dump() << "\n";
    if (!f) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_dataset: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_dataset: " + path + ": " + e.what());
    }
    return dataset_from_json(j);
}

// SHA-256, FIPS 180-4.
namespace {

constexpr std::array<std::uint32_t, 64> kK = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::array<unsigned char, 64> block{};
    std::size_t block_len = 0;
    std::uint64_t total = 0;

    void compress() {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + kK[static_cast<std::size_t>(i)] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(const unsigned char* p, std::size_t len) {
        total += len;
        while (len > 0) {
            const std::size_t take = std::min(len, block.size() - block_len);
            std::memcpy(block.data() + block_len, p, take);
            block_len += take;
            p += take;
            len -= take;
            if (block_len == block.size()) {
                compress();
                block_len = 0;
            }
        }
    }

    std::string finish() {
        const std::uint64_t bits = total * 8;
        const unsigned char one = 0x80;
        update(&one, 1);
        const unsigned char zero = 0x00;
        while (block_len != 56) update(&zero, 1);
        unsigned char len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len_be, 8);
        std::string hex;
        hex.reserve(64);
        static const char* digits = "0123456789abcdef";
        for (std::uint32_t v : h)
            for (int i = 28; i >= 0; i -= 4) hex.push_back(digits[(v >> i) & 0xf]);
        return hex;
    }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t len) {
    Sha256 s;
    s.update(static_cast<const unsigned char*>(data), len);
    return s.finish();
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("sha256_file: cannot open " + path);
    Sha256 s;
    std::vector<char> buf(1 << 16);
    while (f) {
        f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        s.update(reinterpret_cast<const unsigned char*>(buf.data()),
                 static_cast<std::size_t>(f.gcount()));
    }
    return s.finish();
}

}  // namespace geoaux
