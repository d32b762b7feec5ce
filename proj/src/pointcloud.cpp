#include "geoaux/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "geoaux/rng.hpp"

namespace geoaux {

void PointCloud::validate() const {
    if (points.empty()) throw std::invalid_argument("PointCloud: no points");
    if (!part_labels.empty() && part_labels.size() != points.size())
        throw std::invalid_argument("PointCloud: part_labels length " +
                                    std::to_string(part_labels.size()) + " != point count " +
                                    std::to_string(points.size()));
    for (const Vec3& p : points)
        if (!p.finite()) throw std::invalid_argument("PointCloud: non-finite coordinate");
}

double TriMesh::face_area(std::size_t f) const {
    const auto& fc = faces[f];
    Vec3 e1 = vertices[fc[1]] - vertices[fc[0]];
    Vec3 e2 = vertices[fc[2]] - vertices[fc[0]];
    return 0.5 * e1.cross(e2).norm();
}

namespace {

// Line-tracking tokenizer so parse errors can name their line.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    bool next_token(std::string& tok) {
        while (true) {
            if (pos_ >= line_.size()) {
                if (!std::getline(in_, line_)) return false;
                ++line_no_;
                pos_ = 0;
                continue;
            }
            while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ >= line_.size()) continue;
            if (line_[pos_] == '#') {  // comment runs to end of line
                pos_ = line_.size();
                continue;
            }
            std::size_t start = pos_;
            while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            tok = line_.substr(start, pos_ - start);
            return true;
        }
    }

    long require_long(const char* what) {
        std::string tok;
        if (!next_token(tok)) fail(std::string("unexpected end of file, expected ") + what);
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) fail("non-numeric token '" + tok + "' for " + what);
        return v;
    }

    double require_double(const char* what) {
        std::string tok;
        if (!next_token(tok)) fail(std::string("unexpected end of file, expected ") + what);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) fail("non-numeric token '" + tok + "' for " + what);
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    std::string line_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
};

}  // namespace

TriMesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    TokenReader tr(in);

    std::string magic;
    if (!tr.next_token(magic) || magic != "OFF") tr.fail("missing OFF header");

    long nv = tr.require_long("vertex count");
    long nf = tr.require_long("face count");
    tr.require_long("edge count");
    if (nv < 0 || nf < 0) tr.fail("negative count in header");

    TriMesh mesh;
    mesh.vertices.resize(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        double x = tr.require_double("x"), y = tr.require_double("y"), z = tr.require_double("z");
        mesh.vertices[static_cast<std::size_t>(i)] = {x, y, z};
    }
    for (long f = 0; f < nf; ++f) {
        long cnt = tr.require_long("face vertex count");
        if (cnt < 3) tr.fail("face with fewer than 3 vertices");
        std::vector<int> idx(static_cast<std::size_t>(cnt));
        for (long j = 0; j < cnt; ++j) {
            long v = tr.require_long("vertex index");
            if (v < 0 || v >= nv)
                tr.fail("vertex index " + std::to_string(v) + " out of range [0, " +
                        std::to_string(nv) + ")");
            idx[static_cast<std::size_t>(j)] = static_cast<int>(v);
        }
        for (std::size_t j = 1; j + 1 < idx.size(); ++j)
            mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
    }
    return mesh;
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    PointCloud cloud;
    std::string line;
    int line_no = 0;
    bool any_label = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        double x, y, z;
        if (!(ss >> x)) continue;  // blank line
        if (!(ss >> y >> z))
            throw ParseError("line " + std::to_string(line_no) + ": expected 'x y z [label]'");
        cloud.points.push_back({x, y, z});
        long label;
        if (ss >> label) {
            any_label = true;
            cloud.part_labels.resize(cloud.points.size() - 1, 0);
            cloud.part_labels.push_back(static_cast<int>(label));
        } else if (any_label) {
            throw ParseError("line " + std::to_string(line_no) + ": missing part label");
        }
    }
    cloud.validate();
    return cloud;
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    char buf[128];
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x, p.y, p.z);
        out << buf;
        if (cloud.has_part_labels()) out << ' ' << cloud.part_labels[i];
        out << '\n';
    }
}

std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int n, int start) {
    const int m = static_cast<int>(points.size());
    if (n < 1 || n > m)
        throw std::invalid_argument("farthest_point_sample: n=" + std::to_string(n) +
                                    " out of range [1, " + std::to_string(m) + "]");
    if (start < 0 || start >= m)
        throw std::invalid_argument("farthest_point_sample: start index out of range");

    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(n));
    selected.push_back(start);
    std::vector<double> min_d2(points.size(), std::numeric_limits<double>::infinity());
    for (int t = 1; t < n; ++t) {
        const Vec3& last = points[static_cast<std::size_t>(selected.back())];
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < m; ++i) {
            double d2 = dist2(points[static_cast<std::size_t>(i)], last);
            if (d2 < min_d2[static_cast<std::size_t>(i)]) min_d2[static_cast<std::size_t>(i)] = d2;
            // strict > keeps the smallest index on ties
            if (min_d2[static_cast<std::size_t>(i)] > best_d2) {
                best_d2 = min_d2[static_cast<std::size_t>(i)];
                best = i;
            }
        }
        selected.push_back(best);
    }
    return selected;
}

PointCloud sample_surface(const TriMesh& mesh, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");

    std::vector<std::size_t> live;
    std::vector<double> cum;
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (mesh.face_degenerate(f)) continue;
        total += mesh.face_area(f);
        live.push_back(f);
        cum.push_back(total);
    }
    if (live.empty()) throw std::runtime_error("sample_surface: all faces degenerate");

    SplitRng rng = SplitRng(seed).split(0x5a6d);
    const int oversample = 4 * n;
    std::vector<Vec3> raw;
    raw.reserve(static_cast<std::size_t>(oversample));
    for (int s = 0; s < oversample; ++s) {
        double r = rng.uniform() * total;
        std::size_t pick = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
        if (pick >= live.size()) pick = live.size() - 1;
        const auto& fc = mesh.faces[live[pick]];
        // square-root trick gives a uniform barycentric sample
        double su = std::sqrt(rng.uniform());
        double v = rng.uniform();
        Vec3 p = mesh.vertices[fc[0]] * (1.0 - su) + mesh.vertices[fc[1]] * (su * (1.0 - v)) +
                 mesh.vertices[fc[2]] * (su * v);
        raw.push_back(p);
    }

    PointCloud cloud;
    if (n <= oversample) {
        std::vector<int> keep = farthest_point_sample(raw, n, 0);
        cloud.points.reserve(static_cast<std::size_t>(n));
        for (int i : keep) cloud.points.push_back(raw[static_cast<std::size_t>(i)]);
    } else {
        cloud.points = std::move(raw);
    }
    return cloud;
}

UnitSphereTransform unit_sphere_transform(const PointCloud& cloud) {
    cloud.validate();
    Vec3 c{0, 0, 0};
    for (const Vec3& p : cloud.points) c += p;
    c = c / static_cast<double>(cloud.points.size());
    double max2 = 0.0;
    for (const Vec3& p : cloud.points) max2 = std::max(max2, (p - c).norm2());
    double radius = std::sqrt(max2);
    if (radius <= 0.0)
        throw std::invalid_argument("normalize_unit_sphere: all points identical (zero radius)");
    return {c, radius};
}

PointCloud apply_transform(const UnitSphereTransform& t, const PointCloud& cloud) {
    PointCloud out = cloud;
    for (Vec3& p : out.points) p = (p - t.center) / t.radius;
    return out;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
    return apply_transform(unit_sphere_transform(cloud), cloud);
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: negative sigma");
    if (sigma == 0.0) return cloud;
    PointCloud out = cloud;
    SplitRng rng = SplitRng(seed).split(0x6e01);
    for (Vec3& p : out.points) {
        p.x += sigma * rng.normal();
        p.y += sigma * rng.normal();
        p.z += sigma * rng.normal();
    }
    return out;
}

}  // namespace geoaux
