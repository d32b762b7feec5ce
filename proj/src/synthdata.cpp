#include "geoaux/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoaux/rng.hpp"

namespace geoaux {

namespace {

constexpr double kTau = 6.28318530717958647692;

const char* class_name(ShapeClass c) {
    switch (c) {
        case ShapeClass::sphere: return "sphere";
        case ShapeClass::cube: return "cube";
        case ShapeClass::cylinder: return "cylinder";
        case ShapeClass::cone: return "cone";
        case ShapeClass::torus: return "torus";
    }
    throw std::invalid_argument("unknown shape class");
}

struct SurfacePoint {
    Vec3 p;
    Vec3 n;
    int part = 0;    // local part id
    bool planar = false;
};

SurfacePoint sample_sphere(double r, SplitRng& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = kTau * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    SurfacePoint sp;
    sp.n = {s * std::cos(phi), s * std::sin(phi), z};
    sp.p = r * sp.n;
    sp.part = z >= 0.0 ? 0 : 1;
    return sp;
}

SurfacePoint sample_cube(double a, SplitRng& rng) {
    const int face = static_cast<int>(rng.next_below(6));
    const int axis = face % 3;
    const double sign = face < 3 ? 1.0 : -1.0;
    const double u = (2.0 * rng.uniform() - 1.0) * a;
    const double v = (2.0 * rng.uniform() - 1.0) * a;
    SurfacePoint sp;
    double c[3] = {0, 0, 0};
    c[axis] = sign * a;
    c[(axis + 1) % 3] = u;
    c[(axis + 2) % 3] = v;
    sp.p = {c[0], c[1], c[2]};
    double n[3] = {0, 0, 0};
    n[axis] = sign;
    sp.n = {n[0], n[1], n[2]};
    sp.part = axis;
    sp.planar = true;
    return sp;
}

SurfacePoint sample_cylinder(double r, double h, SplitRng& rng) {
    const double side_area = 2.0 * kTau * r * h;  // 2*pi*r * 2h
    const double cap_area = 0.5 * kTau * r * r;   // pi*r^2
    const double w = rng.uniform() * (side_area + 2.0 * cap_area);
    SurfacePoint sp;
    if (w < side_area) {
        const double phi = kTau * rng.uniform();
        const double z = (2.0 * rng.uniform() - 1.0) * h;
        sp.n = {std::cos(phi), std::sin(phi), 0.0};
        sp.p = {r * sp.n.x, r * sp.n.y, z};
        sp.part = 0;
    } else {
        const bool top = w < side_area + cap_area;
        const double rho = r * std::sqrt(rng.uniform());
        const double phi = kTau * rng.uniform();
        sp.p = {rho * std::cos(phi), rho * std::sin(phi), top ? h : -h};
        sp.n = {0.0, 0.0, top ? 1.0 : -1.0};
        sp.part = top ? 1 : 2;
        sp.planar = true;
    }
    return sp;
}

SurfacePoint sample_cone(double r, double h, SplitRng& rng) {
    // Apex at z = h/2, base disc at z = -h/2.
    const double slant = std::sqrt(r * r + h * h);
    const double side_area = 0.5 * kTau * r * slant;
    const double base_area = 0.5 * kTau * r * r;
    const double w = rng.uniform() * (side_area + base_area);
    SurfacePoint sp;
    if (w < side_area) {
        const double t = std::sqrt(rng.uniform());  // radial fraction from apex
        const double phi = kTau * rng.uniform();
        const double rho = r * t;
        sp.p = {rho * std::cos(phi), rho * std::sin(phi), 0.5 * h - h * t};
        sp.n = {h * std::cos(phi) / slant, h * std::sin(phi) / slant, r / slant};
        sp.part = 0;
    } else {
        const double rho = r * std::sqrt(rng.uniform());
        const double phi = kTau * rng.uniform();
        sp.p = {rho * std::cos(phi), rho * std::sin(phi), -0.5 * h};
        sp.n = {0.0, 0.0, -1.0};
        sp.part = 1;
        sp.planar = true;
    }
    return sp;
}

SurfacePoint sample_torus(double R, double r, SplitRng& rng) {
    // Area element scales with R + r*cos(psi); rejection keeps it uniform.
    double psi = 0.0;
    for (;;) {
        psi = kTau * rng.uniform();
        const double accept = (R + r * std::cos(psi)) / (R + r);
        if (rng.uniform() <= accept) break;
    }
    const double phi = kTau * rng.uniform();
    const double cpsi = std::cos(psi), spsi = std::sin(psi);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    SurfacePoint sp;
    sp.p = {(R + r * cpsi) * cphi, (R + r * cpsi) * sphi, r * spsi};
    sp.n = {cpsi * cphi, cpsi * sphi, spsi};
    sp.part = cpsi >= 0.0 ? 0 : 1;
    return sp;
}

SurfacePoint sample_surface_point(const ShapeSpec& spec, SplitRng& rng) {
    switch (spec.shape) {
        case ShapeClass::sphere: return sample_sphere(spec.p0, rng);
        case ShapeClass::cube: return sample_cube(spec.p0, rng);
        case ShapeClass::cylinder: return sample_cylinder(spec.p0, spec.p1, rng);
        case ShapeClass::cone: return sample_cone(spec.p0, spec.p1, rng);
        case ShapeClass::torus: return sample_torus(spec.p0, spec.p1, rng);
    }
    throw std::invalid_argument("unknown shape class");
}

// Dense-limit surface-variation ratio at `q`: covariance of q - d_j over the
// 64 nearest points of a much denser sample of the same surface.
double dense_limit_curvature(const Vec3& q, const std::vector<Vec3>& dense) {
    const int k = std::min<int>(64, static_cast<int>(dense.size()));
    std::vector<std::pair<double, int>> order;
    order.reserve(dense.size());
    for (std::size_t j = 0; j < dense.size(); ++j)
        order.emplace_back(dist2(q, dense[j]), static_cast<int>(j));
    std::partial_sort(order.begin(), order.begin() + k, order.end());
    SymMat3 c;
    for (int jj = 0; jj < k; ++jj) {
        const Vec3 r = q - dense[static_cast<std::size_t>(order[static_cast<std::size_t>(jj)].second)];
        c.xx += r.x * r.x;
        c.xy += r.x * r.y;
        c.xz += r.x * r.z;
        c.yy += r.y * r.y;
        c.yz += r.y * r.z;
        c.zz += r.z * r.z;
    }
    const EigenDecomp3 e = eig_sym3(c);
    const double sum = e.values[0] + e.values[1] + e.values[2];
    if (sum <= kDegenerateEigenSum) return 0.0;
    return std::clamp(e.values[0] / sum, 0.0, 1.0 / 3.0);
}

double uniform_in(SplitRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

const std::vector<std::string>& shape_class_names() {
    static const std::vector<std::string> names = {"sphere", "cube", "cylinder", "cone", "torus"};
    return names;
}

ShapeClass shape_class_from_name(const std::string& name) {
    const auto& names = shape_class_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<ShapeClass>(i);
    throw std::invalid_argument("unknown shape class '" + name + "'");
}

const std::vector<std::vector<int>>& shape_category_parts() {
    // sphere: hemispheres; cube: axis pairs; cylinder: side + two caps;
    // cone: side + base; torus: outer + inner half.
    static const std::vector<std::vector<int>> parts = {
        {0, 1}, {2, 3, 4}, {5, 6, 7}, {8, 9}, {10, 11}};
    return parts;
}

void ShapeSpec::validate() const {
    class_name(shape);
    if (points < 64) throw std::invalid_argument("ShapeSpec: need at least 64 points");
    if (jitter < 0.0) throw std::invalid_argument("ShapeSpec: negative jitter");
    if (p0 <= 0.0) throw std::invalid_argument("ShapeSpec: size p0 must be positive");
    const bool needs_p1 = shape == ShapeClass::cylinder || shape == ShapeClass::cone ||
                          shape == ShapeClass::torus;
    if (needs_p1 && p1 <= 0.0)
        throw std::invalid_argument(std::string("ShapeSpec: ") + class_name(shape) +
                                    " needs positive p1");
    if (shape == ShapeClass::torus && p1 >= p0)
        throw std::invalid_argument("ShapeSpec: torus minor radius must be below major radius");
}

ShapeSample gen_shape(const ShapeSpec& spec) {
    spec.validate();
    SplitRng root(spec.seed);
    SplitRng surf_rng = root.split(1);
    SplitRng dense_rng = root.split(2);
    SplitRng jitter_rng = root.split(3);

    ShapeSample out;
    out.cloud.class_label = static_cast<int>(spec.shape);
    const int part_base = shape_category_parts()[static_cast<std::size_t>(spec.shape)][0];

    std::vector<bool> planar(static_cast<std::size_t>(spec.points));
    bool any_curved = false;
    for (int i = 0; i < spec.points; ++i) {
        const SurfacePoint sp = sample_surface_point(spec, surf_rng);
        out.cloud.points.push_back(sp.p);
        out.cloud.part_labels.push_back(part_base + sp.part);
        out.analytic.normals.push_back(sp.n);
        planar[static_cast<std::size_t>(i)] = sp.planar;
        any_curved = any_curved || !sp.planar;
    }
    out.analytic.degenerate.assign(static_cast<std::size_t>(spec.points), 0);

    std::vector<Vec3> dense;
    if (any_curved) {
        dense.reserve(static_cast<std::size_t>(spec.points) * 16);
        for (int i = 0; i < spec.points * 16; ++i)
            dense.push_back(sample_surface_point(spec, dense_rng).p);
    }
    for (int i = 0; i < spec.points; ++i)
        out.analytic.curvature.push_back(
            planar[static_cast<std::size_t>(i)]
                ? 0.0
                : dense_limit_curvature(out.cloud.points[static_cast<std::size_t>(i)], dense));

    if (spec.jitter > 0.0) {
        for (Vec3& p : out.cloud.points) {
            p.x += spec.jitter * jitter_rng.normal();
            p.y += spec.jitter * jitter_rng.normal();
            p.z += spec.jitter * jitter_rng.normal();
        }
    }
    return out;
}

void DatasetSpec::validate() const {
    if (train_per_class < 1 || test_per_class < 1)
        throw std::invalid_argument("DatasetSpec: need at least one cloud per class per split");
    if (points_per_cloud < 64)
        throw std::invalid_argument("DatasetSpec: need at least 64 points per cloud");
    if (dense_points < points_per_cloud)
        throw std::invalid_argument("DatasetSpec: dense_points below points_per_cloud");
    if (jitter_train < 0.0 || jitter_test < 0.0)
        throw std::invalid_argument("DatasetSpec: negative jitter");
    if (geossl_k < 3 || geossl_k >= points_per_cloud)
        throw std::invalid_argument("DatasetSpec: geossl_k out of range");
    if (dense_k < 3 || dense_k >= dense_points)
        throw std::invalid_argument("DatasetSpec: dense_k out of range");
    if (geopl_source != "analytic" && geopl_source != "dense")
        throw std::invalid_argument("DatasetSpec: geopl_source must be 'analytic' or 'dense'");
}

namespace {

Dataset gen_split(const DatasetSpec& spec, const std::string& split) {
    Dataset ds;
    ds.split = split;
    ds.classes = shape_class_names();
    ds.category_parts = shape_category_parts();
    ds.points_per_cloud = spec.points_per_cloud;
    ds.seed = spec.seed;
    const bool train = split == "train";
    const int per_class = train ? spec.train_per_class : spec.test_per_class;
    const double jitter = train ? spec.jitter_train : spec.jitter_test;
    SplitRng split_rng = SplitRng(spec.seed).split(train ? 1 : 2);

    for (int c = 0; c < kNumShapeClasses; ++c) {
        SplitRng class_rng = split_rng.split(static_cast<std::uint64_t>(c));
        for (int i = 0; i < per_class; ++i) {
            SplitRng cloud_rng = class_rng.split(static_cast<std::uint64_t>(i));
            ShapeSpec ss;
            ss.shape = static_cast<ShapeClass>(c);
            ss.points = spec.points_per_cloud;
            ss.jitter = jitter;
            ss.seed = cloud_rng.next_u64();
            switch (ss.shape) {
                case ShapeClass::sphere: ss.p0 = uniform_in(cloud_rng, 0.6, 1.0); break;
                case ShapeClass::cube: ss.p0 = uniform_in(cloud_rng, 0.45, 0.75); break;
                case ShapeClass::cylinder:
                    ss.p0 = uniform_in(cloud_rng, 0.35, 0.6);
                    ss.p1 = uniform_in(cloud_rng, 0.5, 0.9);
                    break;
                case ShapeClass::cone:
                    ss.p0 = uniform_in(cloud_rng, 0.4, 0.7);
                    ss.p1 = uniform_in(cloud_rng, 0.8, 1.4);
                    break;
                case ShapeClass::torus:
                    ss.p0 = uniform_in(cloud_rng, 0.55, 0.8);
                    ss.p1 = uniform_in(cloud_rng, 0.16, 0.28);
                    break;
            }
            ShapeSample sample = gen_shape(ss);

            CloudEntry entry;
            entry.seed = ss.seed;
            entry.cloud = std::move(sample.cloud);
            entry.geossl = compute_props(entry.cloud, spec.geossl_k);
            if (spec.geopl_source == "analytic") {
                entry.geopl = std::move(sample.analytic);
            } else {
                ShapeSpec dense_ss = ss;
                dense_ss.points = spec.dense_points;
                dense_ss.jitter = 0.0;
                dense_ss.seed = cloud_rng.next_u64();
                PointCloud dense_cloud;
                SplitRng dense_surf = SplitRng(dense_ss.seed).split(1);
                for (int d = 0; d < dense_ss.points; ++d)
                    dense_cloud.points.push_back(sample_surface_point(dense_ss, dense_surf).p);
                const GeomProps dense_props = compute_props(dense_cloud, spec.dense_k);
                entry.geopl = transfer_privileged(dense_cloud, dense_props, entry.cloud);
            }
            ds.clouds.push_back(std::move(entry));
        }
    }
    return ds;
}

}  // namespace

GeneratedDataset gen_dataset(const DatasetSpec& spec) {
    spec.validate();
    GeneratedDataset out;
    out.train = gen_split(spec, "train");
    out.test = gen_split(spec, "test");
    return out;
}

}  // namespace geoaux
