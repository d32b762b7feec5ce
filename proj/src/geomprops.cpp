#include "geoaux/geomprops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace geoaux {

double SymMat3::operator()(int r, int c) const {
    if (r > c) std::swap(r, c);
    if (r == 0) return c == 0 ? xx : (c == 1 ? xy : xz);
    if (r == 1) return c == 1 ? yy : yz;
    return zz;
}

double SymMat3::frobenius() const {
    return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
}

KnnGraph knn(const std::vector<Vec3>& points, int k, bool include_self) {
    const int n = static_cast<int>(points.size());
    const int max_k = include_self ? n : n - 1;
    if (k < 1 || k > max_k)
        throw std::invalid_argument("knn: k=" + std::to_string(k) + " out of range [1, " +
                                    std::to_string(max_k) + "]");

    KnnGraph graph;
    graph.k = k;
    graph.flat.resize(static_cast<std::size_t>(n) * k);
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j) {
            if (!include_self && j == i) continue;
            cand.emplace_back(dist2(points[static_cast<std::size_t>(i)],
                                    points[static_cast<std::size_t>(j)]),
                              j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        int* row = graph.flat.data() + static_cast<std::size_t>(i) * k;
        for (int t = 0; t < k; ++t) row[t] = cand[static_cast<std::size_t>(t)].second;
    }
    return graph;
}

SymMat3 covariance_at(const std::vector<Vec3>& points, const KnnGraph& graph, int i,
                      CovarianceMode mode) {
    if (i < 0 || i >= graph.n()) throw std::invalid_argument("covariance_at: index out of range");
    Vec3 origin = points[static_cast<std::size_t>(i)];
    if (mode == CovarianceMode::centered) {
        Vec3 c{0, 0, 0};
        for (int t = 0; t < graph.k; ++t) c += points[static_cast<std::size_t>(graph.row(i)[t])];
        origin = c / static_cast<double>(graph.k);
    }
    SymMat3 C;
    for (int t = 0; t < graph.k; ++t) {
        Vec3 r = origin - points[static_cast<std::size_t>(graph.row(i)[t])];
        C.xx += r.x * r.x;
        C.xy += r.x * r.y;
        C.xz += r.x * r.z;
        C.yy += r.y * r.y;
        C.yz += r.y * r.z;
        C.zz += r.z * r.z;
    }
    return C;
}

namespace {

void canonicalize_sign(Vec3& v) {
    double ax = std::fabs(v.x), ay = std::fabs(v.y), az = std::fabs(v.z);
    double m = std::max({ax, ay, az});
    if (m == 0.0) return;
    int winner = -1;
    int ties = 0;
    for (int c = 0; c < 3; ++c) {
        if (std::fabs(v[c]) == m) {
            ++ties;
            if (winner < 0) winner = c;
        }
    }
    double pivot;
    if (ties == 1) {
        pivot = v[winner];
    } else {
        pivot = 0.0;
        for (int c = 0; c < 3; ++c) {
            if (v[c] != 0.0) {
                pivot = v[c];
                break;
            }
        }
    }
    if (pivot < 0.0) v = -v;
}

}  // namespace

EigenDecomp3 eig_sym3(const SymMat3& C) {
    double a[3][3] = {{C.xx, C.xy, C.xz}, {C.xy, C.yy, C.yz}, {C.xz, C.yz, C.zz}};
    for (auto& row : a)
        for (double x : row)
            if (!std::isfinite(x)) throw std::invalid_argument("eig_sym3: non-finite entry");

    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    // Cyclic Jacobi sweeps; converges to machine precision in a handful of
    // sweeps for 3x3.
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
        double diag = std::sqrt(a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2]);
        if (off <= 1e-18 * std::max(1.0, diag) || off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                double app = a[p][p], aqq = a[q][q], apq = a[p][q];
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = a[q][p] = 0.0;
                int r = 3 - p - q;
                double arp = a[r][p], arq = a[r][q];
                a[r][p] = a[p][r] = c * arp - s * arq;
                a[r][q] = a[q][r] = s * arp + c * arq;
                for (int i = 0; i < 3; ++i) {
                    double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return a[x][x] < a[y][y]; });

    EigenDecomp3 out;
    for (int j = 0; j < 3; ++j) {
        int col = order[static_cast<std::size_t>(j)];
        out.values[static_cast<std::size_t>(j)] = a[col][col];
        Vec3 e{v[0][col], v[1][col], v[2][col]};
        canonicalize_sign(e);
        out.vectors[static_cast<std::size_t>(j)] = e;
    }
    return out;
}

NormalField estimate_normals(const PointCloud& cloud, int k, NormalOrientation orientation,
                             CovarianceMode mode) {
    cloud.validate();
    const int n = static_cast<int>(cloud.points.size());
    KnnGraph graph = knn(cloud.points, k, false);

    Vec3 centroid{0, 0, 0};
    for (const Vec3& p : cloud.points) centroid += p;
    centroid = centroid / static_cast<double>(n);

    NormalField out;
    out.normals.resize(static_cast<std::size_t>(n));
    out.degenerate.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        SymMat3 C = covariance_at(cloud.points, graph, i, mode);
        EigenDecomp3 eig = eig_sym3(C);
        double sum = eig.values[0] + eig.values[1] + eig.values[2];
        if (sum <= kDegenerateEigenSum) {
            out.normals[static_cast<std::size_t>(i)] = {0.0, 0.0, 1.0};
            out.degenerate[static_cast<std::size_t>(i)] = 1;
            continue;
        }
        Vec3 nrm = eig.vectors[0];
        if (orientation == NormalOrientation::outward) {
            double d = nrm.dot(cloud.points[static_cast<std::size_t>(i)] - centroid);
            if (d < 0.0) nrm = -nrm;
        }
        out.normals[static_cast<std::size_t>(i)] = nrm;
    }
    return out;
}

double curvature_eigen(const std::vector<Vec3>& points, const KnnGraph& graph, int i,
                       CovarianceMode mode) {
    EigenDecomp3 eig = eig_sym3(covariance_at(points, graph, i, mode));
    double sum = eig.values[0] + eig.values[1] + eig.values[2];
    if (sum <= kDegenerateEigenSum) return 0.0;
    double u = eig.values[0] / sum;
    return std::clamp(u, 0.0, 1.0 / 3.0);
}

double curvature_normal_dev(const std::vector<Vec3>& normals, const KnnGraph& graph, int i) {
    if (i < 0 || i >= graph.n())
        throw std::invalid_argument("curvature_normal_dev: index out of range");
    const Vec3& ni = normals[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (int t = 0; t < graph.k; ++t) {
        Vec3 nj = normals[static_cast<std::size_t>(graph.row(i)[t])];
        if (ni.dot(nj) < 0.0) nj = -nj;
        acc += (ni - nj).norm();
    }
    return acc / static_cast<double>(graph.k);
}

GeomProps compute_props(const PointCloud& cloud, int k, PropsOptions opts) {
    cloud.validate();
    const int n = static_cast<int>(cloud.points.size());
    KnnGraph graph = knn(cloud.points, k, false);

    Vec3 centroid{0, 0, 0};
    for (const Vec3& p : cloud.points) centroid += p;
    centroid = centroid / static_cast<double>(n);

    GeomProps out;
    out.normals.resize(static_cast<std::size_t>(n));
    out.curvature.assign(static_cast<std::size_t>(n), 0.0);
    out.degenerate.assign(static_cast<std::size_t>(n), 0);

    // one decomposition per point serves both the normal and the eigen-ratio
    for (int i = 0; i < n; ++i) {
        SymMat3 C = covariance_at(cloud.points, graph, i, opts.covariance);
        EigenDecomp3 eig = eig_sym3(C);
        double sum = eig.values[0] + eig.values[1] + eig.values[2];
        if (sum <= kDegenerateEigenSum) {
            out.normals[static_cast<std::size_t>(i)] = {0.0, 0.0, 1.0};
            out.degenerate[static_cast<std::size_t>(i)] = 1;
            continue;
        }
        Vec3 nrm = eig.vectors[0];
        if (opts.orientation == NormalOrientation::outward) {
            double d = nrm.dot(cloud.points[static_cast<std::size_t>(i)] - centroid);
            if (d < 0.0) nrm = -nrm;
        }
        out.normals[static_cast<std::size_t>(i)] = nrm;
        if (opts.curvature == CurvatureKind::eigen_ratio)
            out.curvature[static_cast<std::size_t>(i)] =
                std::clamp(eig.values[0] / sum, 0.0, 1.0 / 3.0);
    }
    if (opts.curvature == CurvatureKind::normal_deviation) {
        for (int i = 0; i < n; ++i) {
            if (out.degenerate[static_cast<std::size_t>(i)]) continue;
            out.curvature[static_cast<std::size_t>(i)] =
                curvature_normal_dev(out.normals, graph, i);
        }
    }
    return out;
}

GeomProps transfer_privileged(const PointCloud& dense, const GeomProps& dense_props,
                              const PointCloud& sparse) {
    if (dense.points.empty()) throw std::invalid_argument("transfer_privileged: empty dense cloud");
    if (dense_props.size() != dense.points.size())
        throw std::invalid_argument("transfer_privileged: props/cloud size mismatch");
    sparse.validate();

    GeomProps out;
    out.normals.reserve(sparse.points.size());
    out.curvature.reserve(sparse.points.size());
    out.degenerate.reserve(sparse.points.size());
    for (const Vec3& q : sparse.points) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < dense.points.size(); ++j) {
            double d2 = dist2(q, dense.points[j]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(j);
            }
        }
        out.normals.push_back(dense_props.normals[static_cast<std::size_t>(best)]);
        out.curvature.push_back(dense_props.curvature[static_cast<std::size_t>(best)]);
        out.degenerate.push_back(dense_props.degenerate[static_cast<std::size_t>(best)]);
    }
    return out;
}

void write_props_csv(const GeomProps& props, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "index,nx,ny,nz,u,degenerate\n";
    char buf[160];
    for (std::size_t i = 0; i < props.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%d", i, props.normals[i].x,
                      props.normals[i].y, props.normals[i].z, props.curvature[i],
                      static_cast<int>(props.degenerate[i]));
        out << buf << '\n';
    }
}

}  // namespace geoaux
