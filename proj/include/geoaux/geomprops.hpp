#pragma once

// Self-generated geometric supervision labels: kNN graphs, neighborhood
// covariance, 3x3 symmetric eigendecomposition, per-point normals and two
// curvature estimators, plus nearest-neighbor transfer of privileged labels
// from a denser cloud.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geoaux/pointcloud.hpp"
#include "geoaux/vec3.hpp"

namespace geoaux {

struct KnnGraph {
    std::vector<int> flat;  // row-major n x k, each row sorted by (distance, index)
    int k = 0;

    int n() const { return k > 0 ? static_cast<int>(flat.size()) / k : 0; }
    const int* row(int i) const { return flat.data() + static_cast<std::size_t>(i) * k; }
};

// Upper triangle of a symmetric 3x3 matrix.
struct SymMat3 {
    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

    double operator()(int r, int c) const;
    double trace() const { return xx + yy + zz; }
    double frobenius() const;
    Vec3 apply(const Vec3& v) const {
        return {xx * v.x + xy * v.y + xz * v.z, xy * v.x + yy * v.y + yz * v.z,
                xz * v.x + yz * v.y + zz * v.z};
    }
};

struct EigenDecomp3 {
    std::array<double, 3> values;   // ascending
    std::array<Vec3, 3> vectors;    // orthonormal, index-matched, sign-canonical
};

struct GeomProps {
    std::vector<Vec3> normals;       // unit unless degenerate
    std::vector<double> curvature;
    std::vector<std::uint8_t> degenerate;  // 1 = neighborhood too flat/collapsed to trust

    std::size_t size() const { return normals.size(); }
};

enum class CurvatureKind { eigen_ratio, normal_deviation };
enum class NormalOrientation { outward, canonical };
enum class CovarianceMode { displacement, centered };

// Neighborhoods with eigenvalue sum at or below this are flagged degenerate.
inline constexpr double kDegenerateEigenSum = 1e-12;

// Exact brute-force k nearest neighbors under Euclidean distance, ties broken
// by smaller index. include_self admits the query point itself as a neighbor.
KnnGraph knn(const std::vector<Vec3>& points, int k, bool include_self = false);

// Covariance of neighbor displacements r = p_i - p_j summed over the k
// neighbors of i (no mean centering in displacement mode).
SymMat3 covariance_at(const std::vector<Vec3>& points, const KnnGraph& graph, int i,
                      CovarianceMode mode = CovarianceMode::displacement);

// Jacobi eigendecomposition. Ascending eigenvalues; eigenvectors orthonormal
// and sign-canonical (largest-magnitude component positive, exact ties
// resolved by the first nonzero component). Repeated eigenvalues yield an
// arbitrary orthonormal basis of the eigenspace, canonicalized the same way.
EigenDecomp3 eig_sym3(const SymMat3& C);

struct NormalField {
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> degenerate;
};

// Per-point normal = eigenvector of the neighborhood covariance for the
// smallest eigenvalue. Outward orientation flips each normal so it points
// away from the cloud centroid; exact ties keep the sign-canonical vector.
// Degenerate neighborhoods get the fallback normal (0,0,1) and a flag.
NormalField estimate_normals(const PointCloud& cloud, int k,
                             NormalOrientation orientation = NormalOrientation::outward,
                             CovarianceMode mode = CovarianceMode::displacement);

// Surface-variation curvature: smallest eigenvalue over eigenvalue sum,
// clamped to [0, 1/3]; 0 (flagged) when the eigenvalue sum vanishes.
double curvature_eigen(const std::vector<Vec3>& points, const KnnGraph& graph, int i,
                       CovarianceMode mode = CovarianceMode::displacement);

// Mean norm of normal differences to the k neighbors, each neighbor normal
// sign-aligned to n_i first (flipped when the dot product is negative).
double curvature_normal_dev(const std::vector<Vec3>& normals, const KnnGraph& graph, int i);

struct PropsOptions {
    CurvatureKind curvature = CurvatureKind::eigen_ratio;
    NormalOrientation orientation = NormalOrientation::outward;
    CovarianceMode covariance = CovarianceMode::displacement;
};

// Bundles normals and the selected curvature into per-point labels.
GeomProps compute_props(const PointCloud& cloud, int k, PropsOptions opts = {});

// Each sparse point inherits the properties of its nearest dense point
// (ties to the smallest dense index). Both clouds must share one frame.
GeomProps transfer_privileged(const PointCloud& dense, const GeomProps& dense_props,
                              const PointCloud& sparse);

// CSV rows "index,nx,ny,nz,u,degenerate".
void write_props_csv(const GeomProps& props, const std::string& path);

}  // namespace geoaux
