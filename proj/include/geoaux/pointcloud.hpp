#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoaux/vec3.hpp"

namespace geoaux {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> part_labels;  // empty, or one label per point
    int class_label = -1;          // -1 when absent

    std::size_t size() const { return points.size(); }
    bool has_part_labels() const { return !part_labels.empty(); }
    bool has_class_label() const { return class_label >= 0; }

    // Throws std::invalid_argument on violated invariants (empty cloud,
    // label/point length mismatch, non-finite coordinates).
    void validate() const;
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    double face_area(std::size_t f) const;
    bool face_degenerate(std::size_t f) const { return face_area(f) <= kDegenerateArea; }

    static constexpr double kDegenerateArea = 1e-18;
};

// ASCII OFF reader. Polygon faces are fan-triangulated. Malformed headers,
// non-numeric tokens and out-of-range vertex indices raise ParseError with
// the offending line number.
TriMesh load_off(const std::string& path);

// XYZ text format: one "x y z [part_label]" line per point.
PointCloud read_xyz(const std::string& path);
void write_xyz(const PointCloud& cloud, const std::string& path);

// n points on the mesh surface: area-weighted random oversample (4x n
// barycentric draws) reduced to n by farthest point sampling. Deterministic
// for a fixed seed. Throws if every face is degenerate or n < 1.
PointCloud sample_surface(const TriMesh& mesh, int n, std::uint64_t seed);

// Greedy farthest point subset. First pick is `start`; each next pick
// maximizes the minimum distance to everything already selected, ties going
// to the smallest index.
std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int n, int start = 0);

// Rigid frame used by normalize_unit_sphere: subtract center, divide by radius.
struct UnitSphereTransform {
    Vec3 center;
    double radius = 1.0;
};

UnitSphereTransform unit_sphere_transform(const PointCloud& cloud);
PointCloud apply_transform(const UnitSphereTransform& t, const PointCloud& cloud);

// Centers the cloud at the origin and scales the farthest point to norm 1.
// Throws if all points coincide.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

// Independent N(0, sigma^2) perturbation of every coordinate; labels kept.
PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

}  // namespace geoaux
