#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoaux/dataset_io.hpp"
#include "geoaux/geomprops.hpp"
#include "geoaux/pointcloud.hpp"

namespace geoaux {

enum class ShapeClass { sphere = 0, cube = 1, cylinder = 2, cone = 3, torus = 4 };

inline constexpr int kNumShapeClasses = 5;
const std::vector<std::string>& shape_class_names();
ShapeClass shape_class_from_name(const std::string& name);
// Global part-id ranges per class; ids are disjoint across classes.
const std::vector<std::vector<int>>& shape_category_parts();

struct ShapeSpec {
    ShapeClass shape = ShapeClass::sphere;
    // p0/p1 meaning per class: sphere radius / unused; cube half-extent /
    // unused; cylinder radius / half-height; cone base radius / height;
    // torus major / minor radius.
    double p0 = 1.0;
    double p1 = 0.0;
    int points = 256;
    double jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ShapeSample {
    PointCloud cloud;    // jittered points, global part labels, class label
    GeomProps analytic;  // clean-surface normals + dense-limit curvature
};

// Area-uniform surface sample with analytic labels. Labels come from the
// clean surface; jitter perturbs only the stored points.
ShapeSample gen_shape(const ShapeSpec& spec);

struct DatasetSpec {
    int train_per_class = 40;
    int test_per_class = 20;
    int points_per_cloud = 256;
    int dense_points = 4096;
    double jitter_train = 0.005;
    double jitter_test = 0.0;
    int geossl_k = 20;
    // "analytic": geopl labels are the clean-surface labels. "dense":
    // estimated on a dense_points sample of the same surface, then carried
    // to each sparse point from its nearest dense neighbor.
    std::string geopl_source = "analytic";
    int dense_k = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

struct GeneratedDataset {
    Dataset train;
    Dataset test;
};

GeneratedDataset gen_dataset(const DatasetSpec& spec);

}  // namespace geoaux
