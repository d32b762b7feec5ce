#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoaux/vec3.hpp"

namespace geoaux {

struct MetricsReport {
    std::optional<double> mean_class_accuracy;
    std::optional<int> class_count;
    std::optional<double> overall_accuracy;
    std::vector<double> per_shape_iou;
    std::optional<double> mean_iou;
    std::optional<double> normal_cosine_similarity;
    std::optional<double> normal_cosine_distance;
    std::optional<double> normal_rms_angle_deg;
    std::optional<double> normal_cosine_similarity_unoriented;
    std::optional<double> normal_rms_angle_deg_unoriented;
    std::optional<double> curvature_rmse;

    std::string to_json() const;
    static std::string flat_csv_header();
    // Absent fields become empty cells; per_shape_iou is not flattened.
    std::string flat_csv_row() const;
};

// Mean per-class accuracy over the classes present in `truth`; the class
// count actually used is written to *class_count when given.
double mean_class_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                           int* class_count = nullptr);

double overall_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Mean IoU over the parts of one shape's category. A part absent from both
// pred and truth (empty union) scores 1.
double shape_iou(const std::vector<int>& pred, const std::vector<int>& truth,
                 const std::vector<int>& category_parts);

struct NormalErrorStats {
    double cosine_similarity = 0.0;
    double cosine_distance = 0.0;
    double rms_angle_deg = 0.0;
    double cosine_similarity_unoriented = 0.0;
    double cosine_distance_unoriented = 0.0;
    double rms_angle_deg_unoriented = 0.0;
    int points_used = 0;
    int renormalized = 0;
};

// `exclude` flags points to skip (degenerate neighborhoods); empty means use
// all. Vectors off unit length by more than 1e-6 are renormalized and
// counted. Throws if no points remain.
NormalErrorStats normal_errors(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
                               const std::vector<std::uint8_t>& exclude = {});

}  // namespace geoaux
