#include "geoaux/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace geoaux {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_paired(const std::vector<int>& pred, const std::vector<int>& truth,
                    const char* who) {
    if (pred.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
    if (pred.size() != truth.size())
        throw std::invalid_argument(std::string(who) + ": " + std::to_string(pred.size()) +
                                    " predictions vs " + std::to_string(truth.size()) + " labels");
}

}  // namespace

double mean_class_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                           int* class_count) {
    require_paired(pred, truth, "mean_class_accuracy");
    std::map<int, std::pair<long, long>> per_class;  // class -> (correct, total)
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [correct, total] = per_class[truth[i]];
        ++total;
        if (pred[i] == truth[i]) ++correct;
    }
    double sum = 0.0;
    for (const auto& [cls, counts] : per_class)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    if (class_count) *class_count = static_cast<int>(per_class.size());
    return sum / static_cast<double>(per_class.size());
}

double overall_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    require_paired(pred, truth, "overall_accuracy");
    long correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double shape_iou(const std::vector<int>& pred, const std::vector<int>& truth,
                 const std::vector<int>& category_parts) {
    require_paired(pred, truth, "shape_iou");
    if (category_parts.empty()) throw std::invalid_argument("shape_iou: empty category part set");
    const std::set<int> parts(category_parts.begin(), category_parts.end());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!parts.count(pred[i]))
            throw std::invalid_argument("shape_iou: predicted part " + std::to_string(pred[i]) +
                                        " outside the category part set");
        if (!parts.count(truth[i]))
            throw std::invalid_argument("shape_iou: truth part " + std::to_string(truth[i]) +
                                        " outside the category part set");
    }
    double sum = 0.0;
    for (int part : parts) {
        long inter = 0, uni = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const bool p = pred[i] == part;
            const bool t = truth[i] == part;
            if (p && t) ++inter;
            if (p || t) ++uni;
        }
        sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return sum / static_cast<double>(parts.size());
}

NormalErrorStats normal_errors(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
                               const std::vector<std::uint8_t>& exclude) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("normal_errors: " + std::to_string(pred.size()) +
                                    " predictions vs " + std::to_string(gt.size()) + " references");
    if (!exclude.empty() && exclude.size() != pred.size())
        throw std::invalid_argument("normal_errors: mask length mismatch");

    NormalErrorStats s;
    double dot_sum = 0.0, adot_sum = 0.0, sq_sum = 0.0, asq_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!exclude.empty() && exclude[i]) continue;
        Vec3 a = pred[i];
        Vec3 b = gt[i];
        if (std::abs(a.norm() - 1.0) > 1e-6) {
            a = a.normalized();
            ++s.renormalized;
        }
        if (std::abs(b.norm() - 1.0) > 1e-6) {
            b = b.normalized();
            ++s.renormalized;
        }
        const double d = std::clamp(a.dot(b), -1.0, 1.0);
        const double ad = std::abs(d);
        dot_sum += d;
        adot_sum += ad;
        const double ang = std::acos(d) * 180.0 / kPi;
        const double aang = std::acos(ad) * 180.0 / kPi;
        sq_sum += ang * ang;
        asq_sum += aang * aang;
        ++s.points_used;
    }
    if (s.points_used == 0) throw std::invalid_argument("normal_errors: no usable points");
    const double n = static_cast<double>(s.points_used);
    s.cosine_similarity = dot_sum / n;
    s.cosine_distance = 1.0 - s.cosine_similarity;
    s.rms_angle_deg = std::sqrt(sq_sum / n);
    s.cosine_similarity_unoriented = adot_sum / n;
    s.cosine_distance_unoriented = 1.0 - s.cosine_similarity_unoriented;
    s.rms_angle_deg_unoriented = std::sqrt(asq_sum / n);
    return s;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "geoaux.metrics.v1";
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("mean_class_accuracy", mean_class_accuracy);
    if (class_count) j["class_count"] = *class_count;
    put("overall_accuracy", overall_accuracy);
    if (!per_shape_iou.empty()) j["per_shape_iou"] = per_shape_iou;
    put("mean_iou", mean_iou);
    put("normal_cosine_similarity", normal_cosine_similarity);
    put("normal_cosine_distance", normal_cosine_distance);
    put("normal_rms_angle_deg", normal_rms_angle_deg);
    put("normal_cosine_similarity_unoriented", normal_cosine_similarity_unoriented);
    put("normal_rms_angle_deg_unoriented", normal_rms_angle_deg_unoriented);
    put("curvature_rmse", curvature_rmse);
    return j.dump(2);
}

std::string MetricsReport::flat_csv_header() {
    return "mean_class_accuracy,overall_accuracy,mean_iou,normal_cosine_similarity,"
           "normal_cosine_distance,normal_rms_angle_deg,curvature_rmse";
}

std::string MetricsReport::flat_csv_row() const {
    std::ostringstream os;
    os.precision(17);
    auto cell = [&os](const std::optional<double>& v, bool last = false) {
        if (v) os << *v;
        if (!last) os << ',';
    };
    cell(mean_class_accuracy);
    cell(overall_accuracy);
    cell(mean_iou);
    cell(normal_cosine_similarity);
    cell(normal_cosine_distance);
    cell(normal_rms_angle_deg);
    cell(curvature_rmse, true);
    return os.str();
}

}  // namespace geoaux
