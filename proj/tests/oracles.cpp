#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

using geoaux::Array;
using geoaux::SymMat3;
using geoaux::Vec3;

std::array<double, 3> eig3_cubic(const SymMat3& m) {
    const double a = m.xx, b = m.yy, c = m.zz;
    const double d = m.xy, e = m.yz, f = m.xz;
    const double p1 = d * d + f * f + e * e;
    if (p1 == 0.0) {
        std::array<double, 3> out = {a, b, c};
        std::sort(out.begin(), out.end());
        return out;
    }
    const double q = (a + b + c) / 3.0;
    const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // B = (m - q*I) / p
    const double ba = (a - q) / p, bb = (b - q) / p, bc = (c - q) / p;
    const double bd = d / p, be = e / p, bf = f / p;
    const double detb = ba * (bb * bc - be * be) - bd * (bd * bc - be * bf) +
                        bf * (bd * be - bb * bf);
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0943951023931953;
    const double hi = q + 2.0 * p * std::cos(phi);
    const double lo = q + 2.0 * p * std::cos(phi + two_pi_3);
    return {lo, 3.0 * q - hi - lo, hi};
}

std::vector<int> fps_brute(const std::vector<Vec3>& pts, int m, int start) {
    std::vector<int> sel = {start};
    while (static_cast<int>(sel.size()) < m) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
            if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (int s : sel) nearest = std::min(nearest, geoaux::dist2(pts[i], pts[s]));
            if (nearest > best_d) {
                best_d = nearest;
                best = i;
            }
        }
        sel.push_back(best);
    }
    return sel;
}

Array matmul_naive(const Array& a, const Array& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul_naive: shape mismatch");
    Array out = Array::zeros(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (int l = 0; l < a.cols; ++l) s += a.at(i, l) * b.at(l, j);
            out.at(i, j) = s;
        }
    return out;
}

double mean_class_accuracy_loop(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::map<int, std::pair<long, long>> per_class;  // class -> (correct, total)
    for (std::size_t i = 0; i < truth.size(); ++i) {
        per_class[truth[i]].second += 1;
        if (pred[i] == truth[i]) per_class[truth[i]].first += 1;
    }
    double sum = 0.0;
    for (const auto& [cls, counts] : per_class)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return sum / static_cast<double>(per_class.size());
}

double overall_accuracy_loop(const std::vector<int>& pred, const std::vector<int>& truth) {
    long correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double iou_loop(const std::vector<int>& pred, const std::vector<int>& truth,
                const std::vector<int>& parts) {
    double sum = 0.0;
    for (int part : parts) {
        long inter = 0, uni = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool p = pred[i] == part, t = truth[i] == part;
            if (p && t) ++inter;
            if (p || t) ++uni;
        }
        sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return sum / static_cast<double>(parts.size());
}

double momentum_unroll3(double p0, double mu, double lr, const std::array<double, 3>& grads) {
    double v = 0.0, p = p0;
    v = mu * v - lr * grads[0];
    p += v;
    v = mu * v - lr * grads[1];
    p += v;
    v = mu * v - lr * grads[2];
    p += v;
    return p;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
