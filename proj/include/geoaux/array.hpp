#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoaux {

// Dense row-major 2-D array of doubles. Scalars are 1x1.
struct Array {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Array() = default;
    Array(int r, int c) : rows(checked(r)), cols(checked(c)) {
        data.assign(static_cast<std::size_t>(r) * c, 0.0);
    }
    Array(int r, int c, std::vector<double> d) : rows(checked(r)), cols(checked(c)) {
        if (d.size() != static_cast<std::size_t>(r) * c)
            throw std::invalid_argument("Array: data length does not match shape");
        data = std::move(d);
    }

    static Array zeros(int r, int c) { return Array(r, c); }
    static Array full(int r, int c, double v) {
        Array a(r, c);
        for (double& x : a.data) x = v;
        return a;
    }
    static Array scalar(double v) { return Array(1, 1, {v}); }

    std::size_t size() const { return data.size(); }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double item() const {
        if (size() != 1) throw std::logic_error("Array::item: not a scalar");
        return data[0];
    }

    bool same_shape(const Array& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const {
        return "(" + std::to_string(rows) + ", " + std::to_string(cols) + ")";
    }
    bool all_finite() const {
        for (double x : data)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    static int checked(int d) {
        if (d < 1) throw std::invalid_argument("Array: dimensions must be positive");
        return d;
    }
};

}  // namespace geoaux
