// SPDX-License-Identifier: Apache-2.0
#include "core/grid.hpp"

#include <cmath>

namespace smn {

ValueGrid ValueGrid::from(std::size_t r, std::size_t c, std::initializer_list<double> values) {
    if (values.size() != r * c) {
        throw DimensionError("ValueGrid::from: " + std::to_string(values.size()) +
                             " values for shape " + std::to_string(r) + "x" + std::to_string(c));
    }
    ValueGrid g(r, c);
    std::size_t i = 0;
    for (double v : values) g.data[i++] = v;
    return g;
}

bool ValueGrid::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string ValueGrid::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool operator==(const ValueGrid& a, const ValueGrid& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

void require_same_shape(const ValueGrid& a, const ValueGrid& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
    }
}

}  // namespace smn
