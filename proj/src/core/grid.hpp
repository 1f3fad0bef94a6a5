// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace smn {

/// Thrown when operand shapes do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown on invalid configuration fields; message names the field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense 2-D array of doubles, row-major. The single tensor type used for
/// activations, weights and gradients.
struct ValueGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    ValueGrid() = default;
    ValueGrid(std::size_t r, std::size_t c, double value = 0.0)
        : rows(r), cols(c), data(r * c, value) {}

    static ValueGrid from(std::size_t r, std::size_t c, std::initializer_list<double> values);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return rows * cols; }
    bool empty() const { return size() == 0; }
    bool same_shape(const ValueGrid& o) const { return rows == o.rows && cols == o.cols; }
    bool is_scalar() const { return rows == 1 && cols == 1; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    /// Resize without preserving contents.
    void reshape(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.resize(r * c);
    }

    bool all_finite() const;
    std::string shape_str() const;  // e.g. "3x4"
};

bool operator==(const ValueGrid& a, const ValueGrid& b);

/// Throws DimensionError naming both shapes unless a and b match exactly.
void require_same_shape(const ValueGrid& a, const ValueGrid& b, const char* op);

/// SplitMix64. Counter-based, platform-stable: identical seeds produce
/// identical streams everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    void fill_uniform(ValueGrid& g, double lo, double hi) {
        for (double& v : g.data) v = uniform(lo, hi);
    }

    /// Derives an independent stream (e.g. one per ablation cell).
    Rng split() { return Rng(next_u64()); }

private:
    std::uint64_t state_;
};

}  // namespace smn
