// SPDX-License-Identifier: Apache-2.0
#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace smn {

double Spectrum::energy() const {
    if (magnitudes.empty()) return 0.0;
    double acc = magnitudes.front() * magnitudes.front();
    for (std::size_t k = 1; k + 1 < magnitudes.size(); ++k) {
        acc += 2.0 * magnitudes[k] * magnitudes[k];
    }
    if (magnitudes.size() > 1) acc += magnitudes.back() * magnitudes.back();
    return acc;
}

double Spectrum::magnitude_near(double freq) const {
    if (magnitudes.empty() || bin_width <= 0.0) return 0.0;
    const auto k = static_cast<std::size_t>(
        std::clamp(std::llround(freq / bin_width), 0LL,
                   static_cast<long long>(magnitudes.size() - 1)));
    return magnitudes[k];
}

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw DimensionError("fft_radix2: size must be a power of two, got " + std::to_string(n));
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

Spectrum spectrum_1d(std::span<const double> samples, double sample_spacing) {
    if (samples.empty()) throw DimensionError("spectrum_1d: empty input");
    if (!(sample_spacing > 0.0)) throw ConfigError("spectrum_1d: sample_spacing must be positive");
    std::size_t n = 1;
    while (n < samples.size()) n <<= 1;
    std::vector<std::complex<double>> a(n, {0.0, 0.0});
    for (std::size_t i = 0; i < samples.size(); ++i) a[i] = {samples[i], 0.0};
    fft_radix2(a);
    Spectrum s;
    s.bin_width = 1.0 / (static_cast<double>(n) * sample_spacing);
    const std::size_t half = n / 2;
    s.frequencies.resize(half + 1);
    s.magnitudes.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        s.frequencies[k] = static_cast<double>(k) * s.bin_width;
        s.magnitudes[k] = std::abs(a[k]);
    }
    return s;
}

std::vector<double> peak_frequencies(const Spectrum& s, double floor_db) {
    if (!(floor_db < 0.0)) throw ConfigError("peak_frequencies: floor_db must be negative");
    std::vector<double> peaks;
    if (s.magnitudes.size() < 2) return peaks;
    const double maxmag = *std::max_element(s.magnitudes.begin(), s.magnitudes.end());
    if (maxmag <= 0.0) return peaks;
    const double floor = maxmag * std::pow(10.0, floor_db / 20.0);
    const auto& m = s.magnitudes;
    const std::size_t last = m.size() - 1;
    std::size_t prev_bin = 0;
    bool have_prev = false;
    for (std::size_t k = 0; k <= last; ++k) {
        const double left = (k == 0) ? 0.0 : m[k - 1];
        const double right = (k == last) ? 0.0 : m[k + 1];
        if (m[k] >= floor && m[k] >= left && m[k] > right) {
            if (have_prev && k - prev_bin <= 1) {  // merge within one bin
                if (m[k] > m[prev_bin]) {
                    peaks.back() = s.frequencies[k];
                    prev_bin = k;
                }
                continue;
            }
            peaks.push_back(s.frequencies[k]);
            prev_bin = k;
            have_prev = true;
        }
    }
    return peaks;
}

Spectrum harmonic_probe(double omega, int depth, std::size_t n) {
    if (!(omega > 0.0)) throw ConfigError("harmonic_probe: omega must be positive");
    if (depth < 1) throw ConfigError("harmonic_probe: depth must be >= 1");
    std::vector<double> y(n);
    const double dt = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::sin(2.0 * std::numbers::pi * omega * static_cast<double>(i) * dt);
        for (int d = 1; d < depth; ++d) v = std::sin(v);
        y[i] = v;
    }
    return spectrum_1d(y, dt);
}

void save_spectrum(const Spectrum& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_spectrum: cannot open " + path);
    out.precision(17);
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        out << s.frequencies[k] << ' ' << s.magnitudes[k] << '\n';
    }
    if (!out) throw std::runtime_error("save_spectrum: write failed for " + path);
}

}  // namespace smn
