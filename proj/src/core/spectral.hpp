// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace smn {

/// One-sided magnitude spectrum. magnitudes[k] = |X_k| of the length-n DFT
/// for k = 0..n/2; frequencies in cycles per unit of the sample spacing.
struct Spectrum {
    std::vector<double> frequencies;
    std::vector<double> magnitudes;
    double bin_width = 0.0;

    /// Discrete Parseval energy: |X_0|^2 + |X_{n/2}|^2 + 2*sum interior |X_k|^2,
    /// which equals n * sum x_i^2 for real signals.
    double energy() const;

    /// Magnitude at the bin nearest to freq (cycles/unit).
    double magnitude_near(double freq) const;
};

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// Magnitude spectrum of uniformly sampled data; zero-pads to the next power
/// of two. sample_spacing is the time step between samples.
Spectrum spectrum_1d(std::span<const double> samples, double sample_spacing);

/// Local maxima above floor_db (relative to the global maximum), merged
/// within one bin; sorted ascending.
std::vector<double> peak_frequencies(const Spectrum& s, double floor_db);

/// Spectrum of the depth-fold composition sin(sin(...sin(2*pi*omega*t)))
/// sampled n times over t in [0,1). omega is in cycles per unit, so an
/// integer omega lands exactly on a bin.
Spectrum harmonic_probe(double omega, int depth, std::size_t n = 4096);

/// Two-column text: frequency magnitude, one bin per line.
void save_spectrum(const Spectrum& s, const std::string& path);

}  // namespace smn
