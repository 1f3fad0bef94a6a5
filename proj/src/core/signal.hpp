// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace smn {

/// Target signal: pixels in [0,1], row-major, channel-interleaved.
struct ImageSignal {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 or 3
    std::vector<double> pixels;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t value_count() const { return pixel_count() * channels; }
    double& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    static ImageSignal solid(int width, int height, int channels, double value);
    void validate() const;  // shape/range invariants
};

/// Normalized input coordinates, 2 x (width*height); column j corresponds to
/// pixel j in the image's row-major order. x spans columns, y spans rows,
/// both linearly over [-1, 1] inclusive (corner pixels at exactly +-1).
ValueGrid make_grid(int width, int height);

/// channels x N target matrix in the same column order as make_grid.
ValueGrid image_to_targets(const ImageSignal& img);

/// Inverse of image_to_targets; values clamped to [0,1].
ImageSignal targets_to_image(const ValueGrid& t, int width, int height);

/// 10*log10(1/MSE) with peak 1.0; pred clamped to [0,1] first; capped at 99 dB
/// (identical inputs report the cap).
double psnr(const ValueGrid& pred, const ValueGrid& target);
double psnr(const ImageSignal& a, const ImageSignal& b);

ImageSignal center_crop(const ImageSignal& img, int width, int height);

/// Deterministic procedural targets; kind is one of
///   "gray"     constant 0.5
///   "grating"  diagonal tone grating
///   "checker"  checkerboard, 8px cells
///   "natural"  1/f random-phase field with edge features, photo-like stats
ImageSignal testcard(const std::string& kind, int width, int height, std::uint64_t seed);

}  // namespace smn
