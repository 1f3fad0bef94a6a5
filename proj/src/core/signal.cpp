// SPDX-License-Identifier: Apache-2.0
#include "core/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smn {

ImageSignal ImageSignal::solid(int width, int height, int channels, double value) {
    ImageSignal img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.pixels.assign(static_cast<std::size_t>(width) * height * channels, value);
    return img;
}

void ImageSignal::validate() const {
    if (width < 1 || height < 1) throw ConfigError("image: degenerate size");
    if (channels != 1 && channels != 3) throw ConfigError("image: channels must be 1 or 3");
    if (pixels.size() != value_count()) throw ConfigError("image: pixel buffer size mismatch");
    for (double p : pixels) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("image: pixel outside [0,1]");
    }
}

ValueGrid make_grid(int width, int height) {
    if (width < 2 || height < 2) {
        throw DimensionError("make_grid: width and height must be >= 2, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    ValueGrid g(2, static_cast<std::size_t>(width) * height);
    // (2i - (n-1)) / (n-1): endpoints are exactly +-1 and the coordinate
    // multiset is exactly closed under negation
    std::size_t j = 0;
    for (int y = 0; y < height; ++y) {
        const double cy = static_cast<double>(2 * y - (height - 1)) / (height - 1);
        for (int x = 0; x < width; ++x, ++j) {
            g.at(0, j) = static_cast<double>(2 * x - (width - 1)) / (width - 1);
            g.at(1, j) = cy;
        }
    }
    return g;
}

ValueGrid image_to_targets(const ImageSignal& img) {
    ValueGrid t(img.channels, img.pixel_count());
    for (std::size_t j = 0; j < img.pixel_count(); ++j) {
        for (int c = 0; c < img.channels; ++c) {
            t.at(c, j) = img.pixels[j * img.channels + c];
        }
    }
    return t;
}

ImageSignal targets_to_image(const ValueGrid& t, int width, int height) {
    if (t.cols != static_cast<std::size_t>(width) * height) {
        throw DimensionError("targets_to_image: " + std::to_string(t.cols) + " columns for " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    ImageSignal img;
    img.width = width;
    img.height = height;
    img.channels = static_cast<int>(t.rows);
    img.pixels.resize(t.size());
    for (std::size_t j = 0; j < t.cols; ++j) {
        for (std::size_t c = 0; c < t.rows; ++c) {
            img.pixels[j * t.rows + c] = std::clamp(t.at(c, j), 0.0, 1.0);
        }
    }
    return img;
}

namespace {

double psnr_from_mse(double mse) {
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

}  // namespace

double psnr(const ValueGrid& pred, const ValueGrid& target) {
    require_same_shape(pred, target, "psnr");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred.data[i], 0.0, 1.0);
        const double d = p - target.data[i];
        acc += d * d;
    }
    return psnr_from_mse(acc / static_cast<double>(pred.size()));
}

double psnr(const ImageSignal& a, const ImageSignal& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw DimensionError("psnr: image shapes differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double p = std::clamp(a.pixels[i], 0.0, 1.0);
        const double q = std::clamp(b.pixels[i], 0.0, 1.0);
        acc += (p - q) * (p - q);
    }
    return psnr_from_mse(acc / static_cast<double>(a.pixels.size()));
}

ImageSignal center_crop(const ImageSignal& img, int width, int height) {
    if (width > img.width || height > img.height) {
        throw DimensionError("center_crop: " + std::to_string(width) + "x" +
                             std::to_string(height) + " exceeds " + std::to_string(img.width) +
                             "x" + std::to_string(img.height));
    }
    const int x0 = (img.width - width) / 2;
    const int y0 = (img.height - height) / 2;
    ImageSignal out;
    out.width = width;
    out.height = height;
    out.channels = img.channels;
    out.pixels.resize(static_cast<std::size_t>(width) * height * img.channels);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
            }
        }
    }
    return out;
}

namespace {

ImageSignal natural_card(int width, int height, std::uint64_t seed) {
    // Random-phase plane waves with ~1/f amplitudes, then a few hard edges;
    // rough stand-in for natural-photo statistics.
    Rng rng(seed);
    ImageSignal img = ImageSignal::solid(width, height, 3, 0.0);
    constexpr int kWavesPerOctave = 6;
    constexpr int kOctaves = 6;
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> luma, cb, cr;
    for (int o = 0; o < kOctaves; ++o) {
        const double f = 0.75 * std::pow(2.0, o);  // cycles per image half-width
        const double amp = 1.0 / std::pow(f, 1.1);
        for (int w = 0; w < kWavesPerOctave; ++w) {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            Wave wave{f * std::cos(theta), f * std::sin(theta),
                      rng.uniform(0.0, 2.0 * std::numbers::pi), amp * rng.uniform(0.5, 1.0)};
            luma.push_back(wave);
            if (o < 3) {  // chroma varies slowly
                Wave cwave{f * std::cos(theta + 1.0), f * std::sin(theta + 1.0),
                           rng.uniform(0.0, 2.0 * std::numbers::pi), 0.4 * amp};
                (w % 2 == 0 ? cb : cr).push_back(cwave);
            }
        }
    }
    // edge features: two soft-edged disks and a bar
    const double dx1 = rng.uniform(-0.5, 0.5), dy1 = rng.uniform(-0.5, 0.5);
    const double dx2 = rng.uniform(-0.5, 0.5), dy2 = rng.uniform(-0.5, 0.5);
    const double bar_y = rng.uniform(-0.6, 0.6);

    auto eval_waves = [](const std::vector<Wave>& ws, double x, double y) {
        double acc = 0.0;
        for (const Wave& w : ws) {
            acc += w.amp * std::sin(std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
        }
        return acc;
    };

    std::vector<double> lum(img.pixel_count());
    double lo = 1e300, hi = -1e300;
    std::size_t j = 0;
    for (int y = 0; y < height; ++y) {
        const double ny = -1.0 + 2.0 * y / (height - 1);
        for (int x = 0; x < width; ++x, ++j) {
            const double nx = -1.0 + 2.0 * x / (width - 1);
            double v = eval_waves(luma, nx, ny);
            const double r1 = std::hypot(nx - dx1, ny - dy1);
            const double r2 = std::hypot(nx - dx2, ny - dy2);
            v += 0.9 * (1.0 / (1.0 + std::exp((r1 - 0.35) * 40.0)));
            v -= 0.7 * (1.0 / (1.0 + std::exp((r2 - 0.25) * 40.0)));
            v += 0.5 * (1.0 / (1.0 + std::exp((std::fabs(ny - bar_y) - 0.06) * 60.0)));
            lum[j] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = (hi > lo) ? hi - lo : 1.0;
    j = 0;
    for (int y = 0; y < height; ++y) {
        const double ny = -1.0 + 2.0 * y / (height - 1);
        for (int x = 0; x < width; ++x, ++j) {
            const double nx = -1.0 + 2.0 * x / (width - 1);
            const double l = 0.05 + 0.9 * (lum[j] - lo) / span;
            const double u = 0.12 * eval_waves(cb, nx, ny);
            const double v = 0.12 * eval_waves(cr, nx, ny);
            img.at(x, y, 0) = std::clamp(l + 1.14 * v, 0.0, 1.0);
            img.at(x, y, 1) = std::clamp(l - 0.39 * u - 0.58 * v, 0.0, 1.0);
            img.at(x, y, 2) = std::clamp(l + 2.03 * u, 0.0, 1.0);
        }
    }
    return img;
}

}  // namespace

ImageSignal testcard(const std::string& kind, int width, int height, std::uint64_t seed) {
    if (width < 2 || height < 2) throw ConfigError("testcard: size must be >= 2x2");
    if (kind == "gray") return ImageSignal::solid(width, height, 3, 0.5);
    if (kind == "grating") {
        ImageSignal img = ImageSignal::solid(width, height, 1, 0.0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double nx = -1.0 + 2.0 * x / (width - 1);
                const double ny = -1.0 + 2.0 * y / (height - 1);
                img.at(x, y, 0) = 0.5 + 0.5 * std::sin(8.0 * std::numbers::pi * (nx + 0.5 * ny));
            }
        }
        return img;
    }
    if (kind == "checker") {
        ImageSignal img = ImageSignal::solid(width, height, 1, 0.0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                img.at(x, y, 0) = (((x / 8) + (y / 8)) % 2 == 0) ? 0.15 : 0.85;
            }
        }
        return img;
    }
    if (kind == "natural") return natural_card(width, height, seed);
    throw ConfigError("testcard: unknown kind '" + kind + "'");
}

}  // namespace smn
