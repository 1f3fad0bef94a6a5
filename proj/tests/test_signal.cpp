// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>

#include "core/image_io.hpp"
#include "core/signal.hpp"
#include "core/spectral.hpp"

using namespace smn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("smn_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("pixel scaling: 255 -> 1.0 and 0 -> 0.0, with quantization bound on round trip") {
    TempDir tmp;
    ImageSignal img = ImageSignal::solid(8, 8, 3, 0.0);
    img.at(0, 0, 0) = 1.0;
    img.at(1, 0, 1) = 0.0;
    Rng rng(2);
    for (std::size_t i = 6; i < img.pixels.size(); ++i) img.pixels[i] = rng.uniform();
    const std::string path = (tmp.path / "rt.png").string();
    save_image(img, path);
    ImageSignal back = load_image(path);
    REQUIRE(back.width == 8);
    REQUIRE(back.channels == 3);
    CHECK(back.at(0, 0, 0) == 1.0);
    CHECK(back.at(1, 0, 1) == 0.0);
    double max_err = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        max_err = std::max(max_err, std::fabs(img.pixels[i] - back.pixels[i]));
    }
    CHECK(max_err <= 1.0 / (2.0 * 255.0));
}

TEST_CASE("binary ppm and pgm round trip") {
    TempDir tmp;
    ImageSignal rgb = testcard("natural", 16, 12, 7);
    const std::string ppm = (tmp.path / "x.ppm").string();
    save_image(rgb, ppm);
    ImageSignal back = load_image(ppm);
    CHECK(back.width == 16);
    CHECK(back.height == 12);
    CHECK(back.channels == 3);
    double max_err = 0.0;
    for (std::size_t i = 0; i < rgb.pixels.size(); ++i) {
        max_err = std::max(max_err, std::fabs(rgb.pixels[i] - back.pixels[i]));
    }
    CHECK(max_err <= 1.0 / (2.0 * 255.0));

    ImageSignal gray = testcard("grating", 9, 5, 0);
    const std::string pgm = (tmp.path / "g.pgm").string();
    save_image(gray, pgm);
    ImageSignal gback = load_image(pgm);
    CHECK(gback.channels == 1);
    CHECK(gback.width == 9);
}

TEST_CASE("unreadable and unsupported files raise") {
    CHECK_THROWS_AS(load_image("/nonexistent/nope.png"), std::runtime_error);
    CHECK_THROWS_AS(load_image("/nonexistent/nope.bmp"), ConfigError);
}

TEST_CASE("make_grid endpoints and ordering") {
    ValueGrid g = make_grid(2, 2);
    REQUIRE(g.rows == 2);
    REQUIRE(g.cols == 4);
    CHECK(g.at(0, 0) == -1.0);  // pixel 0 = top-left
    CHECK(g.at(1, 0) == -1.0);
    CHECK(g.at(0, 1) == 1.0);
    CHECK(g.at(1, 1) == -1.0);
    CHECK(g.at(0, 2) == -1.0);
    CHECK(g.at(1, 2) == 1.0);
    CHECK(g.at(0, 3) == 1.0);
    CHECK(g.at(1, 3) == 1.0);

    ValueGrid row = make_grid(3, 2);
    CHECK(row.at(0, 0) == -1.0);
    CHECK(row.at(0, 1) == 0.0);
    CHECK(row.at(0, 2) == 1.0);

    // multiset of x-coordinates closed under negation
    ValueGrid g2 = make_grid(7, 5);
    std::multiset<double> xs(g2.row(0), g2.row(0) + g2.cols);
    for (double x : xs) CHECK(xs.count(-x) == xs.count(x));

    CHECK_THROWS_AS(make_grid(1, 5), DimensionError);
}

TEST_CASE("grid columns map to pixels bijectively") {
    ImageSignal img = testcard("natural", 6, 4, 1);
    ValueGrid targets = image_to_targets(img);
    REQUIRE(targets.cols == img.pixel_count());
    for (std::size_t j = 0; j < targets.cols; ++j) {
        for (int c = 0; c < 3; ++c) {
            CHECK(targets.at(c, j) == img.pixels[j * 3 + c]);
        }
    }
    ImageSignal back = targets_to_image(targets, 6, 4);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("psnr: analytic value, cap, and symmetry") {
    ValueGrid a(1, 100, 0.0), b(1, 100, 0.0);
    for (std::size_t i = 0; i < 100; ++i) b.data[i] = 0.01;  // mse = 1e-4
    CHECK(psnr(a, b) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(psnr(a, a) == 99.0);
    CHECK(psnr(a, b) == psnr(b, a));

    // pred clamped to [0,1] before comparison
    ValueGrid wild(1, 100, 2.0), ones(1, 100, 1.0);
    CHECK(psnr(wild, ones) == 99.0);
}

TEST_CASE("spectrum of a pure tone has a single dominant peak") {
    const std::size_t n = 1024;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(2.0 * std::numbers::pi * 5.0 * i / n);
    Spectrum s = spectrum_1d(y, 1.0 / n);
    auto peaks = peak_frequencies(s, -40.0);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == doctest::Approx(5.0));
}

TEST_CASE("product of tones lands only on difference and sum frequencies") {
    const std::size_t n = 1024;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        y[i] = std::sin(2.0 * std::numbers::pi * 3.0 * t) *
               std::sin(2.0 * std::numbers::pi * 10.0 * t);
    }
    auto peaks = peak_frequencies(spectrum_1d(y, 1.0 / n), -40.0);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0] == doctest::Approx(7.0));
    CHECK(peaks[1] == doctest::Approx(13.0));
}

TEST_CASE("squared tone lands on dc and the doubled frequency") {
    const std::size_t n = 1024;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tone = std::sin(2.0 * std::numbers::pi * 5.0 * i / n);
        y[i] = tone * tone;
    }
    auto peaks = peak_frequencies(spectrum_1d(y, 1.0 / n), -40.0);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0] == doctest::Approx(0.0));
    CHECK(peaks[1] == doctest::Approx(10.0));
}

TEST_CASE("parseval identity holds on random signals") {
    Rng rng(11);
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t n = 512;
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform(-1.0, 1.0);
        Spectrum s = spectrum_1d(y, 1.0 / n);
        double energy = 0.0;
        for (double v : y) energy += v * v;
        CHECK(s.energy() == doctest::Approx(n * energy).epsilon(1e-9));
    }
}

TEST_CASE("additive spectra stay within input support; multiplicative do not") {
    const std::size_t n = 2048;
    std::vector<double> a(n), b(n), add(n), mul(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        a[i] = std::sin(2.0 * std::numbers::pi * 4.0 * t);
        b[i] = 0.7 * std::sin(2.0 * std::numbers::pi * 9.0 * t);
        add[i] = a[i] + b[i];
        mul[i] = a[i] * b[i];
    }
    std::set<int> support = {4, 9};
    for (double p : peak_frequencies(spectrum_1d(add, 1.0 / n), -40.0)) {
        CHECK(support.count(static_cast<int>(std::lround(p))) == 1);
    }
    bool outside = false;
    for (double p : peak_frequencies(spectrum_1d(mul, 1.0 / n), -40.0)) {
        if (support.count(static_cast<int>(std::lround(p))) == 0) outside = true;
    }
    CHECK(outside);
}

TEST_CASE("spectrum rejects empty input; fft rejects non power of two") {
    CHECK_THROWS_AS(spectrum_1d(std::span<const double>(), 1.0), DimensionError);
    std::vector<std::complex<double>> v(3);
    CHECK_THROWS_AS(fft_radix2(v), DimensionError);
}

TEST_CASE("zero padding keeps the dominant peak near the tone") {
    const std::size_t n = 1000;  // not a power of two
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(2.0 * std::numbers::pi * 50.0 * i / n);
    Spectrum s = spectrum_1d(y, 1.0 / n);
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k) {
        if (s.magnitudes[k] > s.magnitudes[argmax]) argmax = k;
    }
    CHECK(std::fabs(s.frequencies[argmax] - 50.0) <= 2.0 * s.bin_width);
}

TEST_CASE("testcards are deterministic and in range") {
    ImageSignal a = testcard("natural", 32, 32, 5);
    ImageSignal b = testcard("natural", 32, 32, 5);
    CHECK(a.pixels == b.pixels);
    ImageSignal c = testcard("natural", 32, 32, 6);
    CHECK(a.pixels != c.pixels);
    a.validate();
    testcard("checker", 16, 16, 0).validate();
    testcard("grating", 16, 16, 0).validate();
    CHECK_THROWS_AS(testcard("nope", 16, 16, 0), ConfigError);
}

TEST_CASE("center_crop takes the middle region") {
    ImageSignal img = testcard("natural", 32, 32, 3);
    ImageSignal crop = center_crop(img, 16, 16);
    CHECK(crop.width == 16);
    CHECK(crop.at(0, 0, 0) == img.at(8, 8, 0));
    CHECK_THROWS_AS(center_crop(img, 64, 64), DimensionError);
}
