// SPDX-License-Identifier: Apache-2.0
#include "core/fastmath.hpp"

#include <cmath>
#include <cstdint>

namespace smn::fastmath {
namespace {

// 2/pi and pi/2 split per fdlibm: pio2_1 keeps 33 mantissa bits so
// j * pio2_1 is exact for |j| < 2^20.
constexpr double kInvPio2 = 0x1.45f306dc9c883p-1;
constexpr double kPio2Hi = 0x1.921fb544p+0;
constexpr double kPio2Lo = 0x1.0b4611a626331p-34;

// fdlibm kernel polynomials on [-pi/4, pi/4].
constexpr double S1 = -1.66666666666666324348e-01;
constexpr double S2 = 8.33333333332248946124e-03;
constexpr double S3 = -1.98412698298579493134e-04;
constexpr double S4 = 2.75573137070700676789e-06;
constexpr double S5 = -2.50507602534068634195e-08;
constexpr double S6 = 1.58969099521155010221e-10;
constexpr double C1 = 4.16666666666666019037e-02;
constexpr double C2 = -1.38888888888741095749e-03;
constexpr double C3 = 2.48015872894767294178e-05;
constexpr double C4 = -2.75573143513906633035e-07;
constexpr double C5 = 2.08757232129817482790e-09;
constexpr double C6 = -1.13596475577881948265e-11;

// Largest |argument| handled by the two-part reduction.
constexpr double kRangeLimit = 1.0e6;

inline void sincos_core(double x, double& s, double& c) {
    double j = std::nearbyint(x * kInvPio2);
    double r = x - j * kPio2Hi;
    r -= j * kPio2Lo;
    std::int64_t q = static_cast<std::int64_t>(j);

    double r2 = r * r;
    double sr = r + r * r2 * (S1 + r2 * (S2 + r2 * (S3 + r2 * (S4 + r2 * (S5 + r2 * S6)))));
    double cr =
        1.0 - 0.5 * r2 + r2 * r2 * (C1 + r2 * (C2 + r2 * (C3 + r2 * (C4 + r2 * (C5 + r2 * C6)))));

    bool swap = (q & 1) != 0;
    double ss = swap ? cr : sr;
    double cc = swap ? sr : cr;
    std::int64_t qq = q & 3;  // two's complement low bits == mod 4 for negatives
    s = (qq == 2 || qq == 3) ? -ss : ss;
    c = (qq == 1 || qq == 2) ? -cc : cc;
}

}  // namespace

void sincos1(double x, double& s, double& c) {
    if (std::fabs(x) > kRangeLimit || !std::isfinite(x)) {
        s = std::sin(x);
        c = std::cos(x);
        return;
    }
    sincos_core(x, s, c);
}

void sincos_scaled(const double* x, double omega, double* s, double* c, std::size_t n) {
    constexpr std::size_t kBlock = 512;
    for (std::size_t base = 0; base < n; base += kBlock) {
        const std::size_t m = (n - base < kBlock) ? (n - base) : kBlock;
        const double* xb = x + base;
        double maxabs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double t = std::fabs(omega * xb[i]);
            maxabs = (t > maxabs) ? t : maxabs;
        }
        if (maxabs <= kRangeLimit) {
            double* sb = s + base;
            double* cb = c + base;
            for (std::size_t i = 0; i < m; ++i) {
                sincos_core(omega * xb[i], sb[i], cb[i]);
            }
        } else {  // rare: out-of-range or non-finite input in the block
            for (std::size_t i = 0; i < m; ++i) {
                sincos1(omega * xb[i], s[base + i], c[base + i]);
            }
        }
    }
}

void sin_scaled(const double* x, double omega, double* out, std::size_t n) {
    constexpr std::size_t kBlock = 512;
    double cos_scratch[kBlock];
    for (std::size_t base = 0; base < n; base += kBlock) {
        const std::size_t m = (n - base < kBlock) ? (n - base) : kBlock;
        sincos_scaled(x + base, omega, out + base, cos_scratch, m);
    }
}

}  // namespace smn::fastmath
