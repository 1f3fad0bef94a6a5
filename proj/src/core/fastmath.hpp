// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace smn::fastmath {

/// s[i] = sin(omega * x[i]), c[i] = cos(omega * x[i]).
/// Cody-Waite reduction + minimax polynomials, auto-vectorizable; arguments
/// with |omega*x| beyond ~1.6e6 fall back to libm. Max abs error < 1e-14.
void sincos_scaled(const double* x, double omega, double* s, double* c, std::size_t n);

/// out[i] = sin(omega * x[i]).
void sin_scaled(const double* x, double omega, double* out, std::size_t n);

/// Scalar reference path (same algorithm as the array versions).
void sincos1(double x, double& s, double& c);

}  // namespace smn::fastmath
