// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "core/grid.hpp"
#include "core/tape.hpp"

namespace smn {

/// First-stage parameters: affine map plus a learnable mixture of fixed-
/// frequency sines, z = sum_i a_i * sin(omega_i * (W0 x + b0)).
struct OscillatorParams {
    ValueGrid w0;          // hidden x in_dim
    ValueGrid b0;          // hidden x 1
    ValueGrid amplitudes;  // K x 1
    std::vector<double> omegas;  // K fixed positive frequencies, never trained
    bool amplitudes_learnable = true;

    std::size_t k() const { return omegas.size(); }

    /// W0, b0 ~ U[-1/in_dim, 1/in_dim]; amplitudes start at 1/K.
    static OscillatorParams init(std::size_t in_dim, std::size_t hidden,
                                 std::span<const double> omegas, bool amplitudes_learnable,
                                 Rng& rng);
};

/// Node ids of the oscillator's parameters within a tape, for gradient export.
struct OscillatorNodes {
    Tape::NodeId w0 = -1, b0 = -1, amplitudes = -1;
};

/// Registers parameters on the tape and applies the stage to coords
/// (in_dim x N), returning the hidden x N activation node.
Tape::NodeId oscillator_forward(Tape& tape, const OscillatorParams& p, Tape::NodeId coords,
                                OscillatorNodes* nodes = nullptr);

/// d(loss)/d(a_i) given an upstream gradient, computed directly from the
/// definition: <sin(omega_i * v), upstream> summed over all elements.
/// The tape's backward produces the same values; this is the spelled-out form.
std::vector<double> amplitude_gradients(const OscillatorParams& p, const ValueGrid& pre_activation,
                                        const ValueGrid& upstream);

}  // namespace smn
