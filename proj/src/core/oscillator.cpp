// SPDX-License-Identifier: Apache-2.0
#include "core/oscillator.hpp"

#include <cmath>

namespace smn {

OscillatorParams OscillatorParams::init(std::size_t in_dim, std::size_t hidden,
                                        std::span<const double> omegas, bool amplitudes_learnable,
                                        Rng& rng) {
    if (omegas.empty()) throw ConfigError("oscillator: omegas must be non-empty");
    for (double w : omegas) {
        if (!(w > 0.0)) throw ConfigError("oscillator: omegas must be positive");
    }
    OscillatorParams p;
    p.omegas.assign(omegas.begin(), omegas.end());
    p.amplitudes_learnable = amplitudes_learnable;
    const double bound = 1.0 / static_cast<double>(in_dim);
    p.w0.reshape(hidden, in_dim);
    rng.fill_uniform(p.w0, -bound, bound);
    p.b0.reshape(hidden, 1);
    rng.fill_uniform(p.b0, -bound, bound);
    p.amplitudes.reshape(omegas.size(), 1);
    p.amplitudes.fill(1.0 / static_cast<double>(omegas.size()));
    return p;
}

Tape::NodeId oscillator_forward(Tape& tape, const OscillatorParams& p, Tape::NodeId coords,
                                OscillatorNodes* nodes) {
    const ValueGrid& x = tape.value(coords);
    if (x.rows != p.w0.cols) {
        throw DimensionError("oscillator_forward: coords must have " + std::to_string(p.w0.cols) +
                             " rows, got " + x.shape_str());
    }
    Tape::NodeId w0 = tape.leaf(p.w0);
    Tape::NodeId b0 = tape.leaf(p.b0);
    Tape::NodeId a = tape.leaf(p.amplitudes);
    if (nodes) *nodes = {w0, b0, a};
    Tape::NodeId pre = tape.affine(w0, coords, b0);
    return tape.oscillator(pre, a, p.omegas);
}

std::vector<double> amplitude_gradients(const OscillatorParams& p, const ValueGrid& pre_activation,
                                        const ValueGrid& upstream) {
    require_same_shape(pre_activation, upstream, "amplitude_gradients");
    std::vector<double> grads(p.k(), 0.0);
    for (std::size_t i = 0; i < p.k(); ++i) {
        const double w = p.omegas[i];
        double acc = 0.0;
        for (std::size_t e = 0; e < pre_activation.size(); ++e) {
            acc += std::sin(w * pre_activation.data[e]) * upstream.data[e];
        }
        grads[i] = acc;
    }
    return grads;
}

}  // namespace smn
