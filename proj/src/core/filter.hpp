// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "core/grid.hpp"
#include "core/tape.hpp"

namespace smn {

enum class Combine { Multiply, Add };

/// Seeds the mask pathway once: m = sin(W_mask z + b_mask).
struct MaskSeedParams {
    ValueGrid w;  // hidden x hidden
    ValueGrid b;  // hidden x 1
};

/// One filter module: main layer, mask-evolution layer, and how the evolved
/// mask is combined with the main signal. Multiply is the canonical form;
/// Add is the additive ablation variant.
struct FilterModuleParams {
    ValueGrid main_w, main_b;
    ValueGrid mod_w, mod_b;
    Combine combine = Combine::Multiply;
};

struct FilterStackConfig {
    std::size_t num_modules = 2;
    bool self_mask = true;
    std::size_t hidden = 256;
};

struct FilterStack {
    MaskSeedParams seed;
    std::vector<FilterModuleParams> modules;
    FilterStackConfig cfg;

    /// Hidden affine layers drawn from U[-sqrt(6/hidden), sqrt(6/hidden)].
    /// num_modules == 0 degenerates to identity (+ optional self-mask); the
    /// seed is still initialized so the struct round-trips.
    static FilterStack init(const FilterStackConfig& cfg, Rng& rng);

    /// Trainable scalars: seed + per-module main/mod affine layers.
    std::size_t parameter_count() const;
};

/// Parameter node ids registered by filter_forward, in a fixed order:
/// seed.w, seed.b, then per module main_w, main_b, mod_w, mod_b.
struct FilterNodes {
    Tape::NodeId seed_w = -1, seed_b = -1;
    struct Module {
        Tape::NodeId main_w, main_b, mod_w, mod_b;
    };
    std::vector<Module> modules;
};

/// Runs the filter stage on the oscillator output z (hidden x N):
///   m = sin(W_mask z + b_mask)                    -- mask seeded once
///   per module: zh = z + m                        -- additive modulation
///               z  = sin(W_main zh + b_main)
///               m  = sin(W_mod m + b_mod)         -- mask evolves from mask only
///               z  = combine(z, m)                -- multiply (canonical) or add
///   finally z = z^2 when self_mask is on.
Tape::NodeId filter_forward(Tape& tape, const FilterStack& stack, Tape::NodeId z_osc,
                            FilterNodes* nodes = nullptr);

/// Flips every module to additive combination; parameters are untouched.
void make_smn_add_variant(std::vector<FilterModuleParams>& modules);

}  // namespace smn
