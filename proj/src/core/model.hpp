// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/filter.hpp"
#include "core/grid.hpp"
#include "core/oscillator.hpp"
#include "core/tape.hpp"

namespace smn {

/// Raised when a forward pass finds non-finite parameters; message carries
/// the parameter path.
class ModelFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Arch { Smn, MlpRelu, Siren, Gauss };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& name);  // accepts "smn-add" as smn + all-add

struct ModelConfig {
    Arch arch = Arch::Smn;
    int in_dim = 2;
    int out_dim = 3;
    int hidden = 256;
    // smn
    int k = 3;
    std::vector<double> omegas = {8.0, 40.0, 120.0};
    bool amplitudes_learnable = true;
    int num_modules = 2;  // 0 is the degenerate test-only stack
    bool self_mask = true;
    std::vector<Combine> combine;  // empty means multiply everywhere
    // baselines
    int depth = 4;        // hidden layer count for mlp/siren/gauss
    double omega0 = 40.0; // siren
    double s0 = 30.0;     // gauss
    int pe_octaves = 0;   // 0 disables the positional encoding
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError naming the offending field
    bool all_add() const;

    static ModelConfig parse(const std::string& json_text);
    std::string serialize() const;  // normalized form; parse(serialize(x)) == x
};

/// gamma(x) = [sin(Bx); cos(Bx)], B fixed (never trained).
struct PositionalEncoding {
    ValueGrid b;  // num_freqs x in_dim

    /// Octave-spaced axis-aligned rows: pi * 2^j along each input dimension,
    /// j = 0..num_octaves-1 (j-major, then dimension).
    static PositionalEncoding octaves(int in_dim, int num_octaves);
    std::size_t out_dim() const { return 2 * b.rows; }
};

ValueGrid positional_encode(const PositionalEncoding& pe, const ValueGrid& coords);
Tape::NodeId positional_encode(Tape& tape, const PositionalEncoding& pe, Tape::NodeId coords);

struct ParamView {
    std::string name;
    ValueGrid* value;
    bool trainable;
};

class Model {
public:
    /// Deterministic construction from cfg.seed.
    static Model build(const ModelConfig& cfg);

    struct ForwardResult {
        Tape::NodeId output;
        /// One node per parameter_views() entry, same order.
        std::vector<Tape::NodeId> param_nodes;
    };
    /// Registers parameters and builds the graph; coords is in_dim x N.
    ForwardResult forward(Tape& tape, Tape::NodeId coords) const;

    /// Tape-free evaluation, batched internally; out_dim x N, not clamped.
    ValueGrid predict(const ValueGrid& coords) const;

    std::vector<ParamView> parameter_views();
    std::size_t parameter_count() const;  // trainable scalars only
    const ModelConfig& config() const { return cfg_; }

    void save(const std::string& path) const;
    static Model load(const std::string& path);

private:
    struct AffineLayer {
        ValueGrid w, b;
    };

    ModelConfig cfg_;
    PositionalEncoding pe_;    // empty b when unused
    OscillatorParams osc_;     // smn only
    FilterStack filter_;       // smn only
    std::vector<AffineLayer> layers_;  // baseline hidden layers
    AffineLayer head_;

    void check_parameters_finite() const;
};

/// Closed-form trainable-parameter count for a config (cross-checked against
/// enumeration in tests).
std::size_t parameter_count_formula(const ModelConfig& cfg);

}  // namespace smn
