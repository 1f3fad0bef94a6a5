// SPDX-License-Identifier: Apache-2.0
#include "core/filter.hpp"

#include <cmath>

namespace smn {

FilterStack FilterStack::init(const FilterStackConfig& cfg, Rng& rng) {
    const std::size_t h = cfg.hidden;
    if (h < 1) throw ConfigError("filter: hidden must be >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(h));
    auto affine = [&](ValueGrid& w, ValueGrid& b) {
        w.reshape(h, h);
        rng.fill_uniform(w, -bound, bound);
        b.reshape(h, 1);
        rng.fill_uniform(b, -bound, bound);
    };
    FilterStack fs;
    fs.cfg = cfg;
    affine(fs.seed.w, fs.seed.b);
    fs.modules.resize(cfg.num_modules);
    for (auto& m : fs.modules) {
        affine(m.main_w, m.main_b);
        affine(m.mod_w, m.mod_b);
        m.combine = Combine::Multiply;
    }
    return fs;
}

std::size_t FilterStack::parameter_count() const {
    const std::size_t h = cfg.hidden;
    return h * (h + 1) * (1 + 2 * modules.size());
}

Tape::NodeId filter_forward(Tape& tape, const FilterStack& stack, Tape::NodeId z_osc,
                            FilterNodes* nodes) {
    const ValueGrid& zv = tape.value(z_osc);
    if (zv.rows != stack.cfg.hidden) {
        throw DimensionError("filter_forward: expected " + std::to_string(stack.cfg.hidden) +
                             " rows, got " + zv.shape_str());
    }
    FilterNodes local;
    FilterNodes& fn = nodes ? *nodes : local;
    fn.modules.clear();

    Tape::NodeId z = z_osc;
    Tape::NodeId m = -1;
    if (!stack.modules.empty()) {
        fn.seed_w = tape.leaf(stack.seed.w);
        fn.seed_b = tape.leaf(stack.seed.b);
        m = tape.sin_affine(fn.seed_w, z, fn.seed_b);
    }
    for (const auto& mod : stack.modules) {
        FilterNodes::Module mn;
        mn.main_w = tape.leaf(mod.main_w);
        mn.main_b = tape.leaf(mod.main_b);
        mn.mod_w = tape.leaf(mod.mod_w);
        mn.mod_b = tape.leaf(mod.mod_b);
        fn.modules.push_back(mn);

        Tape::NodeId zh = tape.add(z, m);
        z = tape.sin_affine(mn.main_w, zh, mn.main_b);
        m = tape.sin_affine(mn.mod_w, m, mn.mod_b);
        z = (mod.combine == Combine::Multiply) ? tape.mul(z, m) : tape.add(z, m);
    }
    if (stack.cfg.self_mask) z = tape.square(z);
    return z;
}

void make_smn_add_variant(std::vector<FilterModuleParams>& modules) {
    for (auto& m : modules) m.combine = Combine::Add;
}

}  // namespace smn
