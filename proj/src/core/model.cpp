// SPDX-License-Identifier: Apache-2.0
#include "core/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

namespace smn {

using nlohmann::json;

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::Smn: return "smn";
        case Arch::MlpRelu: return "mlp";
        case Arch::Siren: return "siren";
        case Arch::Gauss: return "gauss";
    }
    return "smn";
}

Arch arch_from_name(const std::string& name) {
    if (name == "smn" || name == "smn-add") return Arch::Smn;
    if (name == "mlp") return Arch::MlpRelu;
    if (name == "siren") return Arch::Siren;
    if (name == "gauss") return Arch::Gauss;
    throw ConfigError("arch: unknown architecture '" + name + "'");
}

bool ModelConfig::all_add() const {
    if (combine.empty()) return false;
    for (Combine c : combine) {
        if (c != Combine::Add) return false;
    }
    return true;
}

void ModelConfig::validate() const {
    if (in_dim < 1) throw ConfigError("in_dim: must be >= 1");
    if (out_dim < 1) throw ConfigError("out_dim: must be >= 1");
    if (hidden < 1) throw ConfigError("hidden: must be >= 1");
    if (pe_octaves < 0) throw ConfigError("pe_octaves: must be >= 0");
    if (arch == Arch::Smn) {
        if (k < 1 || k > 8) throw ConfigError("k: must be in 1..8");
        if (static_cast<int>(omegas.size()) != k) {
            throw ConfigError("omegas: expected " + std::to_string(k) + " entries, got " +
                              std::to_string(omegas.size()));
        }
        for (double w : omegas) {
            if (!(w > 0.0)) throw ConfigError("omegas: entries must be positive");
        }
        if (num_modules < 0) throw ConfigError("num_modules: must be >= 0");
        if (!combine.empty() && static_cast<int>(combine.size()) != num_modules) {
            throw ConfigError("combine: expected " + std::to_string(num_modules) +
                              " entries, got " + std::to_string(combine.size()));
        }
    } else {
        if (depth < 1) throw ConfigError("depth: must be >= 1");
        if (arch == Arch::Siren && !(omega0 > 0.0)) throw ConfigError("omega0: must be positive");
        if (arch == Arch::Gauss && !(s0 > 0.0)) throw ConfigError("s0: must be positive");
    }
}

namespace {

Combine combine_from_name(const std::string& s) {
    if (s == "mul" || s == "multiply") return Combine::Multiply;
    if (s == "add") return Combine::Add;
    throw ConfigError("combine: expected 'mul' or 'add', got '" + s + "'");
}

}  // namespace

ModelConfig ModelConfig::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config: invalid JSON: ") + e.what());
    }
    ModelConfig cfg;
    try {
        const std::string arch_str = j.value("arch", "smn");
        cfg.arch = arch_from_name(arch_str);
        cfg.in_dim = j.value("in_dim", cfg.in_dim);
        cfg.out_dim = j.value("out_dim", cfg.out_dim);
        cfg.hidden = j.value("hidden", cfg.hidden);
        if (cfg.arch == Arch::Smn) {
            cfg.k = j.value("k", cfg.k);
            if (j.contains("omegas")) {
                cfg.omegas = j.at("omegas").get<std::vector<double>>();
            } else if (cfg.k != 3) {
                throw ConfigError("omegas: required when k != 3");
            }
            cfg.amplitudes_learnable = j.value("amplitudes_learnable", cfg.amplitudes_learnable);
            cfg.num_modules = j.value("num_modules", cfg.num_modules);
            cfg.self_mask = j.value("self_mask", cfg.self_mask);
            cfg.combine.assign(static_cast<std::size_t>(std::max(cfg.num_modules, 0)),
                               Combine::Multiply);
            if (arch_str == "smn-add") {
                for (auto& c : cfg.combine) c = Combine::Add;
            }
            if (j.contains("combine")) {
                const auto names = j.at("combine").get<std::vector<std::string>>();
                cfg.combine.clear();
                for (const auto& s : names) cfg.combine.push_back(combine_from_name(s));
            }
        }
        cfg.depth = j.value("depth", cfg.depth);
        cfg.omega0 = j.value("omega0", cfg.omega0);
        cfg.s0 = j.value("s0", cfg.s0);
        cfg.pe_octaves = j.value("pe_octaves", cfg.pe_octaves);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string ModelConfig::serialize() const {
    json j;
    j["arch"] = arch_name(arch);
    j["in_dim"] = in_dim;
    j["out_dim"] = out_dim;
    j["hidden"] = hidden;
    if (arch == Arch::Smn) {
        j["k"] = k;
        j["omegas"] = omegas;
        j["amplitudes_learnable"] = amplitudes_learnable;
        j["num_modules"] = num_modules;
        j["self_mask"] = self_mask;
        std::vector<std::string> names;
        names.reserve(combine.size());
        for (Combine c : combine) names.emplace_back(c == Combine::Add ? "add" : "mul");
        if (names.empty()) names.assign(static_cast<std::size_t>(num_modules), "mul");
        j["combine"] = names;
    } else {
        j["depth"] = depth;
        if (arch == Arch::Siren) j["omega0"] = omega0;
        if (arch == Arch::Gauss) j["s0"] = s0;
    }
    if (pe_octaves > 0) j["pe_octaves"] = pe_octaves;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

PositionalEncoding PositionalEncoding::octaves(int in_dim, int num_octaves) {
    if (in_dim < 1 || num_octaves < 1) {
        throw ConfigError("pe_octaves: in_dim and octave count must be >= 1");
    }
    PositionalEncoding pe;
    pe.b.reshape(static_cast<std::size_t>(num_octaves) * in_dim, in_dim);
    pe.b.fill(0.0);
    std::size_t r = 0;
    for (int j = 0; j < num_octaves; ++j) {
        const double f = std::numbers::pi * std::pow(2.0, j);
        for (int d = 0; d < in_dim; ++d, ++r) pe.b.at(r, static_cast<std::size_t>(d)) = f;
    }
    return pe;
}

ValueGrid positional_encode(const PositionalEncoding& pe, const ValueGrid& coords) {
    if (coords.rows != pe.b.cols) {
        throw DimensionError("positional_encode: coords must have " + std::to_string(pe.b.cols) +
                             " rows, got " + coords.shape_str());
    }
    const std::size_t f = pe.b.rows;
    ValueGrid out(2 * f, coords.cols);
    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = 0; j < coords.cols; ++j) {
            double acc = 0.0;
            for (std::size_t d = 0; d < pe.b.cols; ++d) acc += pe.b.at(i, d) * coords.at(d, j);
            out.at(i, j) = std::sin(acc);
            out.at(f + i, j) = std::cos(acc);
        }
    }
    return out;
}

Tape::NodeId positional_encode(Tape& tape, const PositionalEncoding& pe, Tape::NodeId coords) {
    Tape::NodeId b = tape.leaf(pe.b);  // constant: gradient never exported
    Tape::NodeId bx = tape.matmul(b, coords);
    return tape.vstack(tape.sin(bx), tape.cos(bx));
}

namespace {

void init_affine(ValueGrid& w, ValueGrid& b, std::size_t out_dim, std::size_t in_dim, double bound,
                 Rng& rng) {
    w.reshape(out_dim, in_dim);
    rng.fill_uniform(w, -bound, bound);
    b.reshape(out_dim, 1);
    rng.fill_uniform(b, -bound, bound);
}

}  // namespace

Model Model::build(const ModelConfig& cfg) {
    cfg.validate();
    Model m;
    m.cfg_ = cfg;
    Rng rng(cfg.seed);

    std::size_t net_in = static_cast<std::size_t>(cfg.in_dim);
    if (cfg.pe_octaves > 0) {
        m.pe_ = PositionalEncoding::octaves(cfg.in_dim, cfg.pe_octaves);
        net_in = m.pe_.out_dim();
    }
    const auto h = static_cast<std::size_t>(cfg.hidden);
    const double hidden_bound = std::sqrt(6.0 / static_cast<double>(h));

    switch (cfg.arch) {
        case Arch::Smn: {
            m.osc_ = OscillatorParams::init(net_in, h, cfg.omegas, cfg.amplitudes_learnable, rng);
            FilterStackConfig fc;
            fc.num_modules = static_cast<std::size_t>(cfg.num_modules);
            fc.self_mask = cfg.self_mask;
            fc.hidden = h;
            m.filter_ = FilterStack::init(fc, rng);
            for (std::size_t i = 0; i < m.filter_.modules.size(); ++i) {
                m.filter_.modules[i].combine =
                    cfg.combine.empty() ? Combine::Multiply : cfg.combine[i];
            }
            init_affine(m.head_.w, m.head_.b, static_cast<std::size_t>(cfg.out_dim), h,
                        hidden_bound, rng);
            break;
        }
        case Arch::MlpRelu:
        case Arch::Siren:
        case Arch::Gauss: {
            const double w0 = cfg.omega0;
            m.layers_.resize(static_cast<std::size_t>(cfg.depth));
            for (int i = 0; i < cfg.depth; ++i) {
                const std::size_t fan_in = (i == 0) ? net_in : h;
                double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
                if (cfg.arch == Arch::Siren) {
                    // first layer +-1/fan_in, hidden +-sqrt(6/fan_in)/omega0
                    bound = (i == 0) ? 1.0 / static_cast<double>(fan_in) : bound / w0;
                } else if (cfg.arch == Arch::Gauss) {
                    // keep s0*(Wx+b) in the live range of exp(-(s0 x)^2)
                    bound /= cfg.s0;
                }
                init_affine(m.layers_[i].w, m.layers_[i].b, h, fan_in, bound, rng);
            }
            double head_bound = hidden_bound;
            if (cfg.arch == Arch::Siren) head_bound = hidden_bound / w0;
            init_affine(m.head_.w, m.head_.b, static_cast<std::size_t>(cfg.out_dim), h, head_bound,
                        rng);
            break;
        }
    }
    return m;
}

void Model::check_parameters_finite() const {
    auto check = [](const ValueGrid& g, const std::string& name) {
        if (!g.all_finite()) {
            throw ModelFault("model: non-finite parameter values in " + name);
        }
    };
    if (cfg_.arch == Arch::Smn) {
        check(osc_.w0, "osc.w0");
        check(osc_.b0, "osc.b0");
        check(osc_.amplitudes, "osc.a");
        check(filter_.seed.w, "filter.mask.w");
        check(filter_.seed.b, "filter.mask.b");
        for (std::size_t i = 0; i < filter_.modules.size(); ++i) {
            const auto& mod = filter_.modules[i];
            const std::string p = "filter.m" + std::to_string(i + 1);
            check(mod.main_w, p + ".main.w");
            check(mod.main_b, p + ".main.b");
            check(mod.mod_w, p + ".mod.w");
            check(mod.mod_b, p + ".mod.b");
        }
    } else {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            check(layers_[i].w, "layers." + std::to_string(i + 1) + ".w");
            check(layers_[i].b, "layers." + std::to_string(i + 1) + ".b");
        }
    }
    check(head_.w, "head.w");
    check(head_.b, "head.b");
}

Model::ForwardResult Model::forward(Tape& tape, Tape::NodeId coords) const {
    check_parameters_finite();
    const ValueGrid& cv = tape.value(coords);
    if (cv.rows != static_cast<std::size_t>(cfg_.in_dim)) {
        throw DimensionError("forward: coords must have " + std::to_string(cfg_.in_dim) +
                             " rows, got " + cv.shape_str());
    }

    ForwardResult res;
    Tape::NodeId x = coords;
    if (pe_.b.rows > 0) x = positional_encode(tape, pe_, x);

    if (cfg_.arch == Arch::Smn) {
        OscillatorNodes on;
        Tape::NodeId z = oscillator_forward(tape, osc_, x, &on);
        res.param_nodes = {on.w0, on.b0, on.amplitudes};
        if (!filter_.modules.empty()) {
            FilterNodes fn;
            z = filter_forward(tape, filter_, z, &fn);
            res.param_nodes.push_back(fn.seed_w);
            res.param_nodes.push_back(fn.seed_b);
            for (const auto& mn : fn.modules) {
                res.param_nodes.push_back(mn.main_w);
                res.param_nodes.push_back(mn.main_b);
                res.param_nodes.push_back(mn.mod_w);
                res.param_nodes.push_back(mn.mod_b);
            }
        } else if (filter_.cfg.self_mask) {
            z = tape.square(z);
        }
        Tape::NodeId hw = tape.leaf(head_.w);
        Tape::NodeId hb = tape.leaf(head_.b);
        res.param_nodes.push_back(hw);
        res.param_nodes.push_back(hb);
        res.output = tape.affine(hw, z, hb);
        return res;
    }

    Tape::NodeId z = x;
    for (const auto& layer : layers_) {
        Tape::NodeId w = tape.leaf(layer.w);
        Tape::NodeId b = tape.leaf(layer.b);
        res.param_nodes.push_back(w);
        res.param_nodes.push_back(b);
        switch (cfg_.arch) {
            case Arch::MlpRelu: z = tape.relu(tape.affine(w, z, b)); break;
            case Arch::Siren: z = tape.sin_affine(w, z, b, cfg_.omega0); break;
            case Arch::Gauss: z = tape.gauss(tape.affine(w, z, b), cfg_.s0); break;
            case Arch::Smn: break;  // unreachable
        }
    }
    Tape::NodeId hw = tape.leaf(head_.w);
    Tape::NodeId hb = tape.leaf(head_.b);
    res.param_nodes.push_back(hw);
    res.param_nodes.push_back(hb);
    res.output = tape.affine(hw, z, hb);
    return res;
}

ValueGrid Model::predict(const ValueGrid& coords) const {
    constexpr std::size_t kBatch = 65536;
    ValueGrid out(static_cast<std::size_t>(cfg_.out_dim), coords.cols);
    Tape tape;
    for (std::size_t j0 = 0; j0 < coords.cols; j0 += kBatch) {
        const std::size_t j1 = std::min(coords.cols, j0 + kBatch);
        ValueGrid block(coords.rows, j1 - j0);
        for (std::size_t r = 0; r < coords.rows; ++r) {
            std::copy(coords.row(r) + j0, coords.row(r) + j1, block.row(r));
        }
        tape.reset();
        auto fwd = forward(tape, tape.leaf(block));
        const ValueGrid& pred = tape.value(fwd.output);
        for (std::size_t r = 0; r < pred.rows; ++r) {
            std::copy(pred.row(r), pred.row(r) + pred.cols, out.row(r) + j0);
        }
    }
    return out;
}

std::vector<ParamView> Model::parameter_views() {
    std::vector<ParamView> views;
    if (cfg_.arch == Arch::Smn) {
        views.push_back({"osc.w0", &osc_.w0, true});
        views.push_back({"osc.b0", &osc_.b0, true});
        views.push_back({"osc.a", &osc_.amplitudes, osc_.amplitudes_learnable});
        if (!filter_.modules.empty()) {
            views.push_back({"filter.mask.w", &filter_.seed.w, true});
            views.push_back({"filter.mask.b", &filter_.seed.b, true});
            for (std::size_t i = 0; i < filter_.modules.size(); ++i) {
                auto& mod = filter_.modules[i];
                const std::string p = "filter.m" + std::to_string(i + 1);
                views.push_back({p + ".main.w", &mod.main_w, true});
                views.push_back({p + ".main.b", &mod.main_b, true});
                views.push_back({p + ".mod.w", &mod.mod_w, true});
                views.push_back({p + ".mod.b", &mod.mod_b, true});
            }
        }
    } else {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const std::string p = "layers." + std::to_string(i + 1);
            views.push_back({p + ".w", &layers_[i].w, true});
            views.push_back({p + ".b", &layers_[i].b, true});
        }
    }
    views.push_back({"head.w", &head_.w, true});
    views.push_back({"head.b", &head_.b, true});
    return views;
}

std::size_t Model::parameter_count() const {
    std::size_t count = 0;
    auto& self = const_cast<Model&>(*this);
    for (const auto& v : self.parameter_views()) {
        if (v.trainable) count += v.value->size();
    }
    return count;
}

std::size_t parameter_count_formula(const ModelConfig& cfg) {
    const auto h = static_cast<std::size_t>(cfg.hidden);
    const auto out = static_cast<std::size_t>(cfg.out_dim);
    std::size_t net_in = static_cast<std::size_t>(cfg.in_dim);
    if (cfg.pe_octaves > 0) net_in = 2 * static_cast<std::size_t>(cfg.pe_octaves) * cfg.in_dim;
    if (cfg.arch == Arch::Smn) {
        const auto m = static_cast<std::size_t>(cfg.num_modules);
        std::size_t count = net_in * h + h;  // oscillator affine
        if (cfg.amplitudes_learnable) count += static_cast<std::size_t>(cfg.k);
        if (m > 0) count += h * (h + 1) * (1 + 2 * m);  // seed + M*(main+mod)
        count += h * out + out;                         // head
        return count;
    }
    const auto d = static_cast<std::size_t>(cfg.depth);
    return (net_in * h + h) + (d - 1) * (h * h + h) + (h * out + out);
}

namespace {

constexpr char kMagic[8] = {'S', 'M', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void Model::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
    put_bytes(out, kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    const std::string cfg_json = cfg_.serialize();
    put_u64(out, cfg_json.size());
    put_bytes(out, cfg_json.data(), cfg_json.size());

    auto& self = const_cast<Model&>(*this);
    const auto views = self.parameter_views();
    put_u32(out, static_cast<std::uint32_t>(views.size()));
    for (const auto& v : views) {
        put_u32(out, static_cast<std::uint32_t>(v.name.size()));
        put_bytes(out, v.name.data(), v.name.size());
        put_u64(out, v.value->rows);
        put_u64(out, v.value->cols);
        for (double d : v.value->data) put_f64(out, d);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Model Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint64_t json_len = get_u64(in);
    std::string cfg_json(json_len, '\0');
    in.read(cfg_json.data(), static_cast<std::streamsize>(json_len));
    Model m = Model::build(ModelConfig::parse(cfg_json));

    const std::uint32_t n_params = get_u32(in);
    auto views = m.parameter_views();
    if (n_params != views.size()) {
        throw std::runtime_error("checkpoint: parameter count mismatch in " + path);
    }
    for (auto& v : views) {
        const std::uint32_t name_len = get_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (name != v.name) {
            throw std::runtime_error("checkpoint: expected parameter " + v.name + ", found " +
                                     name);
        }
        const std::uint64_t rows = get_u64(in);
        const std::uint64_t cols = get_u64(in);
        if (rows != v.value->rows || cols != v.value->cols) {
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        }
        for (double& d : v.value->data) d = get_f64(in);
    }
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    return m;
}

}  // namespace smn
