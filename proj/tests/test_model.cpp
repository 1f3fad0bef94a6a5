// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "core/gradcheck.hpp"
#include "core/model.hpp"
#include "core/signal.hpp"
#include "core/spectral.hpp"
#include "core/trainer.hpp"

using namespace smn;
namespace fs = std::filesystem;

namespace {

ModelConfig smn_cfg(int hidden, int modules = 2, std::uint64_t seed = 0) {
    ModelConfig cfg;
    cfg.arch = Arch::Smn;
    cfg.hidden = hidden;
    cfg.num_modules = modules;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("canonical parameter count: smn 2->3, hidden 256, two modules") {
    ModelConfig cfg = smn_cfg(256);
    Model m = Model::build(cfg);
    CHECK(m.parameter_count() == 330502);
    CHECK(parameter_count_formula(cfg) == 330502);
}

TEST_CASE("enumerated parameter count equals the closed form for every architecture") {
    for (Arch arch : {Arch::Smn, Arch::MlpRelu, Arch::Siren, Arch::Gauss}) {
        for (int hidden : {8, 32}) {
            ModelConfig cfg;
            cfg.arch = arch;
            cfg.hidden = hidden;
            cfg.seed = 1;
            Model m = Model::build(cfg);
            CHECK(m.parameter_count() == parameter_count_formula(cfg));
        }
    }
    // frozen amplitudes drop exactly k parameters
    ModelConfig cfg = smn_cfg(16);
    const std::size_t learnable = Model::build(cfg).parameter_count();
    cfg.amplitudes_learnable = false;
    CHECK(Model::build(cfg).parameter_count() == learnable - 3);
}

TEST_CASE("construction is deterministic in the seed") {
    ModelConfig cfg = smn_cfg(16, 2, 99);
    Model a = Model::build(cfg);
    Model b = Model::build(cfg);
    auto va = a.parameter_views();
    auto vb = b.parameter_views();
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
        CHECK(*va[i].value == *vb[i].value);
    }
    cfg.seed = 100;
    Model c = Model::build(cfg);
    CHECK(!(*c.parameter_views()[0].value == *va[0].value));
}

TEST_CASE("zeroed head gives zero output regardless of input") {
    Model m = Model::build(smn_cfg(8));
    auto views = m.parameter_views();
    for (auto& v : views) {
        if (v.name == "head.w" || v.name == "head.b") v.value->fill(0.0);
    }
    ValueGrid coords(2, 5);
    Rng(3).fill_uniform(coords, -1, 1);
    ValueGrid out = m.predict(coords);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("column batching is consistent") {
    Model m = Model::build(smn_cfg(16));
    ValueGrid coords(2, 1000);
    Rng(5).fill_uniform(coords, -1, 1);
    ValueGrid full = m.predict(coords);
    ValueGrid single(2, 1);
    for (std::size_t j = 0; j < 1000; j += 111) {
        single.at(0, 0) = coords.at(0, j);
        single.at(1, 0) = coords.at(1, j);
        ValueGrid one = m.predict(single);
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(one.at(c, 0) == doctest::Approx(full.at(c, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gradient check passes for every architecture") {
    for (const char* name : {"smn", "smn-add", "mlp", "siren", "gauss"}) {
        ModelConfig cfg = ModelConfig::parse(std::string("{\"arch\":\"") + name +
                                             "\",\"hidden\":10,\"seed\":0}");
        Model m = Model::build(cfg);
        auto result = grad_check_model(m, 16, 0);
        INFO(name, " worst: ", result.worst_param);
        CHECK(result.max_rel_err <= 1e-5);
    }
}

TEST_CASE("injected gradient fault trips the check") {
    Model m = Model::build(smn_cfg(8));
    auto result = grad_check_model(m, 12, 0, 1e-5, true);
    CHECK(result.max_rel_err > 1e-3);
}

TEST_CASE("positional encoding basics") {
    PositionalEncoding pe = PositionalEncoding::octaves(2, 3);
    CHECK(pe.b.rows == 6);
    CHECK(pe.out_dim() == 12);

    ValueGrid zero(2, 1, 0.0);
    ValueGrid enc = positional_encode(pe, zero);
    for (std::size_t r = 0; r < 6; ++r) CHECK(enc.at(r, 0) == 0.0);       // sin rows
    for (std::size_t r = 6; r < 12; ++r) CHECK(enc.at(r, 0) == 1.0);      // cos rows

    ValueGrid coords(2, 17);
    Rng(7).fill_uniform(coords, -1, 1);
    ValueGrid e = positional_encode(pe, coords);
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t j = 0; j < e.cols; ++j) {
            const double s = e.at(r, j), c = e.at(r + 6, j);
            CHECK(s * s + c * c == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    // tape version matches the plain one
    Tape t;
    const ValueGrid& on_tape = t.value(positional_encode(t, pe, t.leaf(coords)));
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(on_tape.data[i] == doctest::Approx(e.data[i]).epsilon(1e-13));
    }
}

TEST_CASE("octave-spaced encoding rows are pure tones") {
    PositionalEncoding pe = PositionalEncoding::octaves(1, 10);
    const std::size_t n = 8192;
    ValueGrid sweep(1, n);
    for (std::size_t i = 0; i < n; ++i) sweep.at(0, i) = -1.0 + 2.0 * static_cast<double>(i) / n;
    ValueGrid enc = positional_encode(pe, sweep);
    for (std::size_t r = 0; r < 10; ++r) {  // sin rows: frequency 2^r * pi rad/unit
        std::vector<double> row(enc.row(r), enc.row(r) + n);
        auto peaks = peak_frequencies(spectrum_1d(row, 2.0 / n), -40.0);
        REQUIRE(peaks.size() == 1);
        CHECK(peaks[0] == doctest::Approx(std::pow(2.0, r) / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("pe-wrapped models build, run, and gradient-check") {
    ModelConfig cfg;
    cfg.arch = Arch::MlpRelu;
    cfg.hidden = 12;
    cfg.pe_octaves = 4;
    cfg.seed = 2;
    Model m = Model::build(cfg);
    CHECK(m.parameter_count() == parameter_count_formula(cfg));
    auto result = grad_check_model(m, 10, 1);
    CHECK(result.max_rel_err <= 1e-5);
}

TEST_CASE("config validation names the offending field") {
    CHECK_THROWS_WITH_AS(ModelConfig::parse("{\"arch\":\"smn\",\"hidden\":0}"),
                         doctest::Contains("hidden"), ConfigError);
    CHECK_THROWS_WITH_AS(ModelConfig::parse("{\"arch\":\"smn\",\"k\":2}"),
                         doctest::Contains("omegas"), ConfigError);
    CHECK_THROWS_WITH_AS(ModelConfig::parse("{\"arch\":\"wat\"}"), doctest::Contains("wat"),
                         ConfigError);
    CHECK_THROWS_AS(ModelConfig::parse("{nope"), ConfigError);
    CHECK_THROWS_WITH_AS(
        ModelConfig::parse("{\"arch\":\"smn\",\"num_modules\":2,\"combine\":[\"mul\"]}"),
        doctest::Contains("combine"), ConfigError);
}

TEST_CASE("config serialization round-trips and normalizes") {
    const std::string text =
        "{\"arch\":\"smn-add\",\"hidden\":32,\"k\":2,\"omegas\":[8,40],\"seed\":7}";
    ModelConfig cfg = ModelConfig::parse(text);
    CHECK(cfg.all_add());
    const std::string normalized = cfg.serialize();
    ModelConfig cfg2 = ModelConfig::parse(normalized);
    CHECK(cfg2.serialize() == normalized);
    CHECK(cfg2.hidden == 32);
    CHECK(cfg2.all_add());
}

TEST_CASE("non-finite parameters fault with the parameter path") {
    Model m = Model::build(smn_cfg(8));
    auto views = m.parameter_views();
    for (auto& v : views) {
        if (v.name == "filter.m1.mod.w") v.value->data[3] = std::nan("");
    }
    Tape t;
    ValueGrid coords(2, 4, 0.1);
    CHECK_THROWS_WITH_AS(m.forward(t, t.leaf(coords)), doctest::Contains("filter.m1.mod.w"),
                         ModelFault);
}

TEST_CASE("checkpoint round trip preserves config and predictions") {
    const std::string path =
        (fs::temp_directory_path() / ("smn_ckpt_" + std::to_string(::getpid()) + ".smn")).string();
    ModelConfig cfg = smn_cfg(12, 2, 42);
    cfg.omegas = {8.0, 40.0, 120.0};
    Model m = Model::build(cfg);
    // perturb parameters away from init so the round trip is non-trivial
    auto views = m.parameter_views();
    Rng rng(77);
    for (auto& v : views) {
        for (double& d : v.value->data) d += rng.uniform(-0.1, 0.1);
    }
    m.save(path);
    Model loaded = Model::load(path);
    CHECK(loaded.config().serialize() == m.config().serialize());
    ValueGrid coords(2, 9);
    Rng(5).fill_uniform(coords, -1, 1);
    CHECK(loaded.predict(coords) == m.predict(coords));
    fs::remove(path);

    CHECK_THROWS_AS(Model::load("/nonexistent/x.smn"), std::runtime_error);
}

TEST_CASE("oscillator plus head fits a pure tone nearly perfectly") {
    // strip the filter stack: the sine basis alone should nail sin(8t)
    ModelConfig cfg = smn_cfg(16, 0, 3);
    cfg.in_dim = 1;
    cfg.out_dim = 1;
    cfg.self_mask = false;
    Model m = Model::build(cfg);

    const std::size_t n = 256;
    ValueGrid coords(1, n), targets(1, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (2.0 * static_cast<double>(i) - (n - 1.0)) / (n - 1.0);
        coords.at(0, i) = t;
        targets.at(0, i) = 0.5 + 0.5 * std::sin(8.0 * t);
    }
    TrainConfig tc;
    tc.max_iters = 2000;
    tc.seed = 3;
    FitReport rep = fit_raw(m, coords, targets, tc);
    CHECK(rep.final_psnr > 60.0);
}
