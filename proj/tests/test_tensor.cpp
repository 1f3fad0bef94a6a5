// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/fastmath.hpp"
#include "core/gradcheck.hpp"
#include "core/grid.hpp"
#include "core/kernels.hpp"
#include "core/tape.hpp"
#include "core/threading.hpp"

using namespace smn;

namespace {

ValueGrid random_grid(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    ValueGrid g(r, c);
    rng.fill_uniform(g, lo, hi);
    return g;
}

double max_abs_diff(const ValueGrid& a, const ValueGrid& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("splitmix64 stream matches the published vectors") {
    Rng r0(0);
    CHECK(r0.next_u64() == 0xE220A8397B1DCDAFULL);
    CHECK(r0.next_u64() == 0x6E789E6AA1B965F4ULL);
    CHECK(r0.next_u64() == 0x06C45D188009454FULL);
    CHECK(r0.next_u64() == 0xF88BB8A8724C81ECULL);
    Rng r1(1234567);
    CHECK(r1.next_u64() == 0x599ED017FB08FC85ULL);
    CHECK(r1.next_u64() == 0x2C73F08458540FA5ULL);
    Rng r2(0);
    CHECK(r2.uniform() == doctest::Approx(0.8833108082136426).epsilon(1e-15));
}

TEST_CASE("identical seed and call sequence give bit-identical grids") {
    Rng a(42), b(42);
    ValueGrid ga = random_grid(17, 13, a);
    ValueGrid gb = random_grid(17, 13, b);
    CHECK(ga == gb);
}

TEST_CASE("fast sincos agrees with libm") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> small(-20.0, 20.0);
    std::uniform_real_distribution<double> large(-5e4, 5e4);
    double max_err = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = (i % 2 == 0) ? small(gen) : large(gen);
        double s, c;
        fastmath::sincos1(x, s, c);
        max_err = std::max(max_err, std::fabs(s - std::sin(x)));
        max_err = std::max(max_err, std::fabs(c - std::cos(x)));
    }
    CHECK(max_err < 1e-13);

    // array form, with scaling
    std::vector<double> xs(1000), s(1000), c(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = small(gen);
    fastmath::sincos_scaled(xs.data(), 40.0, s.data(), c.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(s[i] == doctest::Approx(std::sin(40.0 * xs[i])).epsilon(1e-12));
        CHECK(c[i] == doctest::Approx(std::cos(40.0 * xs[i])).epsilon(1e-12));
    }
}

TEST_CASE("matmul: identity and analytic examples") {
    Tape t;
    auto a = t.leaf(ValueGrid::from(2, 2, {1, 0, 0, 1}));
    auto b = t.leaf(ValueGrid::from(2, 1, {3, 4}));
    const ValueGrid& prod = t.value(t.matmul(a, b));
    CHECK(prod.at(0, 0) == 3.0);
    CHECK(prod.at(1, 0) == 4.0);

    auto c = t.leaf(ValueGrid::from(1, 2, {1, 2}));
    const ValueGrid& prod2 = t.value(t.matmul(c, b));
    CHECK(prod2.at(0, 0) == 11.0);
}

TEST_CASE("matmul: shape mismatch names both shapes") {
    Tape t;
    auto a = t.leaf(ValueGrid(2, 3));
    auto b = t.leaf(ValueGrid(2, 4));
    CHECK_THROWS_WITH_AS(t.matmul(a, b), doctest::Contains("2x3"), DimensionError);
    try {
        t.matmul(a, b);
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("2x4") != std::string::npos);
    }
}

TEST_CASE("matmul associativity on random conformable triples") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        ValueGrid a = random_grid(4, 6, rng), b = random_grid(6, 5, rng),
                  c = random_grid(5, 7, rng);
        Tape t;
        auto na = t.leaf(a), nb = t.leaf(b), nc = t.leaf(c);
        const ValueGrid& left = t.value(t.matmul(t.matmul(na, nb), nc));
        const ValueGrid& right = t.value(t.matmul(na, t.matmul(nb, nc)));
        double scale = 0.0;
        for (double v : left.data) scale = std::max(scale, std::fabs(v));
        CHECK(max_abs_diff(left, right) <= 1e-9 * std::max(1.0, scale));
    }
}

TEST_CASE("matmul results do not depend on thread count") {
    Rng rng(11);
    ValueGrid a = random_grid(32, 64, rng), b = random_grid(64, 2000, rng);
    const int saved = num_threads();
    set_num_threads(1);
    Tape t1;
    ValueGrid r1 = t1.value(t1.matmul(t1.leaf(a), t1.leaf(b)));
    set_num_threads(4);
    Tape t4;
    ValueGrid r4 = t4.value(t4.matmul(t4.leaf(a), t4.leaf(b)));
    set_num_threads(saved);
    CHECK(r1 == r4);
}

TEST_CASE("elementwise examples") {
    Tape t;
    auto a = t.leaf(ValueGrid::from(1, 2, {2, 3}));
    auto ones = t.leaf(ValueGrid::from(1, 2, {1, 1}));
    const ValueGrid& m = t.value(t.mul(a, ones));
    CHECK(m.at(0, 0) == 2.0);
    CHECK(m.at(0, 1) == 3.0);

    auto sq = t.square(t.leaf(ValueGrid::from(1, 3, {-2, 0, 1})));
    CHECK(t.value(sq).data == std::vector<double>{4, 0, 1});

    auto bad = t.leaf(ValueGrid(1, 3));
    CHECK_THROWS_AS(t.add(a, bad), DimensionError);
}

TEST_CASE("sin gradient at zero is one") {
    Tape t;
    auto x = t.leaf(ValueGrid::from(1, 1, {0.0}));
    auto loss = t.sum(t.sin(x));
    t.backward(loss);
    CHECK(t.grad(x).data[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("backward of sum(W x) replicates x^T across rows") {
    Tape t;
    ValueGrid w(3, 2);
    w.fill(0.5);
    ValueGrid x = ValueGrid::from(2, 1, {2.0, -1.5});
    auto nw = t.leaf(w), nx = t.leaf(x);
    auto loss = t.sum(t.matmul(nw, nx));
    t.backward(loss);
    const ValueGrid& gw = t.grad(nw);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(gw.at(r, 0) == doctest::Approx(2.0));
        CHECK(gw.at(r, 1) == doctest::Approx(-1.5));
    }
}

TEST_CASE("disconnected leaf gets a zero gradient") {
    Tape t;
    auto x = t.leaf(ValueGrid::from(1, 1, {3.0}));
    auto unused = t.leaf(ValueGrid::from(2, 2, {1, 2, 3, 4}));
    auto loss = t.sum(t.square(x));
    t.backward(loss);
    const ValueGrid& g = t.grad(unused);
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("backward requires a scalar loss") {
    Tape t;
    auto x = t.leaf(ValueGrid(2, 2, 1.0));
    auto y = t.square(x);
    CHECK_THROWS_AS(t.backward(y), DimensionError);
}

TEST_CASE("finite differences: analytic derivatives") {
    auto square_f = [](const ValueGrid& v) { return v.data[0] * v.data[0]; };
    ValueGrid theta = ValueGrid::from(1, 1, {3.0});
    ValueGrid g = finite_diff_grad(square_f, theta);
    CHECK(g.data[0] == doctest::Approx(6.0).epsilon(1e-6));

    auto sine_f = [](const ValueGrid& v) { return std::sin(v.data[0]); };
    theta.data[0] = 0.0;
    g = finite_diff_grad(sine_f, theta, 1e-5);
    CHECK(g.data[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("matmul gradient of summed output matches finite differences") {
    Rng rng(5);
    ValueGrid a = random_grid(5, 7, rng), b = random_grid(7, 3, rng);
    Tape t;
    auto na = t.leaf(a), nb = t.leaf(b);
    t.backward(t.sum(t.matmul(na, nb)));
    ValueGrid ga = t.grad(na), gb = t.grad(nb);

    auto loss_of_a = [&](const ValueGrid& probe) {
        Tape s;
        return s.value(s.sum(s.matmul(s.leaf(probe), s.leaf(b)))).data[0];
    };
    auto loss_of_b = [&](const ValueGrid& probe) {
        Tape s;
        return s.value(s.sum(s.matmul(s.leaf(a), s.leaf(probe)))).data[0];
    };
    const ValueGrid fa = finite_diff_grad(loss_of_a, a);
    const ValueGrid fb = finite_diff_grad(loss_of_b, b);
    double ref = 0.0;
    for (double v : fa.data) ref = std::max(ref, std::fabs(v));
    CHECK(max_abs_diff(ga, fa) <= 1e-6 * std::max(1.0, ref));
    CHECK(max_abs_diff(gb, fb) <= 1e-6 * std::max(1.0, ref));
}

TEST_CASE("mean of sin(Wx)^2 gradient matches finite differences") {
    Rng rng(9);
    ValueGrid w = random_grid(4, 3, rng), x = random_grid(3, 6, rng);
    auto loss_f = [&](const ValueGrid& probe) {
        Tape s;
        auto out = s.square(s.sin(s.matmul(s.leaf(probe), s.leaf(x))));
        return s.value(s.sum(out)).data[0] / static_cast<double>(4 * 6);
    };
    Tape t;
    auto nw = t.leaf(w);
    auto out = t.square(t.sin(t.matmul(nw, t.leaf(x))));
    t.backward(t.scale(t.sum(out), 1.0 / 24.0));
    const ValueGrid fd = finite_diff_grad(loss_f, w);
    const ValueGrid& ad = t.grad(nw);
    double fd_max = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        fd_max = std::max(fd_max, std::fabs(fd.data[i]));
        diff = std::max(diff, std::fabs(fd.data[i] - ad.data[i]));
    }
    CHECK(diff / (fd_max + 1e-10) < 1e-5);
}

TEST_CASE("bias broadcast is the only permitted broadcast") {
    Tape t;
    auto x = t.leaf(ValueGrid::from(2, 3, {1, 2, 3, 4, 5, 6}));
    auto b = t.leaf(ValueGrid::from(2, 1, {10, 20}));
    const ValueGrid& out = t.value(t.add_bias(x, b));
    CHECK(out.at(0, 2) == 13.0);
    CHECK(out.at(1, 0) == 24.0);
    auto wide = t.leaf(ValueGrid(2, 2, 1.0));
    CHECK_THROWS_AS(t.add_bias(x, wide), DimensionError);
}

TEST_CASE("add_bias gradient sums over columns") {
    Tape t;
    auto x = t.leaf(ValueGrid(2, 4, 0.0));
    auto b = t.leaf(ValueGrid(2, 1, 0.0));
    t.backward(t.sum(t.add_bias(x, b)));
    CHECK(t.grad(b).at(0, 0) == doctest::Approx(4.0));
    CHECK(t.grad(b).at(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("fused affine and sin_affine match their primitive compositions") {
    Rng rng(13);
    ValueGrid w = random_grid(5, 4, rng), x = random_grid(4, 9, rng), b = random_grid(5, 1, rng);
    Tape t;
    auto nw = t.leaf(w), nx = t.leaf(x), nb = t.leaf(b);
    // fused seeds the accumulator with the bias, so association differs by ulps
    const ValueGrid& fused = t.value(t.affine(nw, nx, nb));
    const ValueGrid& composed = t.value(t.add_bias(t.matmul(nw, nx), nb));
    CHECK(max_abs_diff(fused, composed) < 1e-14);

    const double omega = 30.0;
    const ValueGrid& sfused = t.value(t.sin_affine(nw, nx, nb, omega));
    const ValueGrid& scomposed = t.value(t.sin(t.scale(t.affine(nw, nx, nb), omega)));
    CHECK(max_abs_diff(sfused, scomposed) < 1e-13);
}

TEST_CASE("sin_affine gradients match finite differences") {
    Rng rng(17);
    ValueGrid w = random_grid(3, 2, rng), x = random_grid(2, 5, rng), b = random_grid(3, 1, rng);
    const double omega = 7.0;
    Tape t;
    auto nw = t.leaf(w), nx = t.leaf(x), nb = t.leaf(b);
    t.backward(t.sum(t.sin_affine(nw, nx, nb, omega)));
    auto loss_w = [&](const ValueGrid& p) {
        Tape s;
        return s.value(s.sum(s.sin_affine(s.leaf(p), s.leaf(x), s.leaf(b), omega))).data[0];
    };
    auto loss_b = [&](const ValueGrid& p) {
        Tape s;
        return s.value(s.sum(s.sin_affine(s.leaf(w), s.leaf(x), s.leaf(p), omega))).data[0];
    };
    const ValueGrid fw = finite_diff_grad(loss_w, w);
    const ValueGrid fb = finite_diff_grad(loss_b, b);
    double fd_max = 0.0;
    for (double v : fw.data) fd_max = std::max(fd_max, std::fabs(v));
    CHECK(max_abs_diff(t.grad(nw), fw) <= 2e-5 * std::max(1.0, fd_max));
    CHECK(max_abs_diff(t.grad(nb), fb) <= 2e-5 * std::max(1.0, fd_max));
}

TEST_CASE("relu and gauss activations") {
    Tape t;
    auto x = t.leaf(ValueGrid::from(1, 2, {-1.0, 2.0}));
    const ValueGrid& r = t.value(t.relu(x));
    CHECK(r.data == std::vector<double>{0.0, 2.0});

    auto z = t.leaf(ValueGrid::from(1, 1, {0.0}));
    CHECK(t.value(t.gauss(z, 30.0)).data[0] == 1.0);

    // siren activation gradient at zero equals omega0
    auto v = t.leaf(ValueGrid::from(1, 1, {0.0}));
    auto act = t.sin(t.scale(v, 40.0));
    t.backward(t.sum(act));
    CHECK(t.grad(v).data[0] == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("tape reuse across reset keeps results identical") {
    Rng rng(21);
    ValueGrid w = random_grid(6, 6, rng), x = random_grid(6, 50, rng), b = random_grid(6, 1, rng);
    Tape t;
    double first = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        t.reset();
        auto out = t.sum(t.square(t.sin_affine(t.leaf(w), t.leaf(x), t.leaf(b))));
        if (pass == 0) {
            first = t.value(out).data[0];
        } else {
            CHECK(t.value(out).data[0] == first);
        }
        t.backward(out);
    }
}

TEST_CASE("vstack stacks rows and splits gradients") {
    Tape t;
    auto a = t.leaf(ValueGrid::from(1, 2, {1, 2}));
    auto b = t.leaf(ValueGrid::from(2, 2, {3, 4, 5, 6}));
    auto v = t.vstack(a, b);
    CHECK(t.value(v).rows == 3);
    CHECK(t.value(v).at(2, 1) == 6.0);
    t.backward(t.sum(v));
    CHECK(t.grad(a).data == std::vector<double>{1, 1});
    CHECK(t.grad(b).data == std::vector<double>{1, 1, 1, 1});
}
