// SPDX-License-Identifier: Apache-2.0
#include "core/tape.hpp"

#include <algorithm>
#include <cmath>

#include "core/fastmath.hpp"
#include "core/kernels.hpp"
#include "core/threading.hpp"

namespace smn {
namespace {

constexpr std::size_t kEwiseGrain = 16384;

double par_sum(const double* x, std::size_t n) {
    constexpr std::size_t kChunks = 64;
    const std::size_t chunk = (n + kChunks - 1) / kChunks;
    double partial[kChunks] = {};
    parallel_for(
        0, kChunks,
        [&](std::size_t c0, std::size_t c1) {
            for (std::size_t c = c0; c < c1; ++c) {
                const std::size_t lo = c * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                double acc = 0.0;
                for (std::size_t i = lo; i < hi; ++i) acc += x[i];
                partial[c] = acc;
            }
        },
        8);
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace

Tape::NodeId Tape::alloc(Op op, std::size_t rows, std::size_t cols, NodeId a, NodeId b, NodeId c) {
    if (live_ == nodes_.size()) nodes_.emplace_back();
    Node& nd = nodes_[live_];
    nd.op = op;
    nd.in0 = a;
    nd.in1 = b;
    nd.in2 = c;
    nd.c0 = 0.0;
    nd.pick_r = nd.pick_c = 0;
    nd.fresh_grad = true;
    nd.val.reshape(rows, cols);
    return static_cast<NodeId>(live_++);
}

Tape::NodeId Tape::leaf(const ValueGrid& v) {
    NodeId id = alloc(Op::Leaf, v.rows, v.cols);
    node(id).val.data = v.data;
    return id;
}

Tape::NodeId Tape::scalar(double v) {
    NodeId id = alloc(Op::Leaf, 1, 1);
    node(id).val.data[0] = v;
    return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    const ValueGrid& av = value(a);
    const ValueGrid& bv = value(b);
    if (av.cols != bv.rows) {
        throw DimensionError("matmul: inner dimensions disagree, " + av.shape_str() + " * " +
                             bv.shape_str());
    }
    NodeId id = alloc(Op::MatMul, av.rows, bv.cols, a, b);
    kernels::gemm_nn(av.rows, av.cols, bv.cols, av.data.data(), bv.data.data(),
                     node(id).val.data.data(), false);
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const ValueGrid& av = value(a);
    const ValueGrid& bv = value(b);
    require_same_shape(av, bv, "add");
    NodeId id = alloc(Op::Add, av.rows, av.cols, a, b);
    const double* pa = av.data.data();
    const double* pb = bv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, av.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = pa[i] + pb[i];
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::add_bias(NodeId x, NodeId bias) {
    const ValueGrid& xv = value(x);
    const ValueGrid& bv = value(bias);
    if (bv.rows != xv.rows || bv.cols != 1) {
        throw DimensionError("add_bias: bias must be " + std::to_string(xv.rows) + "x1, got " +
                             bv.shape_str());
    }
    NodeId id = alloc(Op::AddBias, xv.rows, xv.cols, x, bias);
    const double* px = xv.data.data();
    const double* pb = bv.data.data();
    double* out = node(id).val.data.data();
    const std::size_t cols = xv.cols;
    parallel_for(
        0, xv.rows,
        [=](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) {
                const double b = pb[r];
                for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = px[r * cols + j] + b;
            }
        },
        4);
    return id;
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    const ValueGrid& av = value(a);
    const ValueGrid& bv = value(b);
    require_same_shape(av, bv, "mul");
    NodeId id = alloc(Op::Mul, av.rows, av.cols, a, b);
    const double* pa = av.data.data();
    const double* pb = bv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, av.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = pa[i] * pb[i];
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::sin(NodeId x) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Sin, xv.rows, xv.cols, x);
    Node& nd = node(id);
    nd.cache.resize(1);
    nd.cache[0].reshape(xv.rows, xv.cols);
    const double* px = xv.data.data();
    double* s = nd.val.data.data();
    double* c = nd.cache[0].data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            fastmath::sincos_scaled(px + lo, 1.0, s + lo, c + lo, hi - lo);
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::cos(NodeId x) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Cos, xv.rows, xv.cols, x);
    Node& nd = node(id);
    nd.cache.resize(1);
    nd.cache[0].reshape(xv.rows, xv.cols);
    const double* px = xv.data.data();
    double* c = nd.val.data.data();
    double* s = nd.cache[0].data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            fastmath::sincos_scaled(px + lo, 1.0, s + lo, c + lo, hi - lo);
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::vstack(NodeId a, NodeId b) {
    const ValueGrid& av = value(a);
    const ValueGrid& bv = value(b);
    if (av.cols != bv.cols) {
        throw DimensionError("vstack: column counts differ, " + av.shape_str() + " vs " +
                             bv.shape_str());
    }
    NodeId id = alloc(Op::VStack, av.rows + bv.rows, av.cols, a, b);
    Node& nd = node(id);
    std::copy(av.data.begin(), av.data.end(), nd.val.data.begin());
    std::copy(bv.data.begin(), bv.data.end(), nd.val.data.begin() + av.size());
    return id;
}

Tape::NodeId Tape::square(NodeId x) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Square, xv.rows, xv.cols, x);
    const double* px = xv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = px[i] * px[i];
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::relu(NodeId x) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Relu, xv.rows, xv.cols, x);
    const double* px = xv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = px[i] > 0.0 ? px[i] : 0.0;
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::gauss(NodeId x, double s0) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Gauss, xv.rows, xv.cols, x);
    node(id).c0 = s0;
    const double* px = xv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const double t = s0 * px[i];
                out[i] = std::exp(-t * t);
            }
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::scale(NodeId x, double c) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Scale, xv.rows, xv.cols, x);
    node(id).c0 = c;
    const double* px = xv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = c * px[i];
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::scale_by(NodeId x, NodeId s) {
    const ValueGrid& xv = value(x);
    const ValueGrid& sv = value(s);
    if (!sv.is_scalar()) {
        throw DimensionError("scale_by: scale must be 1x1, got " + sv.shape_str());
    }
    NodeId id = alloc(Op::ScaleBy, xv.rows, xv.cols, x, s);
    const double c = sv.data[0];
    const double* px = xv.data.data();
    double* out = node(id).val.data.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out[i] = c * px[i];
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::pick(NodeId x, std::size_t r, std::size_t c) {
    const ValueGrid& xv = value(x);
    if (r >= xv.rows || c >= xv.cols) {
        throw DimensionError("pick: index (" + std::to_string(r) + "," + std::to_string(c) +
                             ") out of range for " + xv.shape_str());
    }
    NodeId id = alloc(Op::Pick, 1, 1, x);
    Node& nd = node(id);
    nd.pick_r = static_cast<std::uint32_t>(r);
    nd.pick_c = static_cast<std::uint32_t>(c);
    nd.val.data[0] = xv.at(r, c);
    return id;
}

Tape::NodeId Tape::sum(NodeId x) {
    const ValueGrid& xv = value(x);
    NodeId id = alloc(Op::Sum, 1, 1, x);
    node(id).val.data[0] = par_sum(xv.data.data(), xv.size());
    return id;
}

Tape::NodeId Tape::affine(NodeId w, NodeId x, NodeId b) {
    const ValueGrid& wv = value(w);
    const ValueGrid& xv = value(x);
    const ValueGrid& bv = value(b);
    if (wv.cols != xv.rows) {
        throw DimensionError("affine: weight/input mismatch, " + wv.shape_str() + " * " +
                             xv.shape_str());
    }
    if (bv.rows != wv.rows || bv.cols != 1) {
        throw DimensionError("affine: bias must be " + std::to_string(wv.rows) + "x1, got " +
                             bv.shape_str());
    }
    NodeId id = alloc(Op::Affine, wv.rows, xv.cols, w, x, b);
    Node& nd = node(id);
    double* out = nd.val.data.data();
    const double* pb = bv.data.data();
    const std::size_t cols = xv.cols;
    parallel_for(
        0, wv.rows,
        [=](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) std::fill(out + r * cols, out + (r + 1) * cols, pb[r]);
        },
        4);
    kernels::gemm_nn(wv.rows, wv.cols, xv.cols, wv.data.data(), xv.data.data(), out, true);
    return id;
}

Tape::NodeId Tape::sin_affine(NodeId w, NodeId x, NodeId b, double omega) {
    NodeId pre_id;  // reuses the Affine shape checks
    {
        const ValueGrid& wv = value(w);
        const ValueGrid& xv = value(x);
        const ValueGrid& bv = value(b);
        if (wv.cols != xv.rows) {
            throw DimensionError("sin_affine: weight/input mismatch, " + wv.shape_str() + " * " +
                                 xv.shape_str());
        }
        if (bv.rows != wv.rows || bv.cols != 1) {
            throw DimensionError("sin_affine: bias must be " + std::to_string(wv.rows) +
                                 "x1, got " + bv.shape_str());
        }
        pre_id = alloc(Op::SinAffine, wv.rows, xv.cols, w, x, b);
        Node& nd = node(pre_id);
        nd.c0 = omega;
        nd.cache.resize(2);
        nd.cache[0].reshape(wv.rows, xv.cols);  // cos(omega * pre)
        nd.cache[1].reshape(wv.rows, xv.cols);  // pre-activation, then backward scratch
        double* pre = nd.cache[1].data.data();
        const double* pb = bv.data.data();
        const std::size_t cols = xv.cols;
        parallel_for(
            0, wv.rows,
            [=](std::size_t r0, std::size_t r1) {
                for (std::size_t r = r0; r < r1; ++r)
                    std::fill(pre + r * cols, pre + (r + 1) * cols, pb[r]);
            },
            4);
        kernels::gemm_nn(wv.rows, wv.cols, xv.cols, wv.data.data(), xv.data.data(), pre, true);
        double* s = nd.val.data.data();
        double* c = nd.cache[0].data.data();
        parallel_for(
            0, nd.val.size(),
            [=](std::size_t lo, std::size_t hi) {
                fastmath::sincos_scaled(pre + lo, omega, s + lo, c + lo, hi - lo);
            },
            kEwiseGrain);
    }
    return pre_id;
}

Tape::NodeId Tape::oscillator(NodeId x, NodeId amplitudes, std::span<const double> omegas) {
    const ValueGrid& xv = value(x);
    const ValueGrid& av = value(amplitudes);
    const std::size_t k = omegas.size();
    if (k < 1) throw ConfigError("oscillator: needs at least one frequency");
    for (double w : omegas) {
        if (!(w > 0.0)) throw ConfigError("oscillator: frequencies must be positive");
    }
    if (av.rows != k || av.cols != 1) {
        throw DimensionError("oscillator: amplitudes must be " + std::to_string(k) + "x1, got " +
                             av.shape_str());
    }
    NodeId id = alloc(Op::Oscillator, xv.rows, xv.cols, x, amplitudes);
    Node& nd = node(id);
    nd.omegas.assign(omegas.begin(), omegas.end());
    nd.cache.resize(2 * k);
    for (auto& g : nd.cache) g.reshape(xv.rows, xv.cols);

    const double* px = xv.data.data();
    double* out = nd.val.data.data();
    std::vector<double> amps = av.data;
    std::vector<double*> sc(2 * k);
    for (std::size_t i = 0; i < 2 * k; ++i) sc[i] = nd.cache[i].data.data();
    double* const* scp = sc.data();
    const double* ap = amps.data();
    const double* wp = nd.omegas.data();
    parallel_for(
        0, xv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = 0; i < k; ++i) {
                fastmath::sincos_scaled(px + lo, wp[i], scp[2 * i] + lo, scp[2 * i + 1] + lo,
                                        hi - lo);
            }
            const double a0 = ap[0];
            const double* s0 = scp[0];
            for (std::size_t e = lo; e < hi; ++e) out[e] = a0 * s0[e];
            for (std::size_t i = 1; i < k; ++i) {
                const double a = ap[i];
                const double* s = scp[2 * i];
                for (std::size_t e = lo; e < hi; ++e) out[e] += a * s[e];
            }
        },
        kEwiseGrain);
    return id;
}

Tape::NodeId Tape::mse(NodeId pred, NodeId target) {
    const ValueGrid& pv = value(pred);
    const ValueGrid& tv = value(target);
    require_same_shape(pv, tv, "mse");
    if (pv.cols == 0) throw DimensionError("mse: empty prediction");
    NodeId id = alloc(Op::Mse, 1, 1, pred, target);
    Node& nd = node(id);
    nd.cache.resize(1);
    nd.cache[0].reshape(pv.rows, pv.cols);  // residual
    const double* pp = pv.data.data();
    const double* pt = tv.data.data();
    double* r = nd.cache[0].data.data();
    parallel_for(
        0, pv.size(),
        [=](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) r[i] = pp[i] - pt[i];
        },
        kEwiseGrain);
    nd.val.data[0] = kernels::par_dot(r, r, pv.size()) / static_cast<double>(pv.cols);
    return id;
}

const ValueGrid& Tape::value(NodeId id) const { return node(id).val; }

const ValueGrid& Tape::grad(NodeId id) {
    Node& nd = node(id);
    if (nd.fresh_grad) {
        nd.grd.reshape(nd.val.rows, nd.val.cols);
        nd.grd.fill(0.0);
        nd.fresh_grad = false;
    }
    return nd.grd;
}

std::pair<ValueGrid*, bool> Tape::sink(NodeId id) {
    Node& nd = node(id);
    const bool assign = nd.fresh_grad;
    if (assign) {
        nd.grd.reshape(nd.val.rows, nd.val.cols);
        nd.fresh_grad = false;
    }
    return {&nd.grd, assign};
}

void Tape::backward(NodeId loss) {
    Node& ln = node(loss);
    if (!ln.val.is_scalar()) {
        throw DimensionError("backward: loss must be 1x1, got " + ln.val.shape_str());
    }
    for (std::size_t i = 0; i <= static_cast<std::size_t>(loss); ++i) nodes_[i].fresh_grad = true;
    ln.grd.reshape(1, 1);
    ln.grd.data[0] = 1.0;
    ln.fresh_grad = false;
    for (NodeId id = loss; id >= 0; --id) {
        if (!node(id).fresh_grad) backward_node(id);
    }
}

namespace {

// dst (+)= src, elementwise
void acc_copy(double* dst, const double* src, std::size_t n, bool assign) {
    if (assign) {
        parallel_for(
            0, n,
            [=](std::size_t lo, std::size_t hi) {
                std::copy(src + lo, src + hi, dst + lo);
            },
            kEwiseGrain);
    } else {
        parallel_for(
            0, n,
            [=](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) dst[i] += src[i];
            },
            kEwiseGrain);
    }
}

template <class F>
void acc_apply(double* dst, std::size_t n, bool assign, F f) {
    if (assign) {
        parallel_for(
            0, n,
            [=](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) dst[i] = f(i);
            },
            kEwiseGrain);
    } else {
        parallel_for(
            0, n,
            [=](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) dst[i] += f(i);
            },
            kEwiseGrain);
    }
}

}  // namespace

void Tape::backward_node(NodeId id) {
    Node& nd = node(id);
    const double* g = nd.grd.data.data();
    const std::size_t n = nd.val.size();

    switch (nd.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const ValueGrid& av = node(nd.in0).val;
            const ValueGrid& bv = node(nd.in1).val;
            auto [ga, a_assign] = sink(nd.in0);
            kernels::gemm_nt(av.rows, bv.cols, av.cols, g, bv.data.data(), ga->data.data(),
                             !a_assign);
            auto [gb, b_assign] = sink(nd.in1);
            kernels::gemm_tn(av.rows, av.cols, bv.cols, av.data.data(), g, gb->data.data(),
                             !b_assign);
            break;
        }
        case Op::Affine: {
            const ValueGrid& wv = node(nd.in0).val;
            const ValueGrid& xv = node(nd.in1).val;
            auto [gw, w_assign] = sink(nd.in0);
            kernels::gemm_nt(wv.rows, xv.cols, wv.cols, g, xv.data.data(), gw->data.data(),
                             !w_assign);
            auto [gx, x_assign] = sink(nd.in1);
            kernels::gemm_tn(wv.rows, wv.cols, xv.cols, wv.data.data(), g, gx->data.data(),
                             !x_assign);
            auto [gb, b_assign] = sink(nd.in2);
            kernels::row_sum(nd.val.rows, nd.val.cols, g, gb->data.data(), !b_assign);
            break;
        }
        case Op::SinAffine: {
            const ValueGrid& wv = node(nd.in0).val;
            const ValueGrid& xv = node(nd.in1).val;
            const double omega = nd.c0;
            double* p = nd.cache[1].data.data();  // omega * cos(omega*pre) .* g
            const double* cosv = nd.cache[0].data.data();
            parallel_for(
                0, n,
                [=](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i) p[i] = omega * cosv[i] * g[i];
                },
                kEwiseGrain);
            auto [gw, w_assign] = sink(nd.in0);
            kernels::gemm_nt(wv.rows, xv.cols, wv.cols, p, xv.data.data(), gw->data.data(),
                             !w_assign);
            auto [gx, x_assign] = sink(nd.in1);
            kernels::gemm_tn(wv.rows, wv.cols, xv.cols, wv.data.data(), p, gx->data.data(),
                             !x_assign);
            auto [gb, b_assign] = sink(nd.in2);
            kernels::row_sum(nd.val.rows, nd.val.cols, p, gb->data.data(), !b_assign);
            break;
        }
        case Op::Add: {
            auto [ga, a_assign] = sink(nd.in0);
            acc_copy(ga->data.data(), g, n, a_assign);
            auto [gb, b_assign] = sink(nd.in1);
            acc_copy(gb->data.data(), g, n, b_assign);
            break;
        }
        case Op::AddBias: {
            auto [gx, x_assign] = sink(nd.in0);
            acc_copy(gx->data.data(), g, n, x_assign);
            auto [gb, b_assign] = sink(nd.in1);
            kernels::row_sum(nd.val.rows, nd.val.cols, g, gb->data.data(), !b_assign);
            break;
        }
        case Op::Mul: {
            const double* a = node(nd.in0).val.data.data();
            const double* b = node(nd.in1).val.data.data();
            auto [ga, a_assign] = sink(nd.in0);
            acc_apply(ga->data.data(), n, a_assign, [=](std::size_t i) { return g[i] * b[i]; });
            auto [gb, b_assign] = sink(nd.in1);
            acc_apply(gb->data.data(), n, b_assign, [=](std::size_t i) { return g[i] * a[i]; });
            break;
        }
        case Op::Sin: {
            const double* c = nd.cache[0].data.data();
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign, [=](std::size_t i) { return c[i] * g[i]; });
            break;
        }
        case Op::Cos: {
            const double* s = nd.cache[0].data.data();
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign, [=](std::size_t i) { return -s[i] * g[i]; });
            break;
        }
        case Op::VStack: {
            const std::size_t na = node(nd.in0).val.size();
            auto [ga, a_assign] = sink(nd.in0);
            acc_copy(ga->data.data(), g, na, a_assign);
            auto [gb, b_assign] = sink(nd.in1);
            acc_copy(gb->data.data(), g + na, n - na, b_assign);
            break;
        }
        case Op::Square: {
            const double* x = node(nd.in0).val.data.data();
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign, [=](std::size_t i) { return 2.0 * x[i] * g[i]; });
            break;
        }
        case Op::Relu: {
            const double* out = nd.val.data.data();
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign,
                      [=](std::size_t i) { return out[i] > 0.0 ? g[i] : 0.0; });
            break;
        }
        case Op::Gauss: {
            const double* x = node(nd.in0).val.data.data();
            const double* out = nd.val.data.data();
            const double s2 = 2.0 * nd.c0 * nd.c0;
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign,
                      [=](std::size_t i) { return -s2 * x[i] * out[i] * g[i]; });
            break;
        }
        case Op::Scale: {
            const double c = nd.c0;
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, assign, [=](std::size_t i) { return c * g[i]; });
            break;
        }
        case Op::ScaleBy: {
            const double s = node(nd.in1).val.data[0];
            const double* x = node(nd.in0).val.data.data();
            auto [gx, x_assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, x_assign, [=](std::size_t i) { return s * g[i]; });
            auto [gs, s_assign] = sink(nd.in1);
            if (s_assign) gs->fill(0.0);
            gs->data[0] += kernels::par_dot(x, g, n);
            break;
        }
        case Op::Pick: {
            auto [gx, assign] = sink(nd.in0);
            if (assign) gx->fill(0.0);
            gx->at(nd.pick_r, nd.pick_c) += g[0];
            break;
        }
        case Op::Oscillator: {
            const std::size_t k = nd.omegas.size();
            const ValueGrid& av = node(nd.in1).val;
            // d/dx: sum_i a_i * omega_i * cos_i
            std::vector<double> aw(k);
            for (std::size_t i = 0; i < k; ++i) aw[i] = av.data[i] * nd.omegas[i];
            std::vector<const double*> cosv(k);
            for (std::size_t i = 0; i < k; ++i) cosv[i] = nd.cache[2 * i + 1].data.data();
            const double* const* cp = cosv.data();
            const double* awp = aw.data();
            auto [gx, x_assign] = sink(nd.in0);
            acc_apply(gx->data.data(), n, x_assign, [=](std::size_t i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < k; ++j) acc += awp[j] * cp[j][i];
                return acc * g[i];
            });
            auto [ga, a_assign] = sink(nd.in1);
            if (a_assign) ga->fill(0.0);
            for (std::size_t i = 0; i < k; ++i) {
                ga->data[i] += kernels::par_dot(nd.cache[2 * i].data.data(), g, n);
            }
            break;
        }
        case Op::Sum: {
            const double gv = g[0];
            auto [gx, assign] = sink(nd.in0);
            acc_apply(gx->data.data(), gx->size(), assign, [=](std::size_t) { return gv; });
            break;
        }
        case Op::Mse: {
            const double* r = nd.cache[0].data.data();
            const ValueGrid& pv = node(nd.in0).val;
            const double scale = 2.0 * g[0] / static_cast<double>(pv.cols);
            auto [gp, p_assign] = sink(nd.in0);
            acc_apply(gp->data.data(), pv.size(), p_assign,
                      [=](std::size_t i) { return scale * r[i]; });
            auto [gt, t_assign] = sink(nd.in1);
            acc_apply(gt->data.data(), pv.size(), t_assign,
                      [=](std::size_t i) { return -scale * r[i]; });
            break;
        }
    }
}

void Tape::reset() { live_ = 0; }

}  // namespace smn
