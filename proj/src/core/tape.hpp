// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "core/grid.hpp"

namespace smn {

/// Define-by-run reverse-mode autodiff over ValueGrids.
///
/// The graph is rebuilt every iteration; reset() keeps node storage so a
/// structurally identical rebuild allocates nothing. Gradients accumulate in
/// a fixed order, so repeated runs are bit-identical.
class Tape {
public:
    using NodeId = std::int32_t;

    enum class Op : std::uint8_t {
        Leaf,
        MatMul,
        Affine,
        SinAffine,
        Add,
        AddBias,
        Mul,
        Sin,
        Cos,
        Square,
        Relu,
        Gauss,
        Scale,
        ScaleBy,
        Pick,
        Oscillator,
        VStack,
        Sum,
        Mse,
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // -- leaves ------------------------------------------------------------
    NodeId leaf(const ValueGrid& v);
    NodeId scalar(double v);

    // -- primitive operations ----------------------------------------------
    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);          // same shape
    NodeId add_bias(NodeId x, NodeId bias);  // bias is rows x 1, broadcast over columns
    NodeId mul(NodeId a, NodeId b);          // elementwise
    NodeId sin(NodeId x);
    NodeId cos(NodeId x);
    NodeId square(NodeId x);
    NodeId relu(NodeId x);
    NodeId gauss(NodeId x, double s0);  // exp(-(s0*x)^2)
    NodeId scale(NodeId x, double c);
    NodeId scale_by(NodeId x, NodeId s);                   // s is a 1x1 node
    NodeId pick(NodeId x, std::size_t r, std::size_t c);   // 1x1 view of one element
    NodeId sum(NodeId x);                                  // 1x1
    NodeId vstack(NodeId a, NodeId b);                     // stack rows, same cols

    // -- fused operations --------------------------------------------------
    /// w*x + b with the bias broadcast.
    NodeId affine(NodeId w, NodeId x, NodeId b);
    /// sin(omega * (w*x + b)); caches cos for the backward pass.
    NodeId sin_affine(NodeId w, NodeId x, NodeId b, double omega = 1.0);
    /// sum_i a[i] * sin(omegas[i] * x); a is a Kx1 node, omegas fixed.
    NodeId oscillator(NodeId x, NodeId amplitudes, std::span<const double> omegas);
    /// (1/cols) * sum((pred - target)^2), i.e. per-sample squared L2 summed
    /// over rows and averaged over columns.
    NodeId mse(NodeId pred, NodeId target);

    // -- execution ----------------------------------------------------------
    const ValueGrid& value(NodeId id) const;
    /// Gradient of the last backward() w.r.t. node id; zero if unreachable.
    const ValueGrid& grad(NodeId id);
    void backward(NodeId loss);

    /// Clears the graph but keeps buffers for reuse.
    void reset();
    std::size_t node_count() const { return live_; }

private:
    struct Node {
        Op op = Op::Leaf;
        NodeId in0 = -1, in1 = -1, in2 = -1;
        double c0 = 0.0;  // scale constant / activation frequency / s0
        std::uint32_t pick_r = 0, pick_c = 0;
        ValueGrid val;
        ValueGrid grd;
        bool fresh_grad = true;
        std::vector<double> omegas;
        std::vector<ValueGrid> cache;
    };

    Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    NodeId alloc(Op op, std::size_t rows, std::size_t cols, NodeId a = -1, NodeId b = -1,
                 NodeId c = -1);
    /// Gradient buffer of id; the first call per backward returns assign mode.
    std::pair<ValueGrid*, bool> sink(NodeId id);
    void backward_node(NodeId id);

    // deque: references to existing nodes stay valid while the graph grows
    std::deque<Node> nodes_;
    std::size_t live_ = 0;
};

}  // namespace smn
