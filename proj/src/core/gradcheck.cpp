// SPDX-License-Identifier: Apache-2.0
#include "core/gradcheck.hpp"

#include <cmath>

#include "core/tape.hpp"

namespace smn {

ValueGrid finite_diff_grad(const std::function<double(const ValueGrid&)>& f, const ValueGrid& theta,
                           double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: h must be positive");
    ValueGrid grad(theta.rows, theta.cols);
    ValueGrid probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = probe.data[i];
        probe.data[i] = orig + h;
        const double fp = f(probe);
        probe.data[i] = orig - h;
        const double fm = f(probe);
        probe.data[i] = orig;
        grad.data[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

GradCheckResult grad_check_model(Model& model, int n_samples, std::uint64_t seed, double h,
                                 bool inject_fault) {
    Rng rng(seed);
    ValueGrid coords(static_cast<std::size_t>(model.config().in_dim),
                     static_cast<std::size_t>(n_samples));
    rng.fill_uniform(coords, -1.0, 1.0);
    ValueGrid targets(static_cast<std::size_t>(model.config().out_dim),
                      static_cast<std::size_t>(n_samples));
    rng.fill_uniform(targets, 0.0, 1.0);

    auto loss_f = [&](Model& m) {
        Tape tape;
        auto fwd = m.forward(tape, tape.leaf(coords));
        return tape.value(tape.mse(fwd.output, tape.leaf(targets))).data[0];
    };

    // reverse-mode gradients
    Tape tape;
    auto fwd = model.forward(tape, tape.leaf(coords));
    Tape::NodeId loss = tape.mse(fwd.output, tape.leaf(targets));
    tape.backward(loss);

    auto params = model.parameter_views();
    std::vector<ValueGrid> ad;
    ad.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) ad.push_back(tape.grad(fwd.param_nodes[i]));
    if (inject_fault && !ad.empty()) {
        ad[0].data[0] += 1.0 + std::fabs(ad[0].data[0]);
    }

    GradCheckResult result;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        ValueGrid& theta = *params[i].value;
        const ValueGrid fd = finite_diff_grad(
            [&](const ValueGrid& probe) {
                ValueGrid saved = theta;
                theta = probe;
                const double v = loss_f(model);
                theta = saved;
                return v;
            },
            theta, h);
        double fd_max = 0.0, diff_max = 0.0;
        for (std::size_t e = 0; e < fd.size(); ++e) {
            fd_max = std::max(fd_max, std::fabs(fd.data[e]));
            diff_max = std::max(diff_max, std::fabs(fd.data[e] - ad[i].data[e]));
        }
        const double rel = diff_max / (fd_max + 1e-10);
        result.per_param.emplace_back(params[i].name, rel);
        if (rel > result.max_rel_err) {
            result.max_rel_err = rel;
            result.worst_param = params[i].name;
        }
    }
    return result;
}

}  // namespace smn
