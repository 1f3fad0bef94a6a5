// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/model.hpp"

namespace smn {

/// Central differences (f(theta + h e_i) - f(theta - h e_i)) / (2h) per
/// coordinate. f must be a pure function of theta.
ValueGrid finite_diff_grad(const std::function<double(const ValueGrid&)>& f, const ValueGrid& theta,
                           double h = 1e-5);

struct GradCheckResult {
    /// max over parameter tensors of ||ad - fd||_inf / (||fd||_inf + 1e-10)
    double max_rel_err = 0.0;
    std::string worst_param;
    std::vector<std::pair<std::string, double>> per_param;
    bool passed(double tol = 1e-5) const { return max_rel_err <= tol; }
};

/// Compares reverse-mode gradients of the MSE image-fitting loss against
/// central finite differences on a random batch (coords in [-1,1]^in_dim,
/// targets in [0,1]). inject_fault perturbs one reverse-mode gradient and is
/// the negative control for this check.
GradCheckResult grad_check_model(Model& model, int n_samples, std::uint64_t seed, double h = 1e-5,
                                 bool inject_fault = false);

}  // namespace smn
