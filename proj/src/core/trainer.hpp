// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/signal.hpp"

namespace smn {

struct TrainConfig {
    double lr0 = 2e-2;
    int max_iters = 5000;
    int patience = 100;
    double lr_factor = 0.5;
    double plateau_rel_threshold = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    int eval_every = 50;
    double min_lr = 1e-6;

    void validate() const;
    static TrainConfig parse(const std::string& json_text);
    std::string serialize() const;
};

/// Per-parameter first/second moments; shapes mirror the trainable parameters.
struct AdamState {
    std::vector<ValueGrid> m, v;
    std::int64_t t = 0;
};

/// Bias-corrected Adam update on params (trainable entries only). grads is
/// indexed like params. Throws ModelFault on non-finite gradients.
void adam_step(std::vector<ParamView>& params, const std::vector<const ValueGrid*>& grads,
               AdamState& state, const TrainConfig& cfg, double lr);

/// Loss-plateau halving: an iteration improves when
/// loss < best * (1 - plateau_rel_threshold); `patience` consecutive
/// non-improving iterations halve the rate (floored at min_lr).
class PlateauScheduler {
public:
    explicit PlateauScheduler(const TrainConfig& cfg)
        : patience_(cfg.patience),
          factor_(cfg.lr_factor),
          threshold_(cfg.plateau_rel_threshold),
          min_lr_(cfg.min_lr),
          lr_(cfg.lr0) {}

    struct Event {
        int iteration;
        double old_lr, new_lr;
    };

    /// Consumes one training-loss observation; returns the rate to use.
    double step(double loss, int iteration);

    double lr() const { return lr_; }
    int counter() const { return counter_; }
    double best() const { return best_; }
    const std::vector<Event>& events() const { return events_; }

private:
    int patience_;
    double factor_, threshold_, min_lr_;
    double lr_;
    double best_ = std::numeric_limits<double>::infinity();
    int counter_ = 0;
    std::vector<Event> events_;
};

struct FitReport {
    std::vector<double> loss;                       // one entry per iteration
    std::vector<std::pair<int, double>> psnr;       // (iteration, dB) at eval points
    std::vector<PlateauScheduler::Event> lr_events;
    double final_loss = 0.0;
    double final_psnr = 0.0;
    int iterations = 0;
    bool diverged = false;
    std::size_t parameter_count = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string model_config_json;
    std::string train_config_json;

    std::string to_json() const;
};

/// iteration, loss, psnr (NaN when not evaluated this iteration), lr
using FitCallback = std::function<void(int, double, double, double)>;

/// Full-batch fit of model to (coords, targets); targets values are treated
/// as [0,1] signal for PSNR. Loss is recorded every iteration starting with
/// the untrained forward; PSNR every eval_every iterations and at the end.
FitReport fit_raw(Model& model, const ValueGrid& coords, const ValueGrid& targets,
                  const TrainConfig& cfg, const FitCallback& callback = {});

/// Convenience wrapper: builds the coordinate grid and target matrix from img.
FitReport fit(Model& model, const ImageSignal& img, const TrainConfig& cfg,
              const FitCallback& callback = {});

}  // namespace smn
