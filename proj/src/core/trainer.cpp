// SPDX-License-Identifier: Apache-2.0
#include "core/trainer.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

namespace smn {

using nlohmann::json;

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw ConfigError("lr0: must be positive");
    if (max_iters < 1) throw ConfigError("max_iters: must be >= 1");
    if (patience < 1) throw ConfigError("patience: must be >= 1");
    if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ConfigError("lr_factor: must be in (0,1)");
    if (!(plateau_rel_threshold >= 0.0)) throw ConfigError("plateau_rel_threshold: must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1: must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2: must be in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("eps: must be positive");
    if (eval_every < 1) throw ConfigError("eval_every: must be >= 1");
    if (!(min_lr >= 0.0)) throw ConfigError("min_lr: must be >= 0");
}

TrainConfig TrainConfig::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
    }
    TrainConfig cfg;
    try {
        cfg.lr0 = j.value("lr0", cfg.lr0);
        cfg.max_iters = j.value("max_iters", cfg.max_iters);
        cfg.patience = j.value("patience", cfg.patience);
        cfg.lr_factor = j.value("lr_factor", cfg.lr_factor);
        cfg.plateau_rel_threshold = j.value("plateau_rel_threshold", cfg.plateau_rel_threshold);
        cfg.beta1 = j.value("beta1", cfg.beta1);
        cfg.beta2 = j.value("beta2", cfg.beta2);
        cfg.eps = j.value("eps", cfg.eps);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.eval_every = j.value("eval_every", cfg.eval_every);
        cfg.min_lr = j.value("min_lr", cfg.min_lr);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string TrainConfig::serialize() const {
    json j;
    j["lr0"] = lr0;
    j["max_iters"] = max_iters;
    j["patience"] = patience;
    j["lr_factor"] = lr_factor;
    j["plateau_rel_threshold"] = plateau_rel_threshold;
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["eps"] = eps;
    j["seed"] = seed;
    j["eval_every"] = eval_every;
    j["min_lr"] = min_lr;
    return j.dump(2) + "\n";
}

void adam_step(std::vector<ParamView>& params, const std::vector<const ValueGrid*>& grads,
               AdamState& state, const TrainConfig& cfg, double lr) {
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].reshape(params[i].value->rows, params[i].value->cols);
            state.m[i].fill(0.0);
            state.v[i].reshape(params[i].value->rows, params[i].value->cols);
            state.v[i].fill(0.0);
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        ValueGrid& theta = *params[i].value;
        const ValueGrid& g = *grads[i];
        require_same_shape(theta, g, "adam_step");
        ValueGrid& m = state.m[i];
        ValueGrid& v = state.v[i];
        for (std::size_t e = 0; e < theta.size(); ++e) {
            const double ge = g.data[e];
            if (!std::isfinite(ge)) {
                throw ModelFault("adam_step: non-finite gradient in " + params[i].name +
                                 " at step " + std::to_string(state.t));
            }
            m.data[e] = cfg.beta1 * m.data[e] + (1.0 - cfg.beta1) * ge;
            v.data[e] = cfg.beta2 * v.data[e] + (1.0 - cfg.beta2) * ge * ge;
            const double mhat = m.data[e] / bc1;
            const double vhat = v.data[e] / bc2;
            theta.data[e] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

double PlateauScheduler::step(double loss, int iteration) {
    if (loss < best_ * (1.0 - threshold_)) {
        best_ = loss;
        counter_ = 0;
    } else {
        ++counter_;
        if (counter_ >= patience_) {
            const double next = std::max(lr_ * factor_, min_lr_);
            if (next < lr_) events_.push_back({iteration, lr_, next});
            lr_ = next;
            counter_ = 0;
        }
    }
    return lr_;
}

std::string FitReport::to_json() const {
    json j;
    j["loss"] = loss;
    json psnr_arr = json::array();
    for (const auto& [it, db] : psnr) psnr_arr.push_back({it, db});
    j["psnr"] = psnr_arr;
    json events = json::array();
    for (const auto& e : lr_events) events.push_back({e.iteration, e.old_lr, e.new_lr});
    j["lr_events"] = events;
    j["final_loss"] = final_loss;
    j["final_psnr"] = final_psnr;
    j["iterations"] = iterations;
    j["diverged"] = diverged;
    j["parameter_count"] = parameter_count;
    j["wall_seconds"] = wall_seconds;
    j["seed"] = seed;
    j["model_config"] = json::parse(model_config_json);
    j["train_config"] = json::parse(train_config_json);
    return j.dump(2) + "\n";
}

FitReport fit_raw(Model& model, const ValueGrid& coords, const ValueGrid& targets,
                  const TrainConfig& cfg, const FitCallback& callback) {
    cfg.validate();
    if (coords.cols != targets.cols) {
        throw DimensionError("fit: coords " + coords.shape_str() + " vs targets " +
                             targets.shape_str());
    }
    const auto start = std::chrono::steady_clock::now();

    FitReport report;
    report.seed = cfg.seed;
    report.parameter_count = model.parameter_count();
    report.model_config_json = model.config().serialize();
    report.train_config_json = cfg.serialize();
    report.loss.reserve(static_cast<std::size_t>(cfg.max_iters));

    auto params = model.parameter_views();
    AdamState adam;
    PlateauScheduler sched(cfg);

    Tape tape;
    Tape::NodeId coords_node = -1;
    Tape::NodeId targets_node = -1;

    double last_psnr = 0.0;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        tape.reset();
        coords_node = tape.leaf(coords);
        targets_node = tape.leaf(targets);
        auto fwd = model.forward(tape, coords_node);
        Tape::NodeId loss_node = tape.mse(fwd.output, targets_node);
        const double loss = tape.value(loss_node).data[0];

        if (!std::isfinite(loss)) {
            report.diverged = true;
            report.iterations = iter;
            report.final_loss = loss;
            report.final_psnr = last_psnr;
            break;
        }
        report.loss.push_back(loss);

        const bool eval_now = (iter % cfg.eval_every == 0);
        double psnr_now = std::numeric_limits<double>::quiet_NaN();
        if (eval_now) {
            last_psnr = psnr(tape.value(fwd.output), targets);
            psnr_now = last_psnr;
            report.psnr.emplace_back(iter, last_psnr);
        }

        const double lr = sched.step(loss, iter);
        if (callback) callback(iter, loss, psnr_now, lr);

        tape.backward(loss_node);
        std::vector<const ValueGrid*> grads;
        grads.reserve(fwd.param_nodes.size());
        for (Tape::NodeId id : fwd.param_nodes) grads.push_back(&tape.grad(id));
        adam_step(params, grads, adam, cfg, lr);

        report.iterations = iter + 1;
        report.final_loss = loss;
    }
    if (!report.diverged) {
        // evaluate the model after the last update
        tape.reset();
        coords_node = tape.leaf(coords);
        targets_node = tape.leaf(targets);
        auto fwd = model.forward(tape, coords_node);
        report.final_loss = tape.value(tape.mse(fwd.output, targets_node)).data[0];
        report.final_psnr = psnr(tape.value(fwd.output), targets);
        report.psnr.emplace_back(report.iterations, report.final_psnr);
    }
    report.lr_events = sched.events();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

FitReport fit(Model& model, const ImageSignal& img, const TrainConfig& cfg,
              const FitCallback& callback) {
    if (model.config().in_dim != 2) {
        throw ConfigError("fit: image fitting requires in_dim == 2");
    }
    if (model.config().out_dim != img.channels) {
        throw ConfigError("fit: model out_dim " + std::to_string(model.config().out_dim) +
                          " != image channels " + std::to_string(img.channels));
    }
    const ValueGrid coords = make_grid(img.width, img.height);
    const ValueGrid targets = image_to_targets(img);
    return fit_raw(model, coords, targets, cfg, callback);
}

}  // namespace smn
