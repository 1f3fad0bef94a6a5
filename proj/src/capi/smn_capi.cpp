// SPDX-License-Identifier: Apache-2.0
#include "smn/smn.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/gradcheck.hpp"
#include "core/image_io.hpp"
#include "core/model.hpp"
#include "core/signal.hpp"
#include "core/spectral.hpp"
#include "core/trainer.hpp"

struct smn_model {
    smn::Model impl;
};
struct smn_image {
    smn::ImageSignal impl;
};
struct smn_report {
    smn::FitReport impl;
};
struct smn_spectrum {
    smn::Spectrum impl;
};

namespace {

thread_local std::string g_last_error;

void set_last_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

/// Runs fn, translating exceptions into status codes + last-error message.
template <class Fn>
smn_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const smn::DimensionError& e) {
        set_last_error(e.what());
        return SMN_ERR_DIMENSION;
    } catch (const smn::ConfigError& e) {
        set_last_error(e.what());
        return SMN_ERR_CONFIG;
    } catch (const smn::ModelFault& e) {
        set_last_error(e.what());
        return SMN_ERR_FAULT;
    } catch (const std::bad_alloc&) {
        set_last_error("out of memory");
        return SMN_ERR_INTERNAL;
    } catch (const std::runtime_error& e) {
        set_last_error(e.what());
        return SMN_ERR_IO;
    } catch (const std::exception& e) {
        set_last_error(e.what());
        return SMN_ERR_INTERNAL;
    }
}

smn_status require(bool ok, const char* what) {
    if (!ok) {
        set_last_error(std::string("invalid argument: ") + what);
        return SMN_ERR_INVALID_ARGUMENT;
    }
    return SMN_OK;
}

}  // namespace

extern "C" {

const char* smn_version_string(void) { return "1.0.0"; }

const char* smn_status_name(smn_status status) {
    switch (status) {
        case SMN_OK: return "ok";
        case SMN_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case SMN_ERR_DIMENSION: return "dimension_error";
        case SMN_ERR_CONFIG: return "config_error";
        case SMN_ERR_IO: return "io_error";
        case SMN_ERR_DIVERGED: return "diverged";
        case SMN_ERR_FAULT: return "fault";
        case SMN_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* smn_last_error(void) { return g_last_error.c_str(); }

void smn_string_free(char* s) { delete[] s; }

smn_status smn_model_create(const char* config_json, smn_model** out_model) {
    if (auto st = require(config_json && out_model, "smn_model_create")) return st;
    return guarded([&] {
        auto cfg = smn::ModelConfig::parse(config_json);
        *out_model = new smn_model{smn::Model::build(cfg)};
        return SMN_OK;
    });
}

void smn_model_free(smn_model* model) { delete model; }

smn_status smn_model_config_json(const smn_model* model, char** out_json) {
    if (auto st = require(model && out_json, "smn_model_config_json")) return st;
    return guarded([&] {
        *out_json = dup_string(model->impl.config().serialize());
        return SMN_OK;
    });
}

smn_status smn_model_param_count(const smn_model* model, uint64_t* out_count) {
    if (auto st = require(model && out_count, "smn_model_param_count")) return st;
    return guarded([&] {
        *out_count = model->impl.parameter_count();
        return SMN_OK;
    });
}

smn_status smn_model_save(const smn_model* model, const char* path) {
    if (auto st = require(model && path, "smn_model_save")) return st;
    return guarded([&] {
        model->impl.save(path);
        return SMN_OK;
    });
}

smn_status smn_model_load(const char* path, smn_model** out_model) {
    if (auto st = require(path && out_model, "smn_model_load")) return st;
    return guarded([&] {
        *out_model = new smn_model{smn::Model::load(path)};
        return SMN_OK;
    });
}

smn_status smn_model_predict(const smn_model* model, const double* coords, size_t n,
                             double* out_values) {
    if (auto st = require(model && coords && out_values && n > 0, "smn_model_predict")) return st;
    return guarded([&] {
        const auto in_dim = static_cast<std::size_t>(model->impl.config().in_dim);
        smn::ValueGrid c(in_dim, n);
        std::copy(coords, coords + in_dim * n, c.data.begin());
        smn::ValueGrid out = model->impl.predict(c);
        std::copy(out.data.begin(), out.data.end(), out_values);
        return SMN_OK;
    });
}

smn_status smn_model_render(const smn_model* model, int width, int height, smn_image** out_image) {
    if (auto st = require(model && out_image, "smn_model_render")) return st;
    return guarded([&] {
        const smn::ValueGrid coords = smn::make_grid(width, height);
        smn::ValueGrid pred = model->impl.predict(coords);
        *out_image = new smn_image{smn::targets_to_image(pred, width, height)};
        return SMN_OK;
    });
}

smn_status smn_image_create(int width, int height, int channels, const double* pixels,
                            smn_image** out_image) {
    if (auto st = require(pixels && out_image, "smn_image_create")) return st;
    return guarded([&] {
        smn::ImageSignal img;
        img.width = width;
        img.height = height;
        img.channels = channels;
        if (width < 1 || height < 1) throw smn::ConfigError("image: degenerate size");
        img.pixels.assign(pixels, pixels + img.value_count());
        img.validate();
        *out_image = new smn_image{std::move(img)};
        return SMN_OK;
    });
}

smn_status smn_image_load(const char* path, smn_image** out_image) {
    if (auto st = require(path && out_image, "smn_image_load")) return st;
    return guarded([&] {
        *out_image = new smn_image{smn::load_image(path)};
        return SMN_OK;
    });
}

smn_status smn_image_save(const smn_image* image, const char* path) {
    if (auto st = require(image && path, "smn_image_save")) return st;
    return guarded([&] {
        smn::save_image(image->impl, path);
        return SMN_OK;
    });
}

smn_status smn_image_testcard(const char* kind, int width, int height, uint64_t seed,
                              smn_image** out_image) {
    if (auto st = require(kind && out_image, "smn_image_testcard")) return st;
    return guarded([&] {
        *out_image = new smn_image{smn::testcard(kind, width, height, seed)};
        return SMN_OK;
    });
}

smn_status smn_image_crop_center(const smn_image* image, int width, int height,
                                 smn_image** out_image) {
    if (auto st = require(image && out_image, "smn_image_crop_center")) return st;
    return guarded([&] {
        *out_image = new smn_image{smn::center_crop(image->impl, width, height)};
        return SMN_OK;
    });
}

smn_status smn_image_info(const smn_image* image, int* out_width, int* out_height,
                          int* out_channels) {
    if (auto st = require(image != nullptr, "smn_image_info")) return st;
    if (out_width) *out_width = image->impl.width;
    if (out_height) *out_height = image->impl.height;
    if (out_channels) *out_channels = image->impl.channels;
    return SMN_OK;
}

smn_status smn_image_pixels(const smn_image* image, const double** out_data, size_t* out_len) {
    if (auto st = require(image && out_data && out_len, "smn_image_pixels")) return st;
    *out_data = image->impl.pixels.data();
    *out_len = image->impl.pixels.size();
    return SMN_OK;
}

smn_status smn_image_psnr(const smn_image* a, const smn_image* b, double* out_db) {
    if (auto st = require(a && b && out_db, "smn_image_psnr")) return st;
    return guarded([&] {
        *out_db = smn::psnr(a->impl, b->impl);
        return SMN_OK;
    });
}

void smn_image_free(smn_image* image) { delete image; }

smn_status smn_fit(smn_model* model, const smn_image* target, const char* train_config_json,
                   smn_fit_callback callback, void* user, smn_report** out_report) {
    if (auto st = require(model && target, "smn_fit")) return st;
    return guarded([&] {
        smn::TrainConfig cfg;
        if (train_config_json && *train_config_json) {
            cfg = smn::TrainConfig::parse(train_config_json);
        }
        smn::FitCallback cb;
        if (callback) {
            cb = [callback, user](int iter, double loss, double psnr_db, double lr) {
                callback(user, iter, loss, psnr_db, lr);
            };
        }
        smn::FitReport report = smn::fit(model->impl, target->impl, cfg, cb);
        const bool diverged = report.diverged;
        if (out_report) *out_report = new smn_report{std::move(report)};
        if (diverged) {
            set_last_error("fit: loss became non-finite; partial report returned");
            return SMN_ERR_DIVERGED;
        }
        return SMN_OK;
    });
}

smn_status smn_report_json(const smn_report* report, char** out_json) {
    if (auto st = require(report && out_json, "smn_report_json")) return st;
    return guarded([&] {
        *out_json = dup_string(report->impl.to_json());
        return SMN_OK;
    });
}

smn_status smn_report_final_psnr(const smn_report* report, double* out_db) {
    if (auto st = require(report && out_db, "smn_report_final_psnr")) return st;
    *out_db = report->impl.final_psnr;
    return SMN_OK;
}

void smn_report_free(smn_report* report) { delete report; }

smn_status smn_spectrum_from_samples(const double* samples, size_t n, double sample_spacing,
                                     smn_spectrum** out_spectrum) {
    if (auto st = require(samples && out_spectrum, "smn_spectrum_from_samples")) return st;
    return guarded([&] {
        *out_spectrum =
            new smn_spectrum{smn::spectrum_1d(std::span<const double>(samples, n), sample_spacing)};
        return SMN_OK;
    });
}

smn_status smn_harmonic_probe(double omega, int depth, size_t n, smn_spectrum** out_spectrum) {
    if (auto st = require(out_spectrum != nullptr, "smn_harmonic_probe")) return st;
    return guarded([&] {
        *out_spectrum = new smn_spectrum{smn::harmonic_probe(omega, depth, n ? n : 4096)};
        return SMN_OK;
    });
}

smn_status smn_spectrum_data(const smn_spectrum* spectrum, const double** out_frequencies,
                             const double** out_magnitudes, size_t* out_bins) {
    if (auto st = require(spectrum != nullptr, "smn_spectrum_data")) return st;
    if (out_frequencies) *out_frequencies = spectrum->impl.frequencies.data();
    if (out_magnitudes) *out_magnitudes = spectrum->impl.magnitudes.data();
    if (out_bins) *out_bins = spectrum->impl.magnitudes.size();
    return SMN_OK;
}

smn_status smn_spectrum_peaks(const smn_spectrum* spectrum, double floor_db,
                              double* out_frequencies, size_t capacity, size_t* out_count) {
    if (auto st = require(spectrum && out_count, "smn_spectrum_peaks")) return st;
    return guarded([&] {
        const auto peaks = smn::peak_frequencies(spectrum->impl, floor_db);
        *out_count = peaks.size();
        if (out_frequencies) {
            const std::size_t m = std::min(capacity, peaks.size());
            std::copy(peaks.begin(), peaks.begin() + m, out_frequencies);
        }
        return SMN_OK;
    });
}

smn_status smn_spectrum_save(const smn_spectrum* spectrum, const char* path) {
    if (auto st = require(spectrum && path, "smn_spectrum_save")) return st;
    return guarded([&] {
        smn::save_spectrum(spectrum->impl, path);
        return SMN_OK;
    });
}

void smn_spectrum_free(smn_spectrum* spectrum) { delete spectrum; }

smn_status smn_grad_check(const char* config_json, uint64_t seed, int n_samples, double h,
                          int inject_fault, double* out_max_rel_err, char** out_worst_param) {
    if (auto st = require(config_json && out_max_rel_err && n_samples > 0, "smn_grad_check")) {
        return st;
    }
    return guarded([&] {
        auto cfg = smn::ModelConfig::parse(config_json);
        smn::Model model = smn::Model::build(cfg);
        auto result =
            smn::grad_check_model(model, n_samples, seed, h > 0.0 ? h : 1e-5, inject_fault != 0);
        *out_max_rel_err = result.max_rel_err;
        if (out_worst_param) *out_worst_param = dup_string(result.worst_param);
        return SMN_OK;
    });
}

}  // extern "C"
