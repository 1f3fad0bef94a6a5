// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "core/signal.hpp"

namespace smn {

/// Reads an 8-bit PNG (gray/RGB; palette and alpha converted) or binary
/// PPM/PGM. Values map as p/255 exactly. Throws std::runtime_error on
/// unreadable files and ConfigError on unsupported formats.
ImageSignal load_image(const std::string& path);

/// Writes 8-bit PNG or binary PPM/PGM depending on the file extension
/// (.png, .ppm, .pgm); values are clamped to [0,1] and rounded to p*255.
void save_image(const ImageSignal& img, const std::string& path);

}  // namespace smn
