// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gs360/image.hpp"

#include <string>

namespace gs360 {

/// Writes a 1- or 3-channel image as PFM (Pf/PF, scale -1.0 = little-endian,
/// rows bottom-to-top per the format).
void write_pfm(const std::string &path, const Image &img);

/// Reads a PFM file; handles both endiannesses and Pf/PF variants.
Image read_pfm(const std::string &path);

/// Writes a 3-channel image as 8-bit RGB PNG; values are clamped to [0,1].
void write_png8(const std::string &path, const Image &img);

/// Reads an 8- or 16-bit PNG into a 3-channel image scaled to [0,1].
Image read_png8(const std::string &path);

/// Reads an image by extension: .pfm or .png.
Image read_image(const std::string &path);

} // namespace gs360
