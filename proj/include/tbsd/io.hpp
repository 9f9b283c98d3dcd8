#pragma once

// PNG images, texture-basis files and atomic file writes.

#include "tbsd/common.hpp"
#include "tbsd/texture_learning.hpp"

#include <filesystem>
#include <string>

namespace tbsd::io {

// 8- or 16-bit PNG of any colour type, converted to luminance
// (0.299 R + 0.587 G + 0.114 B) in [0, 1]. Alpha is ignored.
Matrix read_image(const std::filesystem::path& path);

// Values are clamped to [0, 1] and written as 8-bit grayscale.
void write_image(const std::filesystem::path& path, const Matrix& image);

// Nonzero pixels are set.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// Writes to a temporary file in the target directory, then renames it over
// the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);

inline constexpr int kBasisFormatVersion = 1;

// JSON: {"version", "patch_shape": [h, w], "directions_deg", "atoms": K_t
// arrays of length h*w, "source"}. Doubles are written in shortest
// round-trip form, so load(save(b)) reproduces every bit.
std::string basis_to_json(const TextureBasis& basis);
TextureBasis basis_from_json(const std::string& text);
void save_basis(const std::filesystem::path& path, const TextureBasis& basis);
TextureBasis load_basis(const std::filesystem::path& path);

}  // namespace tbsd::io
