#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "fadingfl/dataset.hpp"

namespace fadingfl {

/// Decodes an IDX image file (magic 0x00000803, uint8 pixels) and its label
/// file (magic 0x00000801). Pixels are scaled to [0, 1]. Throws ParseError with
/// kind bad_magic, truncated (offset = bytes available), count_mismatch, or
/// bad_value for a label above 9.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

struct MnistData {
  Dataset train;
  Dataset test;
};

/// Loads the four standard files from `dir`. Both the
/// "train-images-idx3-ubyte" and "train-images.idx3-ubyte" spellings are
/// accepted; files must be uncompressed.
MnistData load_mnist(const std::filesystem::path& dir);

}  // namespace fadingfl
