#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace actir {

/// Raw contents of an IDX file (big-endian magic and dimension words,
/// unsigned-byte payload), the format the MNIST files are published in.
struct IdxData {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> bytes;
};

constexpr std::uint32_t kIdxMagicImages = 0x00000803;  // ubyte, 3 dims
constexpr std::uint32_t kIdxMagicLabels = 0x00000801;  // ubyte, 1 dim

IdxData read_idx(const std::filesystem::path& path);

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

struct IdxLabels {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;
};

IdxImages read_idx_images(const std::filesystem::path& path);
IdxLabels read_idx_labels(const std::filesystem::path& path);

}  // namespace actir
