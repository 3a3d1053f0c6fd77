#include "actir/idx.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

namespace actir {

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path, const char* what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw std::runtime_error("idx: truncated file reading " + std::string(what) + ": " +
                             path.string());
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

IdxData read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path.string());

  IdxData data;
  data.magic = read_be32(in, path, "magic");
  if (data.magic != kIdxMagicImages && data.magic != kIdxMagicLabels) {
    throw std::runtime_error("idx: bad magic in " + path.string());
  }
  const std::size_t ndim = data.magic == kIdxMagicImages ? 3 : 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    std::uint32_t d = read_be32(in, path, "dimension");
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d) {
      throw std::runtime_error("idx: dimension overflow in " + path.string());
    }
    total *= d;
    data.dims.push_back(d);
  }
  data.bytes.resize(total);
  if (!in.read(reinterpret_cast<char*>(data.bytes.data()), static_cast<std::streamsize>(total))) {
    throw std::runtime_error("idx: truncated payload in " + path.string() + " (expected " +
                             std::to_string(total) + " bytes)");
  }
  return data;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  IdxData data = read_idx(path);
  if (data.magic != kIdxMagicImages) {
    throw std::runtime_error("idx: " + path.string() + " is not an image file");
  }
  IdxImages images;
  images.count = data.dims[0];
  images.rows = data.dims[1];
  images.cols = data.dims[2];
  images.pixels = std::move(data.bytes);
  return images;
}

IdxLabels read_idx_labels(const std::filesystem::path& path) {
  IdxData data = read_idx(path);
  if (data.magic != kIdxMagicLabels) {
    throw std::runtime_error("idx: " + path.string() + " is not a label file");
  }
  IdxLabels labels;
  labels.count = data.dims[0];
  labels.labels = std::move(data.bytes);
  return labels;
}

}  // namespace actir
