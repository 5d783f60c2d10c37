#include "fadingfl/mnist.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fadingfl/error.hpp"

namespace fadingfl {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) | std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::uint64_t n) {
    need(n);
    const auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t position() const { return pos_; }

 private:
  void need(std::uint64_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(ParseError::Kind::truncated, bytes_.size(),
                       std::string(what_) + ": truncated at byte offset " +
                           std::to_string(bytes_.size()) + " (needed " +
                           std::to_string(pos_ + n) + " bytes)");
    }
  }

  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::uint64_t pos_ = 0;
};

void expect_magic(Reader& r, std::uint32_t expected, const char* what) {
  const std::uint32_t magic = r.u32();
  if (magic != expected) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s: bad magic 0x%08x (expected 0x%08x)", what, magic, expected);
    throw ParseError(ParseError::Kind::bad_magic, 0, buf);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::io, 0, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path find_file(const std::filesystem::path& dir, const std::string& stem,
                                const std::string& kind) {
  const std::array<std::string, 2> names{stem + "-" + kind, stem + "." + kind};
  for (const auto& n : names) {
    if (std::filesystem::exists(dir / n)) return dir / n;
  }
  return dir / names[0];
}

}  // namespace

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  Reader img(images, "image file");
  Reader lab(labels, "label file");
  expect_magic(img, kImageMagic, "image file");
  expect_magic(lab, kLabelMagic, "label file");

  const std::uint32_t n_images = img.u32();
  const std::uint32_t rows = img.u32();
  const std::uint32_t cols = img.u32();
  const std::uint32_t n_labels = lab.u32();
  if (n_images != n_labels) {
    throw ParseError(ParseError::Kind::count_mismatch, lab.position(),
                     "count mismatch: " + std::to_string(n_images) + " images vs " +
                         std::to_string(n_labels) + " labels");
  }

  const std::uint64_t dim = std::uint64_t{rows} * cols;
  const auto pixels = img.take(dim * n_images);
  const auto tags = lab.take(n_labels);

  Dataset out;
  out.feature_dim = dim;
  out.class_count = 10;
  out.features.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) out.features[i] = static_cast<float>(pixels[i]) / 255.0f;
  out.labels.assign(tags.begin(), tags.end());
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (out.labels[i] > 9) {
      throw ParseError(ParseError::Kind::bad_value, 8 + i,
                       "label " + std::to_string(out.labels[i]) + " outside 0..9 at index " +
                           std::to_string(i));
    }
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  try {
    return parse_idx(img, lab);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.offset(), images.filename().string() + " / " +
                                               labels.filename().string() + ": " + e.what());
  }
}

MnistData load_mnist(const std::filesystem::path& dir) {
  return {load_idx(find_file(dir, "train-images", "idx3-ubyte"), find_file(dir, "train-labels", "idx1-ubyte")),
          load_idx(find_file(dir, "t10k-images", "idx3-ubyte"), find_file(dir, "t10k-labels", "idx1-ubyte"))};
}

}  // namespace fadingfl
