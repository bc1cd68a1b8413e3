#pragma once

#include "mwcnn/tensor.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwcnn {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grayscale 8-bit image. Pixels are a (1, 1, h, w) map holding integer
/// intensities in [0, 255].
struct ImageRecord {
  std::string id;
  FeatureMap pixels;
  int bit_depth = 8;
};

enum class ImageFormat { pgm, png };

/// Chooses the format from the extension (.pgm or .png, case-insensitive).
ImageFormat format_for(const std::filesystem::path& path);

/// Reads binary PGM (P5, maxval 255) or 8-bit grayscale PNG. Color PNGs,
/// other bit depths and truncated files raise ImageError.
ImageRecord load_image(const std::filesystem::path& path);

/// Writes the pixels rounded and clamped to [0, 255].
void save_image(const ImageRecord& rec, const std::filesystem::path& path);
void save_image(const FeatureMap& pixels, const std::filesystem::path& path);

std::vector<unsigned char> encode_pgm(const FeatureMap& pixels);
FeatureMap decode_pgm(const std::vector<unsigned char>& bytes);

/// Rounds to nearest and clamps to the 8-bit range.
unsigned char to_byte(double v);

}  // namespace mwcnn
