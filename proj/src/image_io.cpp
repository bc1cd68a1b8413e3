#include "mwcnn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace mwcnn {
namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// PNM header token reader: skips whitespace and '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  int number() {
    skip();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw ImageError("pgm: malformed header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1 << 24) throw ImageError("pgm: header value out of range");
    }
    return static_cast<int>(v);
  }
  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  void skip() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 2;
};

ImageRecord load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ImageError("png: " + path.string() + ": " + image.message);
  }
  const auto fail = [&](const std::string& what) {
    png_image_free(&image);
    throw ImageError("png: " + path.string() + ": " + what);
  };
  if (image.format & PNG_FORMAT_FLAG_COLOR) fail("unsupported colorspace (color image; only grayscale is supported)");
  if (image.format & PNG_FORMAT_FLAG_ALPHA) fail("unsupported colorspace (alpha channel)");
  if (image.format & PNG_FORMAT_FLAG_LINEAR) fail("unsupported bit depth (16-bit)");
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageError("png: " + path.string() + ": " + msg);
  }
  FeatureMap px(Shape{1, 1, static_cast<int>(image.height), static_cast<int>(image.width)});
  std::transform(buffer.begin(), buffer.end(), px.data().begin(),
                 [](unsigned char b) { return static_cast<double>(b); });
  return ImageRecord{path.stem().string(), std::move(px), 8};
}

void save_png(const FeatureMap& pixels, const std::filesystem::path& path) {
  std::vector<unsigned char> buffer(pixels.size());
  std::transform(pixels.data().begin(), pixels.data().end(), buffer.begin(), to_byte);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.width());
  image.height = static_cast<png_uint_32>(pixels.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw ImageError("png: cannot write " + path.string() + ": " + image.message);
  }
}

void require_gray_plane(const FeatureMap& pixels) {
  if (pixels.batch() != 1 || pixels.channels() != 1) {
    throw ImageError("image must be a single grayscale plane, got " + pixels.shape().str());
  }
}

}  // namespace

unsigned char to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<unsigned char>(std::lround(v));
}

ImageFormat format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return ImageFormat::pgm;
  if (ext == ".png") return ImageFormat::png;
  throw ImageError("unsupported image format '" + ext + "' for " + path.string());
}

std::vector<unsigned char> encode_pgm(const FeatureMap& pixels) {
  require_gray_plane(pixels);
  const std::string header =
      "P5\n" + std::to_string(pixels.width()) + " " + std::to_string(pixels.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + pixels.size());
  for (double v : pixels.data()) out.push_back(to_byte(v));
  return out;
}

FeatureMap decode_pgm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ImageError("pgm: not a PNM file");
  if (bytes[1] != '5') throw ImageError(std::string("pgm: unsupported PNM variant P") + char(bytes[1]));
  HeaderReader header(bytes);
  const int w = header.number();
  const int h = header.number();
  const int maxval = header.number();
  if (w < 1 || h < 1) throw ImageError("pgm: empty image");
  if (maxval != 255) throw ImageError("pgm: unsupported bit depth (maxval " + std::to_string(maxval) + ")");
  if (header.pos() >= bytes.size() || !std::isspace(bytes[header.pos()])) {
    throw ImageError("pgm: malformed header");
  }
  const std::size_t start = header.pos() + 1;
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() < start + need) throw ImageError("pgm: truncated pixel data");
  FeatureMap px(Shape{1, 1, h, w});
  std::transform(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                 bytes.begin() + static_cast<std::ptrdiff_t>(start + need), px.data().begin(),
                 [](unsigned char b) { return static_cast<double>(b); });
  return px;
}

ImageRecord load_image(const std::filesystem::path& path) {
  switch (format_for(path)) {
    case ImageFormat::pgm:
      return ImageRecord{path.stem().string(), decode_pgm(read_file(path)), 8};
    case ImageFormat::png:
      return load_png(path);
  }
  throw ImageError("unreachable");
}

void save_image(const FeatureMap& pixels, const std::filesystem::path& path) {
  require_gray_plane(pixels);
  switch (format_for(path)) {
    case ImageFormat::pgm: {
      const auto bytes = encode_pgm(pixels);
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw ImageError("cannot write " + path.string());
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw ImageError("write failed for " + path.string());
      return;
    }
    case ImageFormat::png:
      save_png(pixels, path);
      return;
  }
}

void save_image(const ImageRecord& rec, const std::filesystem::path& path) {
  save_image(rec.pixels, path);
}

}  // namespace mwcnn
