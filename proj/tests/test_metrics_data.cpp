#include <doctest.h>

#include "mwcnn/dataset.hpp"
#include "mwcnn/image_io.hpp"
#include "mwcnn/metrics.hpp"
#include "mwcnn/random.hpp"
#include "mwcnn/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mwcnn;
namespace fs = std::filesystem;

namespace {

// 2×2 RGB and 16-bit grayscale PNG files.
const unsigned char kRgbPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x08, 0x02, 0x00, 0x00, 0x00, 0xfd, 0xd4, 0x9a,
    0x73, 0x00, 0x00, 0x00, 0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xe4, 0x3a, 0x21, 0xc7,
    0xc0, 0xc0, 0xc0, 0xc4, 0xc0, 0xc0, 0xc0, 0xc0, 0xc0, 0x00, 0x00, 0x0b, 0x56, 0x00, 0xf4, 0x23,
    0x88, 0x6a, 0x9b, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
const unsigned char kGray16Png[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x10, 0x00, 0x00, 0x00, 0x00, 0x07, 0x4d, 0x8e,
    0xbb, 0x00, 0x00, 0x00, 0x12, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x60, 0x60, 0x7e,
    0xc1, 0x50, 0x6a, 0xf0, 0xff, 0x3f, 0x00, 0x0a, 0xf0, 0x03, 0x8f, 0x32, 0xeb, 0x68, 0xb0, 0x00,
    0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_bytes(const fs::path& p, const void* data, std::size_t n) {
  std::ofstream f(p, std::ios::binary);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_text(const fs::path& p, const std::string& s) { write_bytes(p, s.data(), s.size()); }

FeatureMap random_image(int h, int w, Rng& rng) {
  FeatureMap x(Shape{1, 1, h, w});
  for (double& v : x.data()) v = static_cast<double>(rng.uniform_int(256));
  return x;
}

// Direct per-window SSIM with explicit 2D Gaussian weights.
double ssim_oracle(const FeatureMap& a, const FeatureMap& b) {
  const int win = 11;
  double g[win];
  double gs = 0.0;
  for (int i = 0; i < win; ++i) {
    g[i] = std::exp(-0.5 * (i - 5) * (i - 5) / (1.5 * 1.5));
    gs += g[i];
  }
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0.0;
  int count = 0;
  for (int i = 0; i + win <= a.height(); ++i)
    for (int j = 0; j + win <= a.width(); ++j) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int s = 0; s < win; ++s)
        for (int t = 0; t < win; ++t) {
          const double w = g[s] * g[t] / (gs * gs);
          const double x = a.at(0, 0, i + s, j + t), y = b.at(0, 0, i + s, j + t);
          ma += w * x;
          mb += w * y;
          saa += w * x * x;
          sbb += w * y * y;
          sab += w * x * y;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

}  // namespace

TEST_CASE("PSNR reference values") {
  const FeatureMap a(Shape{1, 1, 4, 4}, 10.0);
  const FeatureMap b(Shape{1, 1, 4, 4}, 11.0);
  CHECK(psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-6));
  CHECK(psnr(a, b) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-14));
  CHECK(psnr(FeatureMap(Shape{1, 1, 2, 2}, 0.0), FeatureMap(Shape{1, 1, 2, 2}, 255.0)) == doctest::Approx(0.0));
  CHECK(std::isinf(psnr(a, a)));
  Rng rng(1);
  const FeatureMap x = random_image(16, 12, rng), y = random_image(16, 12, rng);
  CHECK(psnr(x, y) == psnr(y, x));
  for (int d = 0; d < 8; ++d) CHECK(psnr(dihedral(x, d), dihedral(y, d)) == doctest::Approx(psnr(x, y)).epsilon(1e-14));
  CHECK_THROWS_AS(psnr(x, FeatureMap(Shape{1, 1, 16, 13})), ShapeError);
}

TEST_CASE("SSIM properties") {
  Rng rng(2);
  const FeatureMap a = random_image(32, 32, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  FeatureMap inv = a;
  for (double& v : inv.data()) v = 255.0 - v;
  CHECK(ssim(a, inv) < 1.0);
  const FeatureMap b = random_image(32, 32, rng);
  CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) <= 1e-8);
  const FeatureMap smooth = synthetic_image(40, 48, 3);
  const FeatureMap noisy = [&] {
    Rng r(3);
    return degrade_gaussian(smooth, 10.0, r);
  }();
  CHECK(std::abs(ssim(smooth, noisy) - ssim_oracle(smooth, noisy)) <= 1e-8);

  double previous = -1.0;
  for (const double c : {1.0, 0.1, 0.01}) {
    FeatureMap shifted = a;
    for (double& v : shifted.data()) v += c;
    const double s = ssim(a, shifted);
    CHECK(s > previous);
    CHECK(s < 1.0);
    previous = s;
  }
  CHECK(previous > 0.999999);
  CHECK_THROWS(ssim(FeatureMap(Shape{1, 1, 8, 8}), FeatureMap(Shape{1, 1, 8, 8})));
}

TEST_CASE("SSIM window taps") {
  const auto w = ssim_window();
  REQUIRE(w.size() == 11u);
  double s = 0.0;
  for (double v : w) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[5] > w[4]);
  CHECK(w[0] == doctest::Approx(w[10]).epsilon(1e-15));
}

TEST_CASE("clip_intensity clamps without rounding") {
  const FeatureMap c = clip_intensity(FeatureMap(Shape{1, 1, 1, 4}, {-3.0, 12.4, 255.5, 300.0}));
  CHECK(c.data()[0] == 0.0);
  CHECK(c.data()[1] == 12.4);
  CHECK(c.data()[2] == 255.0);
  CHECK(c.data()[3] == 255.0);
}

TEST_CASE("PGM decoding") {
  std::vector<unsigned char> bytes{'P', '5', '\n', '#', ' ', 'h', 'i', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n'};
  for (unsigned char v : {0, 85, 170, 255}) bytes.push_back(v);
  const FeatureMap x = decode_pgm(bytes);
  CHECK(x.shape() == Shape{1, 1, 2, 2});
  CHECK(x.data()[0] == 0.0);
  CHECK(x.data()[1] == 85.0);
  CHECK(x.data()[2] == 170.0);
  CHECK(x.data()[3] == 255.0);
  CHECK(encode_pgm(x) == std::vector<unsigned char>{'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n', 0, 85,
                                                    170, 255});
  bytes.pop_back();
  CHECK_THROWS_AS(decode_pgm(bytes), ImageError);
  const std::string p2 = "P2\n1 1\n255\n0\n";
  CHECK_THROWS_AS(decode_pgm(std::vector<unsigned char>(p2.begin(), p2.end())), ImageError);
  const std::string deep = "P5\n1 1\n65535\n\x01\x02";
  CHECK_THROWS_AS(decode_pgm(std::vector<unsigned char>(deep.begin(), deep.end())), ImageError);
}

TEST_CASE("save and load round trips") {
  TempDir dir("mwcnn_io_test");
  Rng rng(4);
  const FeatureMap x = random_image(7, 9, rng);
  for (const char* name : {"a.pgm", "b.png", "C.PNG"}) {
    save_image(x, dir.path() / name);
    const ImageRecord r = load_image(dir.path() / name);
    CHECK(max_abs_diff(r.pixels, x) == 0.0);
    CHECK(r.id == fs::path(name).stem().string());
  }
  CHECK(to_byte(-4.0) == 0);
  CHECK(to_byte(127.5) == 128);
  CHECK(to_byte(300.0) == 255);
  CHECK_THROWS_AS(save_image(x, dir.path() / "x.bmp"), ImageError);
}

TEST_CASE("unsupported PNG variants are rejected with explicit errors") {
  TempDir dir("mwcnn_png_test");
  write_bytes(dir.path() / "rgb.png", kRgbPng, sizeof kRgbPng);
  write_bytes(dir.path() / "deep.png", kGray16Png, sizeof kGray16Png);
  try {
    load_image(dir.path() / "rgb.png");
    FAIL("color PNG accepted");
  } catch (const ImageError& e) {
    CHECK(std::string(e.what()).find("unsupported colorspace") != std::string::npos);
  }
  try {
    load_image(dir.path() / "deep.png");
    FAIL("16-bit PNG accepted");
  } catch (const ImageError& e) {
    CHECK(std::string(e.what()).find("unsupported bit depth") != std::string::npos);
  }
  CHECK_THROWS_AS(load_image(dir.path() / "missing.png"), ImageError);
}

TEST_CASE("dataset ingestion") {
  TempDir dir("mwcnn_ingest_test");
  for (int i = 11; i >= 0; --i) {
    std::ostringstream name;
    name << "img" << (i < 10 ? "0" : "") << i << (i % 2 ? ".png" : ".pgm");
    save_image(synthetic_image(16, 20, static_cast<std::uint64_t>(i)), dir.path() / name.str());
  }
  const Dataset d = ingest_dataset(dir.path());
  REQUIRE(d.images.size() == 12u);
  for (int i = 0; i < 12; ++i) {
    CHECK(d.images[i].id == (i < 10 ? "img0" : "img") + std::to_string(i));
    CHECK(max_abs_diff(d.images[i].pixels, synthetic_image(16, 20, static_cast<std::uint64_t>(i))) == 0.0);
  }
  std::ostringstream m1, m2;
  write_manifest(m1, d.manifest);
  write_manifest(m2, ingest_dataset(dir.path()).manifest);
  CHECK(m1.str() == m2.str());
  CHECK(m1.str().rfind("id,file,height,width,status,note\n", 0) == 0);

  write_text(dir.path() / "notes.txt", "hello");
  write_bytes(dir.path() / "rgb.png", kRgbPng, sizeof kRgbPng);
  write_text(dir.path() / "broken.pgm", "P5\n4 4\n255\nxx");
  const Dataset mixed = ingest_dataset(dir.path());
  CHECK(mixed.images.size() == 12u);
  CHECK(mixed.manifest.size() == 15u);
  int skipped = 0;
  for (const auto& e : mixed.manifest) {
    if (!e.loaded) {
      ++skipped;
      CHECK(!e.note.empty());
    }
  }
  CHECK(skipped == 3);

  TempDir empty("mwcnn_ingest_empty");
  CHECK_THROWS(ingest_dataset(empty.path()));
  CHECK_THROWS(ingest_dataset(empty.path() / "nope"));
}

TEST_CASE("synthetic images are deterministic 8-bit integers") {
  const FeatureMap a = synthetic_image(64, 48, 5);
  CHECK(a.shape() == Shape{1, 1, 64, 48});
  CHECK(max_abs_diff(a, synthetic_image(64, 48, 5)) == 0.0);
  CHECK(max_abs_diff(a, synthetic_image(64, 48, 6)) > 0.0);
  for (double v : a.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
    CHECK(v == std::round(v));
  }
}
