#include "mwcnn/dataset.hpp"

#include "mwcnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <ostream>

namespace mwcnn {

Dataset ingest_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ImageError("dataset: not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (files.empty()) throw ImageError("dataset: directory is empty: " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  Dataset ds;
  for (const auto& file : files) {
    ManifestEntry entry;
    entry.id = file.stem().string();
    entry.file = file.filename().string();
    try {
      ImageRecord rec = load_image(file);
      entry.height = rec.pixels.height();
      entry.width = rec.pixels.width();
      entry.loaded = true;
      ds.images.push_back(std::move(rec));
    } catch (const ImageError& e) {
      entry.note = e.what();
      std::cerr << "warning: skipping " << file.string() << ": " << e.what() << '\n';
    }
    ds.manifest.push_back(std::move(entry));
  }
  if (ds.images.empty()) throw ImageError("dataset: no readable images in " + dir.string());
  return ds;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& manifest) {
  out << "id,file,height,width,status,note\n";
  for (const auto& e : manifest) {
    std::string note = e.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out << e.id << ',' << e.file << ',' << e.height << ',' << e.width << ','
        << (e.loaded ? "ok" : "skipped") << ',' << note << '\n';
  }
}

FeatureMap synthetic_image(int height, int width, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 17);
  FeatureMap img(Shape{1, 1, height, width});
  const double base = 60.0 + 120.0 * rng.uniform();
  const double gy = (rng.uniform() - 0.5) * 120.0 / height;
  const double gx = (rng.uniform() - 0.5) * 120.0 / width;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img.at(0, 0, y, x) = base + gy * y + gx * x;

  const int shapes = 8 + static_cast<int>(rng.uniform_int(8));
  for (int s = 0; s < shapes; ++s) {
    const double cy = rng.uniform() * height;
    const double cx = rng.uniform() * width;
    const double ry = (0.05 + 0.2 * rng.uniform()) * height;
    const double rx = (0.05 + 0.2 * rng.uniform()) * width;
    const double value = 255.0 * rng.uniform();
    const double shade = (rng.uniform() - 0.5) * 40.0;  // gentle internal gradient
    const bool ellipse = rng.uniform() < 0.6;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) img.at(0, 0, y, x) = value + shade * dy;
      }
  }

  // Texture patch: oriented sinusoid.
  const double ty = rng.uniform() * height * 0.6;
  const double tx = rng.uniform() * width * 0.6;
  const double th = (0.2 + 0.2 * rng.uniform()) * height;
  const double tw = (0.2 + 0.2 * rng.uniform()) * width;
  const double angle = rng.uniform() * std::numbers::pi;
  const double period = 4.0 + 8.0 * rng.uniform();
  const double amp = 20.0 + 30.0 * rng.uniform();
  for (int y = static_cast<int>(ty); y < std::min(height, static_cast<int>(ty + th)); ++y)
    for (int x = static_cast<int>(tx); x < std::min(width, static_cast<int>(tx + tw)); ++x) {
      const double u = std::cos(angle) * x + std::sin(angle) * y;
      img.at(0, 0, y, x) += amp * std::sin(2.0 * std::numbers::pi * u / period);
    }

  for (double& v : img.data()) v = std::clamp(std::round(v), 0.0, 255.0);
  return img;
}

}  // namespace mwcnn
