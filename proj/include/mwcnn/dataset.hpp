#pragma once

#include "mwcnn/image_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mwcnn {

struct ManifestEntry {
  std::string id;
  std::string file;
  int height = 0;
  int width = 0;
  bool loaded = false;
  std::string note;  // reason a file was skipped
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<ManifestEntry> manifest;
};

/// Loads every regular file of `dir` in lexicographic filename order.
/// Unreadable or unsupported files are skipped with a warning on stderr and
/// recorded in the manifest. Throws if the directory holds no readable image.
Dataset ingest_dataset(const std::filesystem::path& dir);

/// CSV: id,file,height,width,status,note
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& manifest);

/// Deterministic piecewise-smooth test image (gradient background, filled
/// ellipses and rectangles, a band-limited texture patch), integer valued
/// in [0, 255].
FeatureMap synthetic_image(int height, int width, std::uint64_t seed);

}  // namespace mwcnn
