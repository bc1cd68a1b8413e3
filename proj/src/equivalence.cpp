#include "mwcnn/equivalence.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mwcnn::equivalence {
namespace {

using PositionSet = std::set<std::pair<int, int>>;

void require_even(const FeatureMap& x, const char* op) {
  if (x.height() % 2 != 0 || x.width() % 2 != 0) {
    throw ShapeError(std::string(op) + ": odd spatial size " + x.shape().str());
  }
}

// Rows/cols of the Haar inverse: phase (py, px) = Σ_band sign · band / 4.
constexpr int kPhaseSigns[4][4] = {
    // LL  LH  HL  HH
    {+1, -1, -1, +1},  // (0, 0)
    {+1, -1, +1, -1},  // (0, 1)
    {+1, +1, -1, -1},  // (1, 0)
    {+1, +1, +1, +1},  // (1, 1)
};

FeatureMap interleave(const std::array<FeatureMap, 4>& phases) {
  const Shape& s = phases[0].shape();
  FeatureMap out(Shape{s.n, s.c, s.h * 2, s.w * 2});
  for (int p = 0; p < 4; ++p) {
    const int py = p / 2;
    const int px = p % 2;
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int i = 0; i < s.h; ++i)
          for (int j = 0; j < s.w; ++j) out.at(n, c, 2 * i + py, 2 * j + px) = phases[p].at(n, c, i, j);
  }
  return out;
}

Footprint to_footprint(const PositionSet& set) {
  Footprint f;
  f.positions.assign(set.begin(), set.end());
  return f;
}

PositionSet dilated_set(std::pair<int, int> start, int depth, int kernel, int rate) {
  PositionSet current{start};
  const int r = kernel / 2;
  for (int d = 0; d < depth; ++d) {
    PositionSet next;
    for (const auto& [y, x] : current)
      for (int s = -r; s <= r; ++s)
        for (int t = -r; t <= r; ++t) next.emplace(y + rate * s, x + rate * t);
    current = std::move(next);
  }
  return current;
}

// Walks from a unit at level `depth` down to level 0: each level contributes a
// kernel×kernel neighbourhood, then every position expands to the 2×2 block
// it was decimated from.
PositionSet wavelet_set(std::pair<int, int> start, int depth, int kernel) {
  PositionSet current{start};
  const int r = kernel / 2;
  for (int d = 0; d < depth; ++d) {
    PositionSet conv;
    for (const auto& [y, x] : current)
      for (int s = -r; s <= r; ++s)
        for (int t = -r; t <= r; ++t) conv.emplace(y + s, x + t);
    PositionSet next;
    for (const auto& [y, x] : conv)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) next.emplace(2 * y + a, 2 * x + b);
    current = std::move(next);
  }
  return current;
}

std::size_t overlap(const PositionSet& a, const PositionSet& b) {
  std::size_t n = 0;
  for (const auto& p : a) n += b.count(p);
  return n;
}

}  // namespace

FeatureMap avg_pool2(const FeatureMap& x) {
  require_even(x, "avg_pool2");
  FeatureMap out(Shape{x.batch(), x.channels(), x.height() / 2, x.width() / 2});
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c)
      for (int i = 0; i < out.height(); ++i)
        for (int j = 0; j < out.width(); ++j) {
          double acc = 0.0;
          acc += x.at(n, c, 2 * i, 2 * j);
          acc += x.at(n, c, 2 * i, 2 * j + 1);
          acc += x.at(n, c, 2 * i + 1, 2 * j);
          acc += x.at(n, c, 2 * i + 1, 2 * j + 1);
          out.at(n, c, i, j) = acc / 4.0;
        }
  return out;
}

FeatureMap dilated_conv2(const FeatureMap& x, const ConvKernel& k, int rate) {
  if (rate != 2) throw std::invalid_argument("dilated_conv2: only rate 2 is supported");
  if (x.channels() != k.in_channels) throw ShapeError("dilated_conv2: channel mismatch");
  const int oh = x.height() - rate * (k.kh - 1);
  const int ow = x.width() - rate * (k.kw - 1);
  if (oh < 1 || ow < 1) {
    throw ShapeError("dilated_conv2: dilated kernel larger than input " + x.shape().str());
  }
  FeatureMap out(Shape{x.batch(), k.out_channels, oh, ow});
  for (int n = 0; n < x.batch(); ++n)
    for (int o = 0; o < k.out_channels; ++o)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = k.bias[o];
          for (int c = 0; c < k.in_channels; ++c)
            for (int s = 0; s < k.kh; ++s)
              for (int t = 0; t < k.kw; ++t)
                acc += x.at(n, c, i + rate * s, j + rate * t) * k.w(o, c, s, t);
          out.at(n, o, i, j) = acc;
        }
  return out;
}

FeatureMap subband_dilated_conv2(const FeatureMap& x, const ConvKernel& k) {
  require_even(x, "subband_dilated_conv2");
  const SubbandSet s = dwt2(x, WaveletSpec::haar());
  std::array<FeatureMap, 4> phases;
  for (int p = 0; p < 4; ++p) {
    FeatureMap phase(s.ll.shape());
    for (int b = 0; b < 4; ++b) {
      const double sign = kPhaseSigns[p][b];
      const auto src = s[static_cast<Band>(b)].data();
      auto dst = phase.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += sign * src[i];
    }
    phases[p] = conv2d(scale(phase, 0.25), k, k.kh / 2);
  }
  return interleave(phases);
}

FeatureMap dilated_interior(const FeatureMap& full, const ConvKernel& k) {
  const int my = k.kh - 1;
  const int mx = k.kw - 1;
  return crop(full, my, mx, full.height() - 2 * my, full.width() - 2 * mx);
}

FeatureMap grouped_subband_conv(const FeatureMap& x_dwt, const GroupedKernel& k, int pad) {
  if (x_dwt.channels() % 4 != 0) {
    throw ShapeError("grouped_subband_conv: input channels not divisible by 4");
  }
  const int c = x_dwt.channels() / 4;
  for (const auto& g : k.groups) {
    if (g.in_channels != c || g.out_channels != k.groups[0].out_channels || g.kh != k.groups[0].kh ||
        g.kw != k.groups[0].kw) {
      throw ShapeError("grouped_subband_conv: kernel groups do not match the subband blocks");
    }
  }
  FeatureMap out = conv2d(slice_channels(x_dwt, 0, c), k.groups[0], pad);
  for (int b = 1; b < 4; ++b) out = add(out, conv2d(slice_channels(x_dwt, b * c, c), k.groups[b], pad));
  return out;
}

int phase_sign(int py, int px, Band band) {
  return kPhaseSigns[py * 2 + px][static_cast<int>(band)];
}

FeatureMap dilated_via_grouped(const FeatureMap& x, const ConvKernel& k) {
  require_even(x, "dilated_via_grouped");
  const SubbandSet s = dwt2(x, WaveletSpec::haar());
  GroupedKernel shared{{k, k, k, k}};
  for (int b = 1; b < 4; ++b) std::fill(shared.groups[b].bias.begin(), shared.groups[b].bias.end(), 0.0);
  std::array<FeatureMap, 4> phases;
  for (int p = 0; p < 4; ++p) {
    SubbandSet terms;
    for (int b = 0; b < 4; ++b) {
      const auto band = static_cast<Band>(b);
      terms[band] = scale(s[band], kPhaseSigns[p][b] / 4.0);
    }
    phases[p] = grouped_subband_conv(stack_subbands(terms), shared, k.kh / 2);
  }
  return interleave(phases);
}

int Footprint::min_row() const {
  return std::min_element(positions.begin(), positions.end())->first;
}
int Footprint::max_row() const {
  return std::max_element(positions.begin(), positions.end())->first;
}
int Footprint::min_col() const {
  return std::min_element(positions.begin(), positions.end(),
                          [](auto& a, auto& b) { return a.second < b.second; })
      ->second;
}
int Footprint::max_col() const {
  return std::max_element(positions.begin(), positions.end(),
                          [](auto& a, auto& b) { return a.second < b.second; })
      ->second;
}

bool Footprint::contains(int row, int col) const {
  return std::binary_search(positions.begin(), positions.end(), std::make_pair(row, col));
}

bool Footprint::dense() const {
  if (positions.empty()) return false;
  const auto area = static_cast<std::size_t>(max_row() - min_row() + 1) *
                    static_cast<std::size_t>(max_col() - min_col() + 1);
  return area == positions.size();
}

bool Footprint::has_adjacent_pair() const {
  return std::any_of(positions.begin(), positions.end(), [this](const auto& p) {
    return contains(p.first, p.second + 1) || contains(p.first + 1, p.second);
  });
}

std::string Footprint::render() const {
  std::ostringstream os;
  if (positions.empty()) return {};
  for (int y = min_row(); y <= max_row(); ++y) {
    for (int x = min_col(); x <= max_col(); ++x) os << (contains(y, x) ? '#' : '.');
    os << '\n';
  }
  return os.str();
}

Footprint dilated_footprint(int depth, int kernel, int rate) {
  if (depth < 1) throw std::invalid_argument("dilated_footprint: depth must be >= 1");
  return to_footprint(dilated_set({0, 0}, depth, kernel, rate));
}

Footprint wavelet_footprint(int depth, int kernel) {
  if (depth < 1) throw std::invalid_argument("wavelet_footprint: depth must be >= 1");
  return to_footprint(wavelet_set({0, 0}, depth, kernel));
}

GriddingReport gridding_report(int depth) {
  if (depth < 1) throw std::invalid_argument("gridding_report: depth must be >= 1");
  GriddingReport r;
  r.depth = depth;
  const auto d0 = dilated_set({0, 0}, depth, 3, 2);
  const auto d1 = dilated_set({0, 1}, depth, 3, 2);
  const auto w0 = wavelet_set({0, 0}, depth, 3);
  const auto w1 = wavelet_set({0, 1}, depth, 3);
  r.dilated = to_footprint(d0);
  r.wavelet = to_footprint(w0);
  r.dilated_neighbor_overlap = overlap(d0, d1);
  r.wavelet_neighbor_overlap = overlap(w0, w1);
  return r;
}

}  // namespace mwcnn::equivalence
