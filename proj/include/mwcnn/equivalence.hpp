#pragma once

// Independent reference routes for the pooling and dilated-filtering
// identities of the Haar transform. Every function here is computed without
// going through the route it is compared against.

#include "mwcnn/tensor.hpp"
#include "mwcnn/wavelet.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace mwcnn::equivalence {

/// Mean over non-overlapping 2×2 blocks, summed in row-major block order.
FeatureMap avg_pool2(const FeatureMap& x);

/// Rate-2 dilated cross-correlation over the valid region:
/// out(i, j) = bias + Σ_{c,s,t} x(c, i + 2s, j + 2t) · k(c, s, t).
/// Output extent is h − 2(kh − 1) by w − 2(kw − 1).
FeatureMap dilated_conv2(const FeatureMap& x, const ConvKernel& k, int rate = 2);

/// The same filtering computed on the four Haar phase images, each
/// reconstructed as (LL ± LH ± HL ± HH)/4 and convolved with k under zero
/// "same" padding, then interleaved back to full resolution (h × w).
FeatureMap subband_dilated_conv2(const FeatureMap& x, const ConvKernel& k);

/// Crops a full-resolution subband_dilated_conv2 result to the region where
/// it coincides with dilated_conv2: a margin of (k − 1) on every side.
FeatureMap dilated_interior(const FeatureMap& full, const ConvKernel& k);

/// Kernel partitioned into four groups, one per subband block.
struct GroupedKernel {
  std::array<ConvKernel, 4> groups;
};

/// Σ_i conv2d(x_i, k_i) where x_i is the i-th channel block of a
/// dwt_layer-stacked input. Biases of all groups are summed.
FeatureMap grouped_subband_conv(const FeatureMap& x_dwt, const GroupedKernel& k, int pad);

/// Sign of subband `band` in the Haar reconstruction of phase (py, px).
int phase_sign(int py, int px, Band band);

/// Dilated filtering routed through grouped_subband_conv: for each output
/// phase the four groups share k and receive the signed subband terms
/// σ·x_band/4 of that phase's inverse-Haar reconstruction. Same output
/// convention as subband_dilated_conv2.
FeatureMap dilated_via_grouped(const FeatureMap& x, const ConvKernel& k);

/// Set of input offsets that influence a single output unit.
struct Footprint {
  std::vector<std::pair<int, int>> positions;  // (row, col), sorted, unique

  std::size_t count() const { return positions.size(); }
  int min_row() const;
  int max_row() const;
  int min_col() const;
  int max_col() const;
  /// Every position of the bounding box is present.
  bool dense() const;
  bool has_adjacent_pair() const;
  bool contains(int row, int col) const;
  /// Rows of '#' (sampled) and '.' over the bounding box.
  std::string render() const;
};

struct GriddingReport {
  int depth = 1;
  Footprint dilated;         // `depth` stacked rate-2 dilated 3×3 layers
  Footprint wavelet;         // `depth` levels of DWT followed by a 3×3 conv
  std::size_t dilated_neighbor_overlap = 0;  // shared inputs of horizontally adjacent outputs
  std::size_t wavelet_neighbor_overlap = 0;
};

Footprint dilated_footprint(int depth, int kernel = 3, int rate = 2);
Footprint wavelet_footprint(int depth, int kernel = 3);
GriddingReport gridding_report(int depth);

}  // namespace mwcnn::equivalence
