#pragma once

#include "mwcnn/autograd.hpp"
#include "mwcnn/tensor.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace mwcnn {

enum class WaveletKind { haar, db2 };

/// paper: unnormalized ±1 analysis taps for Haar, synthesis divided by 4
/// (DB2 scaled the same way: analysis 2× orthonormal, synthesis ½×).
/// orthonormal: analysis and synthesis taps are both the unit-energy filters.
enum class Normalization { paper, orthonormal };

enum class Boundary { none, periodic };

/// Subband order used everywhere: LL, LH, HL, HH.
enum class Band { ll = 0, lh = 1, hl = 2, hh = 3 };

/// A 2D four-band filter bank. Taps are stored row-major as support×support
/// grids; tap (a, b) of band k touches input pixel (2i + a, 2j + b) when
/// producing subband pixel (i, j).
struct WaveletSpec {
  WaveletKind kind = WaveletKind::haar;
  Normalization normalization = Normalization::paper;
  Boundary boundary = Boundary::none;
  int support = 2;
  std::array<std::vector<double>, 4> analysis;
  std::array<std::vector<double>, 4> synthesis;

  static WaveletSpec haar(Normalization norm = Normalization::paper);
  static WaveletSpec db2(Normalization norm = Normalization::paper);
  static WaveletSpec make(WaveletKind kind, Normalization norm = Normalization::paper);

  double analysis_tap(Band band, int a, int b) const {
    return analysis[static_cast<int>(band)][static_cast<std::size_t>(a) * support + b];
  }

  /// Smallest spatial extent dwt2 accepts.
  int min_extent() const { return kind == WaveletKind::db2 ? 4 : 2; }
  std::string name() const;
};

WaveletKind parse_wavelet(std::string_view name);
std::string_view to_string(WaveletKind kind);

struct SubbandSet {
  FeatureMap ll;
  FeatureMap lh;
  FeatureMap hl;
  FeatureMap hh;

  const FeatureMap& operator[](Band b) const;
  FeatureMap& operator[](Band b);
};

/// Single-level 2D DWT applied to every (n, c) plane. Rejects odd or too-small
/// extents; there is no implicit padding.
SubbandSet dwt2(const FeatureMap& x, const WaveletSpec& spec);
FeatureMap iwt2(const SubbandSet& s, const WaveletSpec& spec);

/// Adjoints of dwt2 / iwt2 as linear maps (used for backpropagation).
FeatureMap dwt2_adjoint(const SubbandSet& grad, const WaveletSpec& spec);
SubbandSet iwt2_adjoint(const FeatureMap& grad, const WaveletSpec& spec);

/// Full wavelet packet tree: every subband is split again at each level.
/// Leaves are returned depth-first in LL, LH, HL, HH order (4^levels maps).
std::vector<FeatureMap> wpt_decompose(const FeatureMap& x, const WaveletSpec& spec, int levels);
FeatureMap wpt_reconstruct(const std::vector<FeatureMap>& leaves, const WaveletSpec& spec,
                           int levels);

/// DWT with subbands stacked on the channel axis as [LL | LH | HL | HH]
/// blocks: (n, c, h, w) → (n, 4c, h/2, w/2).
FeatureMap dwt_layer(const FeatureMap& x, const WaveletSpec& spec);
/// Inverse of dwt_layer: (n, 4c, h, w) → (n, c, 2h, 2w).
FeatureMap iwt_layer(const FeatureMap& x, const WaveletSpec& spec);

SubbandSet split_subbands(const FeatureMap& stacked);
FeatureMap stack_subbands(const SubbandSet& s);

namespace ad {
Var dwt_layer(GradTape& tape, Var x, const WaveletSpec& spec);
Var iwt_layer(GradTape& tape, Var x, const WaveletSpec& spec);
}  // namespace ad

}  // namespace mwcnn
