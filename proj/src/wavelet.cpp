#include "mwcnn/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace mwcnn {
namespace {

using Taps = std::array<std::vector<double>, 4>;

// Separable 2D bank from a 1D orthonormal low-pass filter. The high-pass is
// g[m] = (-1)^(m+1) h[L-1-m], which for Haar gives [-1, 1]/√2 and therefore
// the sign pattern LH = bottom − top, HL = right − left.
Taps separable_bank(const std::vector<double>& low, double gain) {
  const int L = static_cast<int>(low.size());
  std::vector<double> high(L);
  for (int m = 0; m < L; ++m) high[m] = (m % 2 == 0 ? -1.0 : 1.0) * low[L - 1 - m];
  const std::array<const std::vector<double>*, 4> vertical{&low, &high, &low, &high};
  const std::array<const std::vector<double>*, 4> horizontal{&low, &low, &high, &high};
  Taps taps;
  for (int b = 0; b < 4; ++b) {
    taps[b].resize(static_cast<std::size_t>(L) * L);
    for (int a = 0; a < L; ++a)
      for (int c = 0; c < L; ++c)
        taps[b][static_cast<std::size_t>(a) * L + c] =
            gain * (*vertical[b])[a] * (*horizontal[b])[c];
  }
  return taps;
}

void check_extent(const Shape& s, const WaveletSpec& spec, const char* op) {
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError(std::string(op) + ": odd spatial size " + s.str() + " (pad before transforming)");
  }
  if (s.h < spec.min_extent() || s.w < spec.min_extent()) {
    throw ShapeError(std::string(op) + ": spatial size " + s.str() + " below " +
                     std::to_string(spec.min_extent()) + " for " + spec.name());
  }
}

// Source index for (2i + a) under the spec's boundary rule.
std::vector<int> phase_index(int half, int extent, int support) {
  std::vector<int> idx(static_cast<std::size_t>(half) * support);
  for (int i = 0; i < half; ++i)
    for (int a = 0; a < support; ++a) idx[static_cast<std::size_t>(i) * support + a] = (2 * i + a) % extent;
  return idx;
}

// out[band](i, j) = Σ_ab taps[band](a, b) · x(2i + a, 2j + b)
SubbandSet gather(const FeatureMap& x, const Taps& taps, const WaveletSpec& spec) {
  const Shape half{x.batch(), x.channels(), x.height() / 2, x.width() / 2};
  SubbandSet out{FeatureMap(half), FeatureMap(half), FeatureMap(half), FeatureMap(half)};
  const int S = spec.support;
  const auto rows = phase_index(half.h, x.height(), S);
  const auto cols = phase_index(half.w, x.width(), S);
  const int W = x.width();
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < x.channels(); ++c) {
      const auto src = x.plane(n, c);
      for (int b = 0; b < 4; ++b) {
        auto dst = out[static_cast<Band>(b)].plane(n, c);
        const auto& t = taps[b];
        for (int i = 0; i < half.h; ++i) {
          for (int j = 0; j < half.w; ++j) {
            double acc = 0.0;
            for (int a = 0; a < S; ++a) {
              const double* row = src.data() + static_cast<std::size_t>(rows[i * S + a]) * W;
              for (int e = 0; e < S; ++e) acc += t[a * S + e] * row[cols[j * S + e]];
            }
            dst[static_cast<std::size_t>(i) * half.w + j] = acc;
          }
        }
      }
    }
  }
  return out;
}

// Transpose of gather: x(2i + a, 2j + b) += Σ_band taps[band](a, b) · s[band](i, j)
FeatureMap scatter(const SubbandSet& s, const Taps& taps, const WaveletSpec& spec) {
  const Shape& half = s.ll.shape();
  for (int b = 1; b < 4; ++b) {
    if (s[static_cast<Band>(b)].shape() != half) {
      throw ShapeError("iwt2: subband shapes disagree");
    }
  }
  const Shape full{half.n, half.c, half.h * 2, half.w * 2};
  check_extent(full, spec, "iwt2");
  FeatureMap out(full);
  const int S = spec.support;
  const auto rows = phase_index(half.h, full.h, S);
  const auto cols = phase_index(half.w, full.w, S);
  for (int n = 0; n < half.n; ++n) {
    for (int c = 0; c < half.c; ++c) {
      auto dst = out.plane(n, c);
      for (int i = 0; i < half.h; ++i) {
        for (int j = 0; j < half.w; ++j) {
          const std::size_t k = static_cast<std::size_t>(i) * half.w + j;
          const double v[4] = {s.ll.plane(n, c)[k], s.lh.plane(n, c)[k], s.hl.plane(n, c)[k],
                               s.hh.plane(n, c)[k]};
          for (int a = 0; a < S; ++a) {
            double* row = dst.data() + static_cast<std::size_t>(rows[i * S + a]) * full.w;
            for (int e = 0; e < S; ++e) {
              const std::size_t t = static_cast<std::size_t>(a) * S + e;
              row[cols[j * S + e]] +=
                  taps[0][t] * v[0] + taps[1][t] * v[1] + taps[2][t] * v[2] + taps[3][t] * v[3];
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

WaveletSpec WaveletSpec::haar(Normalization norm) { return make(WaveletKind::haar, norm); }
WaveletSpec WaveletSpec::db2(Normalization norm) { return make(WaveletKind::db2, norm); }

WaveletSpec WaveletSpec::make(WaveletKind kind, Normalization norm) {
  WaveletSpec spec;
  spec.kind = kind;
  spec.normalization = norm;
  std::vector<double> low;
  if (kind == WaveletKind::haar) {
    spec.boundary = Boundary::none;
    low = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  } else {
    spec.boundary = Boundary::periodic;
    const double r3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    low = {(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d};
  }
  spec.support = static_cast<int>(low.size());
  const bool paper = norm == Normalization::paper;
  spec.analysis = separable_bank(low, paper ? 2.0 : 1.0);
  spec.synthesis = separable_bank(low, paper ? 0.5 : 1.0);
  if (kind == WaveletKind::haar && paper) {
    // Exact ±1 and ±1/4 rather than products of rounded 1/√2.
    for (auto& t : spec.analysis)
      for (double& v : t) v = v > 0 ? 1.0 : -1.0;
    for (auto& t : spec.synthesis)
      for (double& v : t) v = v > 0 ? 0.25 : -0.25;
  } else if (kind == WaveletKind::haar) {
    for (auto* bank : {&spec.analysis, &spec.synthesis})
      for (auto& t : *bank)
        for (double& v : t) v = v > 0 ? 0.5 : -0.5;
  }
  return spec;
}

std::string WaveletSpec::name() const {
  std::string n(to_string(kind));
  if (normalization == Normalization::orthonormal) n += "/orthonormal";
  return n;
}

WaveletKind parse_wavelet(std::string_view name) {
  if (name == "haar") return WaveletKind::haar;
  if (name == "db2") return WaveletKind::db2;
  throw std::invalid_argument("unknown wavelet '" + std::string(name) + "' (expected haar or db2)");
}

std::string_view to_string(WaveletKind kind) {
  return kind == WaveletKind::haar ? "haar" : "db2";
}

const FeatureMap& SubbandSet::operator[](Band b) const {
  switch (b) {
    case Band::ll: return ll;
    case Band::lh: return lh;
    case Band::hl: return hl;
    case Band::hh: return hh;
  }
  throw std::logic_error("bad band");
}

FeatureMap& SubbandSet::operator[](Band b) {
  return const_cast<FeatureMap&>(static_cast<const SubbandSet&>(*this)[b]);
}

SubbandSet dwt2(const FeatureMap& x, const WaveletSpec& spec) {
  check_extent(x.shape(), spec, "dwt2");
  return gather(x, spec.analysis, spec);
}

FeatureMap iwt2(const SubbandSet& s, const WaveletSpec& spec) {
  return scatter(s, spec.synthesis, spec);
}

FeatureMap dwt2_adjoint(const SubbandSet& grad, const WaveletSpec& spec) {
  return scatter(grad, spec.analysis, spec);
}

SubbandSet iwt2_adjoint(const FeatureMap& grad, const WaveletSpec& spec) {
  check_extent(grad.shape(), spec, "iwt2_adjoint");
  return gather(grad, spec.synthesis, spec);
}

std::vector<FeatureMap> wpt_decompose(const FeatureMap& x, const WaveletSpec& spec, int levels) {
  if (levels < 1) throw std::invalid_argument("wpt_decompose: levels must be >= 1");
  const int factor = 1 << levels;
  if (x.height() % factor != 0 || x.width() % factor != 0) {
    throw ShapeError("wpt_decompose: " + x.shape().str() + " not divisible by 2^" +
                     std::to_string(levels));
  }
  SubbandSet s = dwt2(x, spec);
  std::vector<FeatureMap> leaves;
  leaves.reserve(static_cast<std::size_t>(1) << (2 * levels));
  for (int b = 0; b < 4; ++b) {
    FeatureMap& band = s[static_cast<Band>(b)];
    if (levels == 1) {
      leaves.push_back(std::move(band));
    } else {
      auto sub = wpt_decompose(band, spec, levels - 1);
      for (auto& leaf : sub) leaves.push_back(std::move(leaf));
    }
  }
  return leaves;
}

namespace {
FeatureMap wpt_reconstruct_range(const std::vector<FeatureMap>& leaves, std::size_t begin,
                                 const WaveletSpec& spec, int levels) {
  const std::size_t per_band = static_cast<std::size_t>(1) << (2 * (levels - 1));
  SubbandSet s;
  for (int b = 0; b < 4; ++b) {
    const std::size_t first = begin + b * per_band;
    s[static_cast<Band>(b)] =
        levels == 1 ? leaves[first] : wpt_reconstruct_range(leaves, first, spec, levels - 1);
  }
  return iwt2(s, spec);
}
}  // namespace

FeatureMap wpt_reconstruct(const std::vector<FeatureMap>& leaves, const WaveletSpec& spec,
                           int levels) {
  if (levels < 1) throw std::invalid_argument("wpt_reconstruct: levels must be >= 1");
  const std::size_t expected = static_cast<std::size_t>(1) << (2 * levels);
  if (leaves.size() != expected) {
    throw ShapeError("wpt_reconstruct: expected " + std::to_string(expected) + " leaves, got " +
                     std::to_string(leaves.size()));
  }
  for (const auto& leaf : leaves) {
    if (leaf.shape() != leaves.front().shape()) throw ShapeError("wpt_reconstruct: leaf shapes differ");
  }
  return wpt_reconstruct_range(leaves, 0, spec, levels);
}

SubbandSet split_subbands(const FeatureMap& stacked) {
  if (stacked.channels() % 4 != 0) {
    throw ShapeError("split_subbands: channel count " + std::to_string(stacked.channels()) +
                     " not divisible by 4");
  }
  const int c = stacked.channels() / 4;
  return SubbandSet{slice_channels(stacked, 0, c), slice_channels(stacked, c, c),
                    slice_channels(stacked, 2 * c, c), slice_channels(stacked, 3 * c, c)};
}

FeatureMap stack_subbands(const SubbandSet& s) {
  return concat_channels(concat_channels(s.ll, s.lh), concat_channels(s.hl, s.hh));
}

FeatureMap dwt_layer(const FeatureMap& x, const WaveletSpec& spec) {
  return stack_subbands(dwt2(x, spec));
}

FeatureMap iwt_layer(const FeatureMap& x, const WaveletSpec& spec) {
  return iwt2(split_subbands(x), spec);
}

namespace ad {

Var dwt_layer(GradTape& tape, Var x, const WaveletSpec& spec) {
  FeatureMap out = mwcnn::dwt_layer(tape.value(x), spec);
  return tape.record(std::move(out), {x}, [x, spec](const FeatureMap& g, AdjointSink& sink) {
    sink.accumulate(x, dwt2_adjoint(split_subbands(g), spec));
  });
}

Var iwt_layer(GradTape& tape, Var x, const WaveletSpec& spec) {
  FeatureMap out = mwcnn::iwt_layer(tape.value(x), spec);
  return tape.record(std::move(out), {x}, [x, spec](const FeatureMap& g, AdjointSink& sink) {
    sink.accumulate(x, stack_subbands(iwt2_adjoint(g, spec)));
  });
}

}  // namespace ad
}  // namespace mwcnn
