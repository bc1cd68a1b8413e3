#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwcnn {

/// Thrown when operand shapes violate an operation's precondition.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 64-byte aligned storage. Vectorized kernels pick their summation order
/// from pointer alignment, so a fixed alignment keeps results bitwise
/// reproducible from run to run.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

/// (batch, channels, height, width). Channel count 0 is permitted so that an
/// empty map can act as the neutral element of channel concatenation.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense NCHW array of doubles.
class FeatureMap {
 public:
  FeatureMap() : FeatureMap(Shape{}) {}
  explicit FeatureMap(Shape shape, double fill = 0.0);
  FeatureMap(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  int batch() const { return shape_.n; }
  int channels() const { return shape_.c; }
  int height() const { return shape_.h; }
  int width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  std::span<const double> data() && = delete;  // would dangle

  double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  /// One (n, c) image plane, row-major h×w.
  std::span<double> plane(int n, int c) {
    return std::span<double>(data_).subspan(plane_offset(n, c), shape_.plane());
  }
  std::span<const double> plane(int n, int c) const {
    return std::span<const double>(data_).subspan(plane_offset(n, c), shape_.plane());
  }

  bool all_finite() const;

 private:
  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  std::size_t plane_offset(int n, int c) const {
    return (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
  }

  Shape shape_;
  AlignedVector data_;
};

/// Convolution weights (out, in, kh, kw) plus one bias per output channel.
/// Kernel extents must be odd.
struct ConvKernel {
  int out_channels = 1;
  int in_channels = 1;
  int kh = 1;
  int kw = 1;
  AlignedVector weights;
  AlignedVector bias;

  ConvKernel() : ConvKernel(1, 1, 1, 1) {}
  ConvKernel(int out_c, int in_c, int kernel_h, int kernel_w);

  double& w(int o, int i, int y, int x) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kh + y) * kw + x];
  }
  double w(int o, int i, int y, int x) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kh + y) * kw + x];
  }
  std::size_t weight_count() const { return weights.size(); }
  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

/// Cross-correlation (no kernel flip), stride 1, zero padding on all sides.
FeatureMap conv2d(const FeatureMap& x, const ConvKernel& k, int pad);

/// Adjoints of conv2d. Any output pointer may be null. Kernel gradients are
/// accumulated into `dk` (which must be shaped like `k`); `dx` is overwritten.
void conv2d_backward(const FeatureMap& x, const ConvKernel& k, int pad,
                     const FeatureMap& grad_out, FeatureMap* dx, ConvKernel* dk);

FeatureMap relu(const FeatureMap& x);
FeatureMap add(const FeatureMap& a, const FeatureMap& b);
FeatureMap subtract(const FeatureMap& a, const FeatureMap& b);
FeatureMap scale(const FeatureMap& x, double factor);
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

/// Channels [begin, begin + count) of x.
FeatureMap slice_channels(const FeatureMap& x, int begin, int count);

/// Spatial window [top, top+h) × [left, left+w).
FeatureMap crop(const FeatureMap& x, int top, int left, int h, int w);

double sum(const FeatureMap& x);
double max_abs_diff(const FeatureMap& a, const FeatureMap& b);

}  // namespace mwcnn
