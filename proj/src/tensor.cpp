#include "mwcnn/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mwcnn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

struct ConvGeometry {
  int out_h;
  int out_w;
  bool direct;  // 1×1 kernel without padding: the input plane is its own column matrix
};

ConvGeometry conv_geometry(const FeatureMap& x, const ConvKernel& k, int pad) {
  if (pad < 0) throw std::invalid_argument("conv2d: negative padding");
  if (x.channels() != k.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(x.channels()) +
                     " channels, kernel expects " + std::to_string(k.in_channels));
  }
  ConvGeometry g{x.height() - k.kh + 1 + 2 * pad, x.width() - k.kw + 1 + 2 * pad,
                 k.kh == 1 && k.kw == 1 && pad == 0};
  if (g.out_h < 1 || g.out_w < 1) {
    throw ShapeError("conv2d: output would be empty for input " + x.shape().str());
  }
  return g;
}

// Column matrix of batch item n: rows indexed (channel, ky, kx), columns by
// output position.
void im2col(const FeatureMap& x, int n, const ConvKernel& k, int pad, const ConvGeometry& g,
            AlignedVector& col) {
  const int H = x.height();
  const int W = x.width();
  const std::size_t cols = static_cast<std::size_t>(g.out_h) * g.out_w;
  col.assign(static_cast<std::size_t>(k.in_channels) * k.kh * k.kw * cols, 0.0);
  std::size_t row = 0;
  for (int c = 0; c < k.in_channels; ++c) {
    const auto src = x.plane(n, c);
    for (int ky = 0; ky < k.kh; ++ky) {
      for (int kx = 0; kx < k.kw; ++kx, ++row) {
        double* dst = col.data() + row * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= H) continue;
          const int x_lo = std::max(0, pad - kx);
          const int x_hi = std::min(g.out_w, W + pad - kx);
          const double* s = src.data() + static_cast<std::size_t>(iy) * W;
          double* d = dst + static_cast<std::size_t>(oy) * g.out_w;
          for (int ox = x_lo; ox < x_hi; ++ox) d[ox] = s[ox + kx - pad];
        }
      }
    }
  }
}

void col2im_add(const AlignedVector& col, const ConvKernel& k, int pad,
                const ConvGeometry& g, FeatureMap& dx, int n) {
  const int H = dx.height();
  const int W = dx.width();
  const std::size_t cols = static_cast<std::size_t>(g.out_h) * g.out_w;
  std::size_t row = 0;
  for (int c = 0; c < k.in_channels; ++c) {
    auto dst = dx.plane(n, c);
    for (int ky = 0; ky < k.kh; ++ky) {
      for (int kx = 0; kx < k.kw; ++kx, ++row) {
        const double* src = col.data() + row * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= H) continue;
          const int x_lo = std::max(0, pad - kx);
          const int x_hi = std::min(g.out_w, W + pad - kx);
          const double* s = src + static_cast<std::size_t>(oy) * g.out_w;
          double* d = dst.data() + static_cast<std::size_t>(iy) * W;
          for (int ox = x_lo; ox < x_hi; ++ox) d[ox + kx - pad] += s[ox];
        }
      }
    }
  }
}

}  // namespace

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << n << ',' << c << ',' << h << ',' << w << ')';
  return os.str();
}

FeatureMap::FeatureMap(Shape shape, double fill) : shape_(shape) {
  if (shape.n < 1 || shape.c < 0 || shape.h < 1 || shape.w < 1) {
    throw ShapeError("FeatureMap: invalid shape " + shape.str());
  }
  data_.assign(shape.numel(), fill);
}

FeatureMap::FeatureMap(Shape shape, std::vector<double> values)
    : FeatureMap(shape) {
  if (values.size() != shape.numel()) {
    throw ShapeError("FeatureMap: " + std::to_string(values.size()) +
                     " values do not fill shape " + shape.str());
  }
  data_.assign(values.begin(), values.end());
}

bool FeatureMap::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ConvKernel::ConvKernel(int out_c, int in_c, int kernel_h, int kernel_w)
    : out_channels(out_c), in_channels(in_c), kh(kernel_h), kw(kernel_w) {
  if (out_c < 1 || in_c < 1 || kernel_h < 1 || kernel_w < 1) {
    throw ShapeError("ConvKernel: dimensions must be positive");
  }
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw ShapeError("ConvKernel: kernel extents must be odd");
  }
  weights.assign(static_cast<std::size_t>(out_c) * in_c * kernel_h * kernel_w, 0.0);
  bias.assign(static_cast<std::size_t>(out_c), 0.0);
}

FeatureMap conv2d(const FeatureMap& x, const ConvKernel& k, int pad) {
  const ConvGeometry g = conv_geometry(x, k, pad);
  FeatureMap out(Shape{x.batch(), k.out_channels, g.out_h, g.out_w});
  const Eigen::Index patch = static_cast<Eigen::Index>(k.in_channels) * k.kh * k.kw;
  const Eigen::Index cols = static_cast<Eigen::Index>(g.out_h) * g.out_w;
  ConstMatrixMap wmat(k.weights.data(), k.out_channels, patch);
  AlignedVector col;
  for (int n = 0; n < x.batch(); ++n) {
    MatrixMap dst(out.plane(n, 0).data(), k.out_channels, cols);
    if (g.direct) {
      ConstMatrixMap src(x.plane(n, 0).data(), patch, cols);
      dst.noalias() = wmat * src;
    } else {
      im2col(x, n, k, pad, g, col);
      ConstMatrixMap src(col.data(), patch, cols);
      dst.noalias() = wmat * src;
    }
    for (int o = 0; o < k.out_channels; ++o) dst.row(o).array() += k.bias[o];
  }
  return out;
}

void conv2d_backward(const FeatureMap& x, const ConvKernel& k, int pad,
                     const FeatureMap& grad_out, FeatureMap* dx, ConvKernel* dk) {
  const ConvGeometry g = conv_geometry(x, k, pad);
  if (grad_out.shape() != Shape{x.batch(), k.out_channels, g.out_h, g.out_w}) {
    throw ShapeError("conv2d_backward: gradient shape " + grad_out.shape().str());
  }
  if (dk && (dk->weights.size() != k.weights.size() || dk->bias.size() != k.bias.size())) {
    throw ShapeError("conv2d_backward: kernel gradient shaped unlike kernel");
  }
  if (dx) *dx = FeatureMap(x.shape());
  const Eigen::Index patch = static_cast<Eigen::Index>(k.in_channels) * k.kh * k.kw;
  const Eigen::Index cols = static_cast<Eigen::Index>(g.out_h) * g.out_w;
  ConstMatrixMap wmat(k.weights.data(), k.out_channels, patch);
  AlignedVector col;
  AlignedVector dcol;
  for (int n = 0; n < x.batch(); ++n) {
    ConstMatrixMap gout(grad_out.plane(n, 0).data(), k.out_channels, cols);
    const double* col_data = nullptr;
    if (g.direct) {
      col_data = x.plane(n, 0).data();
    } else if (dk) {
      im2col(x, n, k, pad, g, col);
      col_data = col.data();
    }
    if (dk) {
      ConstMatrixMap src(col_data, patch, cols);
      MatrixMap dw(dk->weights.data(), k.out_channels, patch);
      dw.noalias() += gout * src.transpose();
      for (int o = 0; o < k.out_channels; ++o) dk->bias[o] += gout.row(o).sum();
    }
    if (dx) {
      if (g.direct) {
        MatrixMap dst(dx->plane(n, 0).data(), patch, cols);
        dst.noalias() = wmat.transpose() * gout;
      } else {
        dcol.resize(static_cast<std::size_t>(patch * cols));
        MatrixMap dst(dcol.data(), patch, cols);
        dst.noalias() = wmat.transpose() * gout;
        col2im_add(dcol, k, pad, g, *dx, n);
      }
    }
  }
}

FeatureMap relu(const FeatureMap& x) {
  FeatureMap out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                 [](double v) { return v > 0.0 ? v : 0.0; });
  return out;
}

FeatureMap add(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "add");
  FeatureMap out(a.shape());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                 [](double u, double v) { return u + v; });
  return out;
}

FeatureMap subtract(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "subtract");
  FeatureMap out(a.shape());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                 [](double u, double v) { return u - v; });
  return out;
}

FeatureMap scale(const FeatureMap& x, double factor) {
  FeatureMap out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                 [factor](double v) { return v * factor; });
  return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("concat_channels: " + a.shape().str() + " and " + b.shape().str() +
                     " differ outside the channel axis");
  }
  FeatureMap out(Shape{a.batch(), a.channels() + b.channels(), a.height(), a.width()});
  const std::size_t plane = a.shape().plane();
  auto dst = out.data().begin();
  for (int n = 0; n < a.batch(); ++n) {
    const auto sa = a.data().subspan(static_cast<std::size_t>(n) * a.channels() * plane,
                                     static_cast<std::size_t>(a.channels()) * plane);
    const auto sb = b.data().subspan(static_cast<std::size_t>(n) * b.channels() * plane,
                                     static_cast<std::size_t>(b.channels()) * plane);
    dst = std::copy(sa.begin(), sa.end(), dst);
    dst = std::copy(sb.begin(), sb.end(), dst);
  }
  return out;
}

FeatureMap slice_channels(const FeatureMap& x, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > x.channels()) {
    throw ShapeError("slice_channels: range out of bounds for " + x.shape().str());
  }
  FeatureMap out(Shape{x.batch(), count, x.height(), x.width()});
  for (int n = 0; n < x.batch(); ++n) {
    for (int c = 0; c < count; ++c) {
      const auto src = x.plane(n, begin + c);
      std::copy(src.begin(), src.end(), out.plane(n, c).begin());
    }
  }
  return out;
}

FeatureMap crop(const FeatureMap& x, int top, int left, int h, int w) {
  if (top < 0 || left < 0 || h < 1 || w < 1 || top + h > x.height() || left + w > x.width()) {
    throw ShapeError("crop: window exceeds " + x.shape().str());
  }
  FeatureMap out(Shape{x.batch(), x.channels(), h, w});
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c)
      for (int y = 0; y < h; ++y)
        for (int i = 0; i < w; ++i) out.at(n, c, y, i) = x.at(n, c, top + y, left + i);
  return out;
}

double sum(const FeatureMap& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return s;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace mwcnn
