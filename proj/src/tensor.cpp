#include "fcdcc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fcdcc/errors.hpp"

namespace fcdcc {

namespace {

std::string dims_str(const Dims3& d) {
  return std::to_string(d.channels) + "x" + std::to_string(d.height) + "x" +
         std::to_string(d.width);
}

void require_positive(std::size_t v, const char* name) {
  if (v == 0) throw ShapeError(std::string("tensor dimension ") + name + " must be positive");
}

void require_finite(std::span<const double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw ShapeError("tensor entries must be finite");
  }
}

}  // namespace

Tensor3::Tensor3(Dims3 dims) : dims_(dims) {
  require_positive(dims.channels, "channels");
  require_positive(dims.height, "height");
  require_positive(dims.width, "width");
  data_.assign(dims.size(), 0.0);
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  require_positive(dims.channels, "channels");
  require_positive(dims.height, "height");
  require_positive(dims.width, "width");
  if (data_.size() != dims.size()) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match " +
                     dims_str(dims));
  }
  require_finite(data_);
}

Tensor4::Tensor4(Dims4 dims) : dims_(dims) {
  require_positive(dims.out_channels, "out_channels");
  require_positive(dims.in_channels, "in_channels");
  require_positive(dims.kernel_h, "kernel_h");
  require_positive(dims.kernel_w, "kernel_w");
  data_.assign(dims.size(), 0.0);
}

Tensor4::Tensor4(Dims4 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  require_positive(dims.out_channels, "out_channels");
  require_positive(dims.in_channels, "in_channels");
  require_positive(dims.kernel_h, "kernel_h");
  require_positive(dims.kernel_w, "kernel_w");
  if (data_.size() != dims.size()) throw ShapeError("filter data length does not match dims");
  require_finite(data_);
}

OutputDims output_dims(std::size_t height, std::size_t width, ConvParams params,
                       std::size_t kernel_h, std::size_t kernel_w) {
  if (params.stride == 0) throw ParameterError("stride must be at least 1");
  if (kernel_h == 0 || kernel_w == 0) throw ShapeError("kernel dimensions must be positive");
  const std::size_t ph = height + 2 * params.padding;
  const std::size_t pw = width + 2 * params.padding;
  if (ph < kernel_h || pw < kernel_w) {
    throw ShapeError("kernel " + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                     " exceeds padded input " + std::to_string(ph) + "x" + std::to_string(pw));
  }
  return {(ph - kernel_h) / params.stride + 1, (pw - kernel_w) / params.stride + 1};
}

Tensor3 pad_spatial(const Tensor3& x, std::size_t p) {
  if (p == 0) return x;
  Tensor3 out(x.channels(), x.height() + 2 * p, x.width() + 2 * p);
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t h = 0; h < x.height(); ++h)
      std::copy_n(&x(c, h, 0), x.width(), &out(c, h + p, p));
  return out;
}

Tensor3 conv3d_ref(const Tensor3& x, const Tensor4& k, ConvParams params) {
  if (x.channels() != k.in_channels()) {
    throw ShapeError("input has " + std::to_string(x.channels()) +
                     " channels, filter expects " + std::to_string(k.in_channels()));
  }
  const OutputDims od = output_dims(x.height(), x.width(), params, k.kernel_h(), k.kernel_w());
  const Tensor3 xp = pad_spatial(x, params.padding);
  const std::size_t s = params.stride;
  const std::size_t C = k.in_channels(), KH = k.kernel_h(), KW = k.kernel_w();

  Tensor3 y(k.out_channels(), od.height, od.width);
  for (std::size_t n = 0; n < k.out_channels(); ++n) {
    for (std::size_t h = 0; h < od.height; ++h) {
      for (std::size_t w = 0; w < od.width; ++w) {
        double acc = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t i = 0; i < KH; ++i) {
            const double* row = &xp(c, s * h + i, s * w);
            const double* ker = &k(n, c, i, 0);
            for (std::size_t j = 0; j < KW; ++j) acc += row[j] * ker[j];
          }
        }
        y(n, h, w) = acc;
      }
    }
  }
  return y;
}

std::vector<double> vec(const Tensor3& t) { return {t.data().begin(), t.data().end()}; }

Tensor3 reshape(std::span<const double> v, Dims3 dims) {
  if (v.size() != dims.size()) {
    throw ShapeError("cannot reshape " + std::to_string(v.size()) + " entries to " +
                     dims_str(dims));
  }
  return Tensor3(dims, std::vector<double>(v.begin(), v.end()));
}

Tensor3 concat_axis(std::span<const Tensor3> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat_axis needs at least one tensor");
  if (axis != 0 && axis != 1) throw ParameterError("concat_axis supports axis 0 or 1");
  const Dims3 first = parts.front().dims();
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Dims3& d = p.dims();
    const bool ok = axis == 0 ? (d.height == first.height && d.width == first.width)
                              : (d.channels == first.channels && d.width == first.width);
    if (!ok) throw ShapeError("concat_axis: " + dims_str(d) + " incompatible with " + dims_str(first));
    total += axis == 0 ? d.channels : d.height;
  }

  if (axis == 0) {
    Tensor3 out(total, first.height, first.width);
    auto dst = out.data().begin();
    for (const auto& p : parts) dst = std::copy(p.data().begin(), p.data().end(), dst);
    return out;
  }
  Tensor3 out(first.channels, total, first.width);
  for (std::size_t c = 0; c < first.channels; ++c) {
    std::size_t row = 0;
    for (const auto& p : parts) {
      std::copy_n(&p(c, 0, 0), p.height() * p.width(), &out(c, row, 0));
      row += p.height();
    }
  }
  return out;
}

Tensor3 slice_rows(const Tensor3& t, std::size_t begin, std::size_t end) {
  if (begin >= end || end > t.height()) {
    throw ShapeError("row slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of bounds for height " + std::to_string(t.height()));
  }
  Tensor3 out(t.channels(), end - begin, t.width());
  for (std::size_t c = 0; c < t.channels(); ++c)
    std::copy_n(&t(c, begin, 0), (end - begin) * t.width(), &out(c, 0, 0));
  return out;
}

Tensor4 slice_out_channels(const Tensor4& k, std::size_t begin, std::size_t end) {
  if (begin >= end || end > k.out_channels()) throw ShapeError("output-channel slice out of bounds");
  const std::size_t per = k.in_channels() * k.kernel_h() * k.kernel_w();
  Dims4 d = k.dims();
  d.out_channels = end - begin;
  return Tensor4(d, std::vector<double>(k.data().begin() + begin * per,
                                        k.data().begin() + end * per));
}

Tensor4 concat_out_channels(std::span<const Tensor4> parts) {
  if (parts.empty()) throw ShapeError("concat_out_channels needs at least one tensor");
  Dims4 d = parts.front().dims();
  std::size_t n = 0;
  std::vector<double> data;
  for (const auto& p : parts) {
    if (p.in_channels() != d.in_channels || p.kernel_h() != d.kernel_h ||
        p.kernel_w() != d.kernel_w) {
      throw ShapeError("concat_out_channels: inconsistent filter dims");
    }
    n += p.out_channels();
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  d.out_channels = n;
  return Tensor4(d, std::move(data));
}

double mse(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("mse: " + dims_str(a.dims()) + " vs " + dims_str(b.dims()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) throw ShapeError("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// splitmix64
std::uint64_t UniformSource::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double UniformSource::next01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Tensor3 random_tensor3(Dims3 dims, UniformSource& rng, double low, double high) {
  std::vector<double> data(dims.size());
  for (auto& v : data) v = rng.next(low, high);
  return Tensor3(dims, std::move(data));
}

Tensor4 random_tensor4(Dims4 dims, UniformSource& rng, double low, double high) {
  std::vector<double> data(dims.size());
  for (auto& v : data) v = rng.next(low, high);
  return Tensor4(dims, std::move(data));
}

}  // namespace fcdcc
