#pragma once

// Dense real tensors, the reference convolution, and the reshaping
// primitives the coded pipeline is built from.
//
// Storage is lexicographic: channel outermost, width innermost for Tensor3;
// output channel outermost, kernel width innermost for Tensor4.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fcdcc {

struct ConvParams {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct OutputDims {
  std::size_t height;
  std::size_t width;
  bool operator==(const OutputDims&) const = default;
};

/// Shape of a Tensor3 as (channels, height, width).
struct Dims3 {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
  std::size_t size() const { return channels * height * width; }
  bool operator==(const Dims3&) const = default;
};

class Tensor3 {
 public:
  /// Zero-filled tensor. All dimensions must be positive.
  explicit Tensor3(Dims3 dims);
  Tensor3(std::size_t channels, std::size_t height, std::size_t width)
      : Tensor3(Dims3{channels, height, width}) {}
  /// Takes ownership of `data`; its length must match and every entry must be
  /// finite.
  Tensor3(Dims3 dims, std::vector<double> data);

  const Dims3& dims() const { return dims_; }
  std::size_t channels() const { return dims_.channels; }
  std::size_t height() const { return dims_.height; }
  std::size_t width() const { return dims_.width; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t c, std::size_t h, std::size_t w) {
    return data_[(c * dims_.height + h) * dims_.width + w];
  }
  const double& operator()(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * dims_.height + h) * dims_.width + w];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  Dims3 dims_;
  std::vector<double> data_;
};

/// Shape of a filter bank as (out_channels, in_channels, kernel_h, kernel_w).
struct Dims4 {
  std::size_t out_channels;
  std::size_t in_channels;
  std::size_t kernel_h;
  std::size_t kernel_w;
  std::size_t size() const { return out_channels * in_channels * kernel_h * kernel_w; }
  bool operator==(const Dims4&) const = default;
};

class Tensor4 {
 public:
  explicit Tensor4(Dims4 dims);
  Tensor4(std::size_t n, std::size_t c, std::size_t kh, std::size_t kw)
      : Tensor4(Dims4{n, c, kh, kw}) {}
  Tensor4(Dims4 dims, std::vector<double> data);

  const Dims4& dims() const { return dims_; }
  std::size_t out_channels() const { return dims_.out_channels; }
  std::size_t in_channels() const { return dims_.in_channels; }
  std::size_t kernel_h() const { return dims_.kernel_h; }
  std::size_t kernel_w() const { return dims_.kernel_w; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) {
    return data_[((n * dims_.in_channels + c) * dims_.kernel_h + i) * dims_.kernel_w + j];
  }
  const double& operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const {
    return data_[((n * dims_.in_channels + c) * dims_.kernel_h + i) * dims_.kernel_w + j];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Tensor4&) const = default;

 private:
  Dims4 dims_;
  std::vector<double> data_;
};

/// Floor-formula output geometry. Throws ShapeError when the kernel does not
/// fit inside the padded input, ParameterError when stride is zero.
OutputDims output_dims(std::size_t height, std::size_t width, ConvParams params,
                       std::size_t kernel_h, std::size_t kernel_w);

/// Materializes `p` rows/columns of zeros around every spatial border.
Tensor3 pad_spatial(const Tensor3& x, std::size_t p);

/// Direct six-loop convolution over the zero-padded input. This is the
/// oracle every coded result is compared against, and also the worker kernel.
Tensor3 conv3d_ref(const Tensor3& x, const Tensor4& k, ConvParams params);

std::vector<double> vec(const Tensor3& t);
Tensor3 reshape(std::span<const double> v, Dims3 dims);

/// Concatenates along axis 0 (channels) or axis 1 (height).
Tensor3 concat_axis(std::span<const Tensor3> parts, int axis);

/// Rows [begin, end) of every channel.
Tensor3 slice_rows(const Tensor3& t, std::size_t begin, std::size_t end);
/// Output channels [begin, end) of a filter bank.
Tensor4 slice_out_channels(const Tensor4& k, std::size_t begin, std::size_t end);
Tensor4 concat_out_channels(std::span<const Tensor4> parts);

/// Mean squared entry difference. Throws ShapeError on dimension mismatch.
double mse(const Tensor3& a, const Tensor3& b);
double max_abs_diff(const Tensor3& a, const Tensor3& b);

/// Deterministic uniform generator. Produces the same stream on every
/// platform for a given seed, unlike the std distributions.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : state_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double next01();
  double next(double low, double high) { return low + (high - low) * next01(); }
  std::uint64_t next_u64();

 private:
  std::uint64_t state_;
};

Tensor3 random_tensor3(Dims3 dims, UniformSource& rng, double low = -1.0, double high = 1.0);
Tensor4 random_tensor4(Dims4 dims, UniformSource& rng, double low = -1.0, double high = 1.0);

}  // namespace fcdcc
