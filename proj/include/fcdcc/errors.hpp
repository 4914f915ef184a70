#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcdcc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A partitioning or coding parameter is outside its permissible set.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The recovery matrix for the responding workers cannot be trusted in
/// double precision.
class DecodeInfeasibleError : public Error {
 public:
  DecodeInfeasibleError(const std::string& what, double kappa)
      : Error(what), kappa_(kappa) {}
  double kappa() const noexcept { return kappa_; }

 private:
  double kappa_;
};

/// Fewer workers responded than the recovery threshold requires.
class StarvationError : public Error {
 public:
  StarvationError(const std::string& what, std::size_t responsive,
                  std::size_t required)
      : Error(what), responsive_(responsive), required_(required) {}
  std::size_t responsive() const noexcept { return responsive_; }
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t responsive_;
  std::size_t required_;
};

/// Configuration document failed validation. Carries one diagnostic per
/// offending field, each prefixed with its JSON path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace fcdcc
