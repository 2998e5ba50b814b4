// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "avguard/errors.hpp"

namespace avguard {

// Dense row-major tensor. Double precision is the project-wide default;
// the float instantiation exists for the 32-bit inference path.
template <typename S>
struct TensorT {
  std::vector<int64_t> shape;
  std::vector<S> data;

  TensorT() = default;
  explicit TensorT(std::vector<int64_t> shp) : shape(std::move(shp)) {
    data.assign(static_cast<size_t>(numel_of(shape)), S(0));
  }
  TensorT(std::vector<int64_t> shp, std::vector<S> d)
      : shape(std::move(shp)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      throw DimensionError("tensor data size does not match shape");
  }

  static int64_t numel_of(const std::vector<int64_t>& shp) {
    int64_t n = 1;
    for (int64_t d : shp) n *= d;
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  // 3-d (C,H,W) and 4-d (N,C,H,W) accessors; unchecked.
  S& at3(int64_t c, int64_t h, int64_t w) {
    return data[static_cast<size_t>((c * shape[1] + h) * shape[2] + w)];
  }
  S at3(int64_t c, int64_t h, int64_t w) const {
    return data[static_cast<size_t>((c * shape[1] + h) * shape[2] + w)];
  }
  S& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data[static_cast<size_t>(
        (((n * shape[1]) + c) * shape[2] + h) * shape[3] + w)];
  }
  S at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data[static_cast<size_t>(
        (((n * shape[1]) + c) * shape[2] + h) * shape[3] + w)];
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i)
      os << shape[i] << (i + 1 < shape.size() ? "," : "");
    os << ")";
    return os.str();
  }
};

using Tensor = TensorT<double>;
using TensorF = TensorT<float>;

template <typename S>
TensorT<S> zeros_like(const TensorT<S>& x) {
  return TensorT<S>(x.shape);
}

template <typename S>
bool all_finite(const TensorT<S>& x) {
  for (S v : x.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename S>
double max_abs_diff(const TensorT<S>& a, const TensorT<S>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) -
                             static_cast<double>(b.data[i])));
  return m;
}

template <typename S>
double l2_norm(const TensorT<S>& a) {
  double s = 0.0;
  for (S v : a.data) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

}  // namespace avguard
