#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "awi/rng.hpp"

namespace awi {

// Dense row-major tensor of rank 1 or 2. Rank-1 vectors behave as a single
// row wherever an op needs a matrix view.
template <class T>
struct Tensor {
  std::vector<size_t> shape;
  std::vector<T> data;

  Tensor() = default;

  static Tensor zeros(std::vector<size_t> s) {
    Tensor t;
    t.shape = std::move(s);
    t.check_rank();
    t.data.assign(t.size_from_shape(), T(0));
    return t;
  }

  static Tensor from(std::vector<size_t> s, std::vector<T> values) {
    Tensor t;
    t.shape = std::move(s);
    t.check_rank();
    if (values.size() != t.size_from_shape())
      throw std::invalid_argument("tensor: data size does not match shape");
    t.data = std::move(values);
    return t;
  }

  static Tensor row(std::vector<T> values) {
    size_t n = values.size();
    return from({n}, std::move(values));
  }

  static Tensor uniform(std::vector<size_t> s, T lo, T hi, Rng& rng) {
    Tensor t = zeros(std::move(s));
    for (auto& v : t.data) v = T(rng.uniform(double(lo), double(hi)));
    return t;
  }

  size_t size() const { return data.size(); }
  size_t rows() const { return shape.size() == 2 ? shape[0] : (shape.empty() ? 0 : 1); }
  size_t cols() const { return shape.empty() ? 0 : shape.back(); }

  T& at(size_t r, size_t c) { return data[r * cols() + c]; }
  T at(size_t r, size_t c) const { return data[r * cols() + c]; }
  const T* row_ptr(size_t r) const { return data.data() + r * cols(); }
  T* row_ptr(size_t r) { return data.data() + r * cols(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
  }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> t;
    t.shape = shape;
    t.data.reserve(data.size());
    for (T v : data) t.data.push_back(U(v));
    return t;
  }

 private:
  size_t size_from_shape() const {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }
  void check_rank() const {
    if (shape.empty() || shape.size() > 2)
      throw std::invalid_argument("tensor: rank must be 1 or 2");
    for (size_t d : shape)
      if (d == 0) throw std::invalid_argument("tensor: zero dimension");
  }
};

// ==== gemm kernels ====
// c += a * b, all row-major. Loop orders chosen so the inner loop walks
// contiguous memory; plenty for desk-scale matrices with -O2.

template <class T>
void gemm_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      T aip = ai[p];
      if (aip == T(0)) continue;
      const T* bp = b + p * n;
      for (size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c += a * b^T  (a: m x k, b: n x k, c: m x n)
template <class T>
void gemm_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc(0);
      for (size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

// c += a^T * b  (a: k x m, b: k x n, c: m x n)
template <class T>
void gemm_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t p = 0; p < k; ++p) {
    const T* ap = a + p * m;
    const T* bp = b + p * n;
    for (size_t i = 0; i < m; ++i) {
      T api = ap[i];
      if (api == T(0)) continue;
      T* ci = c + i * n;
      for (size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

}  // namespace awi
