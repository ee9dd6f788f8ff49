#pragma once

#include <cstddef>

#include "acts/common.hpp"

namespace acts {

/// Dense row-major matrix. Small enough here that hand-rolled loops beat
/// pulling in a linear algebra dependency.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Vec row(std::size_t i) const {
    return Vec(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
               data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }

  bool finite() const { return all_finite(data); }
};

/// y = A x
inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// y = A^T x
inline Vec matvec_t(const Mat& a, const Vec& x) {
  Vec y(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) y[j] += a(i, j) * x[i];
  return y;
}

/// C = A B
inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline double dot_row(const Mat& a, std::size_t i, const Vec& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
  return s;
}

}  // namespace acts
