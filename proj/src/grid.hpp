#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pfgcg {

// Row-major dense matrix. Kept deliberately minimal: the solver only needs
// contiguous storage, row views, and bounds-checked-by-construction sizing.
template <typename T>
class Mat2 {
 public:
  Mat2() = default;
  Mat2(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, fill) {}

  T& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return v_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<T> row(int r) { return {v_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const T> row(int r) const {
    return {v_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  void fill(T value) { v_.assign(v_.size(), value); }

  bool operator==(const Mat2&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

// Row-major 3-d tensor with the last index fastest.
template <typename T>
class Ten3 {
 public:
  Ten3() = default;
  Ten3(int d0, int d1, int d2, T fill = T{})
      : d0_(d0), d1_(d1), d2_(d2),
        v_(static_cast<std::size_t>(d0) * d1 * d2, fill) {}

  T& operator()(int a, int b, int c) {
    return v_[(static_cast<std::size_t>(a) * d1_ + b) * d2_ + c];
  }
  const T& operator()(int a, int b, int c) const {
    return v_[(static_cast<std::size_t>(a) * d1_ + b) * d2_ + c];
  }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  std::size_t size() const { return v_.size(); }
  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  void fill(T value) { v_.assign(v_.size(), value); }

  bool operator==(const Ten3&) const = default;

 private:
  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<T> v_;
};

}  // namespace pfgcg
