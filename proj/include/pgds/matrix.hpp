#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pgds {

// Dense row-major matrix; just enough surface for the sampler.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  T row_sum(int r) const {
    T s{};
    for (int c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
  }
  T col_sum(int c) const {
    T s{};
    for (int r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using MatD = Mat<double>;
using MatI = Mat<std::int64_t>;

}  // namespace pgds
