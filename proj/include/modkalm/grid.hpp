#ifndef MODKALM_GRID_HPP_
#define MODKALM_GRID_HPP_

#include <cassert>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace modkalm {

// Dense row-major (frame, bin) grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Copy of one column (the trajectory of a single frequency bin).
  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }
  void set_column(std::size_t c, std::span<const T> values) {
    assert(values.size() == rows_);
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(std::size_t rows, std::size_t cols) const {
    return rows_ == rows && cols_ == cols;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.rows(), other.cols());
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;
using IntGrid = Grid<int>;

}  // namespace modkalm

#endif  // MODKALM_GRID_HPP_
