#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pmc {

/// Axis-aligned hyperrectangle used as the support of a density or as a
/// partition cell.
struct ParameterBox {
  std::vector<double> lower;
  std::vector<double> upper;

  ParameterBox() = default;
  ParameterBox(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    validate();
  }

  std::size_t dim() const { return lower.size(); }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size())
      throw std::invalid_argument("ParameterBox: dimension must be >= 1 and consistent");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw std::invalid_argument("ParameterBox: lower[i] < upper[i] required");
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  double side(std::size_t i) const { return upper[i] - lower[i]; }

  double min_side() const {
    double s = side(0);
    for (std::size_t i = 1; i < dim(); ++i) s = std::min(s, side(i));
    return s;
  }

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= side(i);
    return v;
  }
};

/// Dense row-major matrix of doubles; rows are sample points.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  void push_row(std::span<const double> r) {
    if (cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw std::invalid_argument("Matrix: row width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  /// Column extracted as a contiguous series.
  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = data_[i * cols_ + j];
    return c;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace pmc
