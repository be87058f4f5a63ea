#pragma once

#include <cstddef>
#include <vector>

#include "momentswarm/geometry.hpp"

namespace momentswarm {

/// R x C grid of point masses at pixel centers on [-1,1]^2.
///
/// Row 0 is the top edge (y near +1), column 0 the left edge (x near -1),
/// matching how images are stored. Values may be negative when the grid
/// holds a truncated-series reconstruction.
class DensityGrid {
 public:
  DensityGrid(std::size_t rows, std::size_t cols, double fill = 0.0);
  DensityGrid(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
  double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// x = -1 + (2c+1)/C, y = 1 - (2r+1)/R.
  Position pixel_center(std::size_t row, std::size_t col) const;

  double total() const;
  double min() const;
  double max() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

}  // namespace momentswarm
