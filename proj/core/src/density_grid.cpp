#include "momentswarm/density_grid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace momentswarm {

DensityGrid::DensityGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("DensityGrid: empty dimensions");
}

DensityGrid::DensityGrid(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("DensityGrid: empty dimensions");
  if (values_.size() != rows * cols) throw std::invalid_argument("DensityGrid: size mismatch");
}

Position DensityGrid::pixel_center(std::size_t row, std::size_t col) const {
  return {-1.0 + (2.0 * static_cast<double>(col) + 1.0) / static_cast<double>(cols_),
          1.0 - (2.0 * static_cast<double>(row) + 1.0) / static_cast<double>(rows_)};
}

double DensityGrid::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double DensityGrid::min() const { return *std::min_element(values_.begin(), values_.end()); }

double DensityGrid::max() const { return *std::max_element(values_.begin(), values_.end()); }

}  // namespace momentswarm
