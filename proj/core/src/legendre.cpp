#include <stdexcept>
#include <vector>

#include "momentswarm/moments.hpp"

namespace momentswarm {

void legendre_table(int n, double x, std::span<double> values, std::span<double> derivs) {
  if (n < 0) throw std::invalid_argument("legendre_table: negative order");
  const auto count = static_cast<std::size_t>(n) + 1;
  if (values.size() < count || derivs.size() < count) {
    throw std::invalid_argument("legendre_table: output spans too small");
  }
  values[0] = 1.0;
  derivs[0] = 0.0;
  if (n == 0) return;
  values[1] = x;
  derivs[1] = 1.0;
  for (int m = 2; m <= n; ++m) {
    const auto k = static_cast<std::size_t>(m);
    values[k] = ((2.0 * m - 1.0) * x * values[k - 1] - (m - 1.0) * values[k - 2]) / m;
    derivs[k] = derivs[k - 2] + (2.0 * m - 1.0) * values[k - 1];
  }
}

double legendre(int m, double x) {
  if (m < 0) throw std::invalid_argument("legendre: negative order");
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 2; k <= m; ++k) {
    const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_derivative(int m, double x) {
  if (m < 0) throw std::invalid_argument("legendre_derivative: negative order");
  std::vector<double> values(static_cast<std::size_t>(m) + 1);
  std::vector<double> derivs(values.size());
  legendre_table(m, x, values, derivs);
  return derivs.back();
}

}  // namespace momentswarm
