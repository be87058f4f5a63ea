#include <stdexcept>
#include <string>
#include <vector>

#include "momentswarm/moments.hpp"

namespace momentswarm {
namespace {

// Running product keeps every partial result an exact integer, so the
// binomials are exact in double for the supported orders.
double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

std::vector<double> pz_radial_coefficients(int p, int q) {
  if (p < 0 || q < 0) throw std::invalid_argument("pz_radial_coefficients: negative index");
  if (q > p) {
    throw std::invalid_argument("pz_radial_coefficients: repetition q=" + std::to_string(q) +
                                " exceeds order p=" + std::to_string(p));
  }
  if (p > kMaxPseudoZernikeOrder) {
    throw std::out_of_range("pz_radial_coefficients: order " + std::to_string(p) +
                            " above supported maximum " + std::to_string(kMaxPseudoZernikeOrder));
  }
  // (p+k+1)! / ((p-k)! (q+k+1)! (k-q)!) is the multinomial
  // C(p+k+1, p-k) * C(2k+1, k-q).
  std::vector<double> coeffs;
  coeffs.reserve(static_cast<std::size_t>(p - q + 1));
  for (int k = q; k <= p; ++k) {
    const double sign = ((p - k) % 2 == 0) ? 1.0 : -1.0;
    coeffs.push_back(sign * binomial(p + k + 1, p - k) * binomial(2 * k + 1, k - q));
  }
  return coeffs;
}

double pz_radial(int p, int q, double r) {
  const auto coeffs = pz_radial_coefficients(p, q);
  // Horner over k = p down to q, then multiply by r^q.
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  double rq = 1.0;
  for (int i = 0; i < q; ++i) rq *= r;
  return acc * rq;
}

}  // namespace momentswarm
