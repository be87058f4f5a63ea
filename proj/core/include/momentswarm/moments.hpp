#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "momentswarm/density_grid.hpp"
#include "momentswarm/geometry.hpp"
#include "momentswarm/moment_basis.hpp"

namespace momentswarm {

// ---------------------------------------------------------------------------
// Legendre polynomials
// ---------------------------------------------------------------------------

/// P_m(x) by Bonnet's three-term recurrence.
double legendre(int m, double x);

/// dP_m/dx via P'_m = P'_{m-2} + (2m-1) P_{m-1}.
double legendre_derivative(int m, double x);

/// Fills values[k] = P_k(x) and derivs[k] = P'_k(x) for k = 0..n.
/// Both spans must hold at least n + 1 entries.
void legendre_table(int n, double x, std::span<double> values, std::span<double> derivs);

// ---------------------------------------------------------------------------
// Pseudo-Zernike radial polynomials
// ---------------------------------------------------------------------------

/// Coefficients B_{pqk} of S_pq(r) = sum_k B_{pqk} r^k; element i is k = q + i.
/// Throws std::invalid_argument for q > p or negative indices and
/// std::out_of_range for p above kMaxPseudoZernikeOrder.
std::vector<double> pz_radial_coefficients(int p, int q);

double pz_radial(int p, int q, double r);

// ---------------------------------------------------------------------------
// Moment-generating function
// ---------------------------------------------------------------------------

using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Radius below which the non-differentiable |s| terms of the pseudo-Zernike
/// Jacobian are taken as zero.
inline constexpr double kPolarEpsilon = 1e-9;

/// One robot's contribution to the swarm moment vector.
///
/// Legendre component (p,q): (2p+1)(2q+1)/4 * P_p(x) P_q(y).
/// Pseudo-Zernike component (p,q): (p+1)/pi * conj(W_pq(r, theta)), split into
/// real and imaginary slots for q > 0. Throws std::domain_error when a
/// pseudo-Zernike position lies outside the unit disk.
Eigen::VectorXd phi(const MomentBasis& basis, const Position& s);

/// d phi / d(x, y), one row per real component.
Jacobian phi_jacobian(const MomentBasis& basis, const Position& s);

/// Computes both at once; `value` and `jac` are resized as needed.
void phi_with_jacobian(const MomentBasis& basis, const Position& s, Eigen::VectorXd& value,
                       Jacobian& jac);

// ---------------------------------------------------------------------------
// Moments of point sets and grids
// ---------------------------------------------------------------------------

/// Mean of phi over the robots. Throws std::invalid_argument if empty.
MomentVector moments_of_points(const MomentBasis& basis, std::span<const Position> positions);

/// sum_i w_i phi(s_i) / sum_i w_i. Weights may be signed; their sum must be
/// positive.
MomentVector moments_of_weighted_points(const MomentBasis& basis,
                                        std::span<const Position> positions,
                                        std::span<const double> weights);

/// Mass-normalized moments of a grid: pixels are point masses at their
/// centers, scaled to unit total mass. For pseudo-Zernike moments, pixels
/// whose centers fall outside the unit disk are ignored. Throws
/// std::invalid_argument when the (in-disk) total mass is not positive.
MomentVector moments_of_grid(const MomentBasis& basis, const DensityGrid& grid);

/// Zeroth-order moment of any unit-mass distribution under the mean
/// convention: 1/4 for Legendre, 1/pi for pseudo-Zernike. Reconstructions
/// omit it, so adding it back yields a unit-mass density.
double zeroth_order_moment(BasisKind kind);

// ---------------------------------------------------------------------------
// Reconstruction and error metrics
// ---------------------------------------------------------------------------

/// Truncated series f(x, y) at a single point. Pseudo-Zernike series add the
/// conjugate terms (factor 2 on Re of q > 0 terms) and are zero outside the
/// unit disk.
double evaluate_series(const MomentVector& moments, const Position& s);

/// Evaluates the truncated series at every pixel center.
DensityGrid reconstruct(const MomentVector& moments, std::size_t rows, std::size_t cols);

/// Mean-square reconstruction error of `actual` against `desired` over the
/// 41 x 41 lattice with spacing 0.05 on [-1,1]^2 (pseudo-Zernike: only
/// lattice points inside the unit circle). Throws std::invalid_argument on
/// basis mismatch or an all-zero desired reconstruction.
double msre(const MomentVector& actual, const MomentVector& desired);

/// msre against a fixed desired vector, with the lattice basis evaluated once.
class MsreEvaluator {
 public:
  explicit MsreEvaluator(const MomentVector& desired);

  double operator()(const MomentVector& actual) const;
  const MomentVector& desired() const { return desired_; }

 private:
  MomentVector desired_;
  Eigen::MatrixXd lattice_;
  double desired_energy_ = 0.0;
};

}  // namespace momentswarm
