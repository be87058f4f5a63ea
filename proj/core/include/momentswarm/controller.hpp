#pragma once

#include <array>
#include <iosfwd>
#include <random>
#include <span>

#include <Eigen/Core>

#include "momentswarm/geometry.hpp"
#include "momentswarm/moment_basis.hpp"
#include "momentswarm/moments.hpp"

namespace momentswarm {

inline constexpr double kDefaultGainExponent = 1.7;

/// Diagonal gain over a basis's real embedding: component of order d gets
/// scale * d^-beta. Re and Im parts of one pseudo-Zernike moment share it.
class GainSchedule {
 public:
  GainSchedule(MomentBasis basis, double beta = kDefaultGainExponent, double scale = 1.0);

  const MomentBasis& basis() const { return basis_; }
  double beta() const { return beta_; }
  double scale() const { return scale_; }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  Eigen::MatrixXd matrix() const { return diagonal_.asDiagonal(); }

  /// Writes `index,p,q,part,gamma`.
  void write_csv(std::ostream& out) const;

 private:
  MomentBasis basis_;
  double beta_;
  double scale_;
  Eigen::VectorXd diagonal_;
};

/// Throws std::invalid_argument unless beta >= 0 and scale > 0.
GainSchedule gain_matrix(const MomentBasis& basis, double beta = kDefaultGainExponent,
                         double scale = 1.0);

/// -jac^T * Gamma * (Mhat - Mstar).
Eigen::Vector2d control_velocity(const Jacobian& jac, const MomentVector& m_hat,
                                 const MomentVector& m_star, const GainSchedule& gains);

/// Speed limits, collision zones and Euler step for the position update.
struct ControlParams {
  /// Speed cap; infinity disables saturation.
  double v_max = 0.01;
  /// Deadband; speeds strictly below it are zeroed.
  double v_min = 0.001;
  /// Zone boundaries r1 < r2 < r3.
  std::array<double, 3> zone_radii{0.05, 0.08, 0.12};
  /// Repulsion per neighbor in each zone, k1 >= k2 >= k3 >= 0.
  std::array<double, 3> zone_gains{0.03, 0.01, 0.003};
  bool collision_avoidance = true;
  double dt = 1.0;

  /// Zone gains of 3, 1 and 0.3 times v_max (zero when v_max is infinite).
  static std::array<double, 3> default_zone_gains(double v_max);

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Adds k(zone) * unit vector away from every neighbor closer than r3.
///
/// The zone is chosen by distance: k1 below r1, k2 below r2, k3 below r3.
/// A neighbor at exactly the same position pushes along a random direction
/// drawn from `rng`. Returns `v` unchanged when avoidance is disabled.
Eigen::Vector2d collision_filter(const Eigen::Vector2d& v, const Position& self,
                                 std::span<const Position> neighbors, const ControlParams& params,
                                 std::mt19937_64& rng);

/// Rescales to v_max if faster, zeroes below v_min.
Eigen::Vector2d saturate_deadband(const Eigen::Vector2d& v, const ControlParams& params);

/// J(s) = [jac_1 ... jac_N], m x 2N.
Eigen::MatrixXd stacked_jacobian(const MomentBasis& basis, std::span<const Position> positions);

/// Number of singular values of J(s) above tol * sigma_max.
int stacked_jacobian_rank(const MomentBasis& basis, std::span<const Position> positions,
                          double tol = 1e-10);

/// 0.5 * e^T Gamma e with e = M - Mstar.
double formation_cost(const MomentVector& m, const MomentVector& m_star, const GainSchedule& gains);

}  // namespace momentswarm
