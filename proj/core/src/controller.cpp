#include "momentswarm/controller.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "momentswarm/errors.hpp"
#include "momentswarm/io.hpp"

namespace momentswarm {

GainSchedule::GainSchedule(MomentBasis basis, double beta, double scale)
    : basis_(std::move(basis)), beta_(beta), scale_(scale) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("gain exponent must be >= 0");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("gain scale must be > 0");
  diagonal_.resize(static_cast<Eigen::Index>(basis_.real_size()));
  for (std::size_t i = 0; i < basis_.real_size(); ++i) {
    diagonal_[static_cast<Eigen::Index>(i)] =
        scale * std::pow(static_cast<double>(basis_.degree(i)), -beta);
  }
}

void GainSchedule::write_csv(std::ostream& out) const {
  out << "index,p,q,part,gamma\n";
  const auto& idx = basis_.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out << i << ',' << idx[i].p << ',' << idx[i].q << ',' << to_string(idx[i].part) << ','
        << format_double(diagonal_[static_cast<Eigen::Index>(i)]) << '\n';
  }
}

GainSchedule gain_matrix(const MomentBasis& basis, double beta, double scale) {
  return GainSchedule(basis, beta, scale);
}

Eigen::Vector2d control_velocity(const Jacobian& jac, const MomentVector& m_hat,
                                 const MomentVector& m_star, const GainSchedule& gains) {
  require_same_basis(m_hat.basis(), m_star.basis(), "control_velocity");
  require_same_basis(m_hat.basis(), gains.basis(), "control_velocity gains");
  if (jac.rows() != static_cast<Eigen::Index>(m_hat.size())) {
    throw std::invalid_argument("control_velocity: Jacobian has " + std::to_string(jac.rows()) +
                                " rows, moment vector has " + std::to_string(m_hat.size()));
  }
  const Eigen::VectorXd weighted =
      gains.diagonal().cwiseProduct(m_hat.values() - m_star.values());
  return -(jac.transpose() * weighted);
}

std::array<double, 3> ControlParams::default_zone_gains(double v_max) {
  if (!std::isfinite(v_max)) return {0.0, 0.0, 0.0};
  return {3.0 * v_max, 1.0 * v_max, 0.3 * v_max};
}

void ControlParams::validate() const {
  if (!(v_max > 0.0)) throw ConfigError("control.v_max must be positive");
  if (!(v_min >= 0.0) || !(v_min < v_max)) throw ConfigError("control.v_min must satisfy 0 <= v_min < v_max");
  if (!(zone_radii[0] > 0.0 && zone_radii[0] < zone_radii[1] && zone_radii[1] < zone_radii[2])) {
    throw ConfigError("control.zone_radii must be positive and strictly increasing");
  }
  if (!(zone_gains[0] >= zone_gains[1] && zone_gains[1] >= zone_gains[2] && zone_gains[2] >= 0.0)) {
    throw ConfigError("control.zone_gains must be non-increasing and non-negative");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("control.dt must be positive");
}

Eigen::Vector2d collision_filter(const Eigen::Vector2d& v, const Position& self,
                                 std::span<const Position> neighbors, const ControlParams& params,
                                 std::mt19937_64& rng) {
  Eigen::Vector2d out = v;
  if (!params.collision_avoidance) return out;
  const auto& r = params.zone_radii;
  const auto& k = params.zone_gains;
  for (const auto& other : neighbors) {
    const double dx = self.x - other.x;
    const double dy = self.y - other.y;
    const double d = std::hypot(dx, dy);
    if (d >= r[2]) continue;
    const double gain = d < r[0] ? k[0] : (d < r[1] ? k[1] : k[2]);
    if (d > 0.0) {
      out += gain * Eigen::Vector2d(dx / d, dy / d);
    } else {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      out += gain * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    }
  }
  return out;
}

Eigen::Vector2d saturate_deadband(const Eigen::Vector2d& v, const ControlParams& params) {
  const double speed = v.norm();
  if (speed < params.v_min) return Eigen::Vector2d::Zero();
  if (speed > params.v_max) return v * (params.v_max / speed);
  return v;
}

Eigen::MatrixXd stacked_jacobian(const MomentBasis& basis, std::span<const Position> positions) {
  const auto m = static_cast<Eigen::Index>(basis.real_size());
  Eigen::MatrixXd stacked(m, 2 * static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    stacked.middleCols(2 * static_cast<Eigen::Index>(i), 2) = phi_jacobian(basis, positions[i]);
  }
  return stacked;
}

int stacked_jacobian_rank(const MomentBasis& basis, std::span<const Position> positions,
                          double tol) {
  if (positions.empty()) throw std::invalid_argument("stacked_jacobian_rank: no robots");
  const Eigen::MatrixXd j = stacked_jacobian(basis, positions);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol * sv[0]) ++rank;
  }
  return rank;
}

double formation_cost(const MomentVector& m, const MomentVector& m_star, const GainSchedule& gains) {
  require_same_basis(m.basis(), m_star.basis(), "formation_cost");
  require_same_basis(m.basis(), gains.basis(), "formation_cost gains");
  const Eigen::VectorXd e = m.values() - m_star.values();
  return 0.5 * e.dot(gains.diagonal().cwiseProduct(e));
}

}  // namespace momentswarm
