#include "momentswarm/moments.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace momentswarm {
namespace {

// Lattice points sitting on the unit circle come out of hypot a few ulps
// above 1; treat them as inside.
constexpr double kDiskSlack = 1e-12;

double legendre_scale(int p, int q) { return (2.0 * p + 1.0) * (2.0 * q + 1.0) / 4.0; }

double pz_scale(int p) { return (p + 1.0) / std::numbers::pi; }

void legendre_phi(const MomentBasis& basis, const Position& s, Eigen::VectorXd& value,
                  Jacobian* jac) {
  const int n = basis.order();
  std::vector<double> px(static_cast<std::size_t>(n) + 1), dpx(px.size());
  std::vector<double> py(px.size()), dpy(px.size());
  legendre_table(n, s.x, px, dpx);
  legendre_table(n, s.y, py, dpy);

  const auto& indices = basis.indices();
  value.resize(static_cast<Eigen::Index>(indices.size()));
  if (jac) jac->resize(value.size(), 2);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto p = static_cast<std::size_t>(indices[i].p);
    const auto q = static_cast<std::size_t>(indices[i].q);
    const double c = legendre_scale(indices[i].p, indices[i].q);
    const auto row = static_cast<Eigen::Index>(i);
    value[row] = c * px[p] * py[q];
    if (jac) {
      (*jac)(row, 0) = c * dpx[p] * py[q];
      (*jac)(row, 1) = c * px[p] * dpy[q];
    }
  }
}

// conj(W_pq) = S_pq(r) e^{-jq theta} = sum_k B_pqk r^(k-q) z^q with z = x - jy.
// Writing it this way keeps the gradient finite at the origin except for the
// r^1 factor, whose gradient s/|s| has no limit at r = 0 and is taken as zero
// below kPolarEpsilon.
void pseudo_zernike_phi(const MomentBasis& basis, const Position& s, Eigen::VectorXd& value,
                        Jacobian* jac) {
  using cd = std::complex<double>;
  const int n = basis.order();
  const double r = s.radius();
  if (r > 1.0 + kDiskSlack) {
    throw std::domain_error("pseudo-Zernike moments undefined outside the unit disk (r = " +
                            std::to_string(r) + ")");
  }
  const cd z(s.x, -s.y);
  const cd dz_dy(0.0, -1.0);

  std::vector<double> rpow(static_cast<std::size_t>(n) + 1);
  std::vector<cd> zpow(static_cast<std::size_t>(n) + 1);
  rpow[0] = 1.0;
  zpow[0] = 1.0;
  for (std::size_t e = 1; e < rpow.size(); ++e) {
    rpow[e] = rpow[e - 1] * r;
    zpow[e] = zpow[e - 1] * z;
  }

  value.resize(static_cast<Eigen::Index>(basis.real_size()));
  if (jac) jac->resize(value.size(), 2);

  Eigen::Index row = 0;
  for (int p = 1; p <= n; ++p) {
    const double c = pz_scale(p);
    for (int q = 0; q <= p; ++q) {
      const auto& coeffs = basis.radial_coefficients(p, q);
      const cd zq = zpow[static_cast<std::size_t>(q)];
      const cd zq1 = q > 0 ? zpow[static_cast<std::size_t>(q - 1)] : cd(0.0);
      cd v = 0.0, dx = 0.0, dy = 0.0;
      for (int k = q; k <= p; ++k) {
        const double b = coeffs[static_cast<std::size_t>(k - q)];
        const int e = k - q;
        const double re = rpow[static_cast<std::size_t>(e)];
        v += b * re * zq;
        if (!jac) continue;
        if (e >= 2) {
          const double g = e * rpow[static_cast<std::size_t>(e - 2)];
          dx += b * g * s.x * zq;
          dy += b * g * s.y * zq;
        } else if (e == 1 && r >= kPolarEpsilon) {
          dx += b * (s.x / r) * zq;
          dy += b * (s.y / r) * zq;
        }
        if (q > 0) {
          dx += b * re * static_cast<double>(q) * zq1;
          dy += b * re * static_cast<double>(q) * zq1 * dz_dy;
        }
      }
      value[row] = c * v.real();
      if (jac) {
        (*jac)(row, 0) = c * dx.real();
        (*jac)(row, 1) = c * dy.real();
      }
      ++row;
      if (q > 0) {
        value[row] = c * v.imag();
        if (jac) {
          (*jac)(row, 0) = c * dx.imag();
          (*jac)(row, 1) = c * dy.imag();
        }
        ++row;
      }
    }
  }
}

// Multiplier turning phi into the reconstruction basis function:
// LM: 1/c, PZM q = 0: 1/c, PZM q > 0: 2/c (conjugate terms).
Eigen::VectorXd series_weights(const MomentBasis& basis) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(basis.real_size()));
  const auto& indices = basis.indices();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& idx = indices[i];
    const auto row = static_cast<Eigen::Index>(i);
    if (basis.kind() == BasisKind::Legendre) {
      w[row] = 1.0 / legendre_scale(idx.p, idx.q);
    } else {
      w[row] = (idx.q == 0 ? 1.0 : 2.0) / pz_scale(idx.p);
    }
  }
  return w;
}

bool inside_disk(const Position& s) { return s.radius() <= 1.0 + kDiskSlack; }

}  // namespace

Eigen::VectorXd phi(const MomentBasis& basis, const Position& s) {
  Eigen::VectorXd value;
  if (basis.kind() == BasisKind::Legendre) {
    legendre_phi(basis, s, value, nullptr);
  } else {
    pseudo_zernike_phi(basis, s, value, nullptr);
  }
  return value;
}

Jacobian phi_jacobian(const MomentBasis& basis, const Position& s) {
  Eigen::VectorXd value;
  Jacobian jac;
  phi_with_jacobian(basis, s, value, jac);
  return jac;
}

void phi_with_jacobian(const MomentBasis& basis, const Position& s, Eigen::VectorXd& value,
                       Jacobian& jac) {
  if (basis.kind() == BasisKind::Legendre) {
    legendre_phi(basis, s, value, &jac);
  } else {
    pseudo_zernike_phi(basis, s, value, &jac);
  }
}

MomentVector moments_of_points(const MomentBasis& basis, std::span<const Position> positions) {
  if (positions.empty()) throw std::invalid_argument("moments_of_points: no positions");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.real_size()));
  for (const auto& s : positions) sum += phi(basis, s);
  return MomentVector(basis, sum / static_cast<double>(positions.size()));
}

MomentVector moments_of_weighted_points(const MomentBasis& basis,
                                        std::span<const Position> positions,
                                        std::span<const double> weights) {
  if (positions.size() != weights.size()) {
    throw std::invalid_argument("moments_of_weighted_points: size mismatch");
  }
  double total = 0.0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.real_size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (weights[i] == 0.0) continue;
    sum += weights[i] * phi(basis, positions[i]);
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("moments: total mass must be positive");
  return MomentVector(basis, sum / total);
}

MomentVector moments_of_grid(const MomentBasis& basis, const DensityGrid& grid) {
  if (basis.kind() == BasisKind::Legendre) {
    // Separable: sum_rc mu_rc P_p(x_c) P_q(y_r).
    const int n = basis.order();
    const auto n1 = static_cast<std::size_t>(n) + 1;
    std::vector<double> px(grid.cols() * n1), py(grid.rows() * n1), scratch(n1);
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      legendre_table(n, grid.pixel_center(0, c).x, std::span(px).subspan(c * n1, n1), scratch);
    }
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      legendre_table(n, grid.pixel_center(r, 0).y, std::span(py).subspan(r * n1, n1), scratch);
    }
    // row_sums[r][p] = sum_c mu_rc P_p(x_c)
    std::vector<double> row_sums(grid.rows() * n1, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      for (std::size_t c = 0; c < grid.cols(); ++c) {
        const double mu = grid.at(r, c);
        if (mu == 0.0) continue;
        total += mu;
        for (std::size_t p = 0; p < n1; ++p) row_sums[r * n1 + p] += mu * px[c * n1 + p];
      }
    }
    if (!(total > 0.0)) throw std::invalid_argument("moments_of_grid: total mass must be positive");
    MomentVector out(basis);
    const auto& indices = basis.indices();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto p = static_cast<std::size_t>(indices[i].p);
      const auto q = static_cast<std::size_t>(indices[i].q);
      double acc = 0.0;
      for (std::size_t r = 0; r < grid.rows(); ++r) acc += row_sums[r * n1 + p] * py[r * n1 + q];
      out.values()[static_cast<Eigen::Index>(i)] =
          legendre_scale(indices[i].p, indices[i].q) * acc / total;
    }
    return out;
  }

  std::vector<Position> centers;
  std::vector<double> masses;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const auto s = grid.pixel_center(r, c);
      if (!inside_disk(s) || grid.at(r, c) == 0.0) continue;
      centers.push_back(s);
      masses.push_back(grid.at(r, c));
    }
  }
  if (centers.empty()) throw std::invalid_argument("moments_of_grid: no mass inside the unit disk");
  return moments_of_weighted_points(basis, centers, masses);
}

double zeroth_order_moment(BasisKind kind) {
  return kind == BasisKind::Legendre ? 0.25 : 1.0 / std::numbers::pi;
}

double evaluate_series(const MomentVector& moments, const Position& s) {
  const auto& basis = moments.basis();
  if (basis.kind() == BasisKind::PseudoZernike && !inside_disk(s)) return 0.0;
  const Eigen::VectorXd weights = series_weights(basis);
  return (weights.array() * moments.values().array() * phi(basis, s).array()).sum();
}

DensityGrid reconstruct(const MomentVector& moments, std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("reconstruct: resolution must be >= 2x2");
  const auto& basis = moments.basis();
  const Eigen::VectorXd coeffs = series_weights(basis).cwiseProduct(moments.values());
  DensityGrid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto s = out.pixel_center(r, c);
      if (basis.kind() == BasisKind::PseudoZernike && !inside_disk(s)) continue;
      out.at(r, c) = coeffs.dot(phi(basis, s));
    }
  }
  return out;
}

MsreEvaluator::MsreEvaluator(const MomentVector& desired) : desired_(desired) {
  const auto& basis = desired.basis();
  const Eigen::VectorXd weights = series_weights(basis);
  constexpr int kLattice = 41;
  std::vector<Position> points;
  for (int i = 0; i < kLattice; ++i) {
    for (int j = 0; j < kLattice; ++j) {
      const Position s{-1.0 + 0.05 * i, -1.0 + 0.05 * j};
      if (basis.kind() == BasisKind::PseudoZernike && !inside_disk(s)) continue;
      points.push_back(s);
    }
  }
  lattice_.resize(static_cast<Eigen::Index>(points.size()),
                  static_cast<Eigen::Index>(basis.real_size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    lattice_.row(static_cast<Eigen::Index>(k)) =
        phi(basis, points[k]).cwiseProduct(weights).transpose();
  }
  desired_energy_ = (lattice_ * desired.values()).squaredNorm();
  if (!(desired_energy_ > 0.0)) {
    throw std::invalid_argument("msre: desired reconstruction is identically zero");
  }
}

double MsreEvaluator::operator()(const MomentVector& actual) const {
  require_same_basis(actual.basis(), desired_.basis(), "msre");
  return (lattice_ * (actual.values() - desired_.values())).squaredNorm() / desired_energy_;
}

double msre(const MomentVector& actual, const MomentVector& desired) {
  require_same_basis(actual.basis(), desired.basis(), "msre");
  return MsreEvaluator(desired)(actual);
}

}  // namespace momentswarm
