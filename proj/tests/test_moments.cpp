#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "momentswarm/io.hpp"
#include "momentswarm/moments.hpp"
#include "test_support.hpp"

namespace ms = momentswarm;
using ms::BasisKind;
using ms::MomentBasis;
using ms::MomentIndex;
using ms::MomentVector;
using ms::Part;
using ms::Position;
using ms::testing::legendre_oracle;
using ms::testing::pz_w_oracle;

namespace {

constexpr double kPi = std::numbers::pi;

// Pixel-space density of a mass grid scaled to unit total mass on [-1,1]^2.
ms::DensityGrid unit_density(const ms::DensityGrid& g) {
  const double pixel_area = 4.0 / static_cast<double>(g.rows() * g.cols());
  ms::DensityGrid out = g;
  const double total = g.total();
  for (auto& v : out.values()) v = v / total / pixel_area;
  return out;
}

}  // namespace

// --- Legendre polynomials --------------------------------------------------

TEST(Legendre, SpecExamples) {
  EXPECT_DOUBLE_EQ(ms::legendre(0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(ms::legendre(3, 1.0), 1.0);
  EXPECT_NEAR(ms::legendre(2, 0.5), (3 * 0.25 - 1) / 2, 1e-15);
  EXPECT_NEAR(ms::legendre(2, 0.5), -0.125, 1e-15);
}

TEST(Legendre, MatchesClosedFormsThroughDegreeEight) {
  for (int m = 0; m <= 8; ++m) {
    for (double x = -1.0; x <= 1.0; x += 0.05) {
      EXPECT_NEAR(ms::legendre(m, x), legendre_oracle(m, x), 1e-13) << "m=" << m << " x=" << x;
    }
  }
}

TEST(Legendre, DerivativeExamples) {
  EXPECT_DOUBLE_EQ(ms::legendre_derivative(0, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(ms::legendre_derivative(1, -0.4), 1.0);
  EXPECT_NEAR(ms::legendre_derivative(2, 0.5), 1.5, 1e-15);
}

TEST(Legendre, DerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (int m = 0; m <= 20; ++m) {
    for (double x = -0.95; x <= 0.95; x += 0.1) {
      const double fd = (ms::legendre(m, x + h) - ms::legendre(m, x - h)) / (2 * h);
      EXPECT_NEAR(ms::legendre_derivative(m, x), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Legendre, TableAgreesWithScalarCalls) {
  std::vector<double> v(11), d(11);
  ms::legendre_table(10, 0.37, v, d);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_DOUBLE_EQ(v[k], ms::legendre(k, 0.37));
    EXPECT_NEAR(d[k], ms::legendre_derivative(k, 0.37), 1e-12);
  }
}

TEST(Legendre, OrthogonalityOnFineGrid) {
  const int n = 2001;
  const double h = 2.0 / (n - 1);
  for (int p = 0; p <= 10; ++p) {
    for (int q = 0; q <= 10; ++q) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        const double x = -1.0 + k * h;
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        sum += w * ms::legendre(p, x) * ms::legendre(q, x) * h;
      }
      const double expected = p == q ? 2.0 / (2 * p + 1) : 0.0;
      EXPECT_NEAR(sum, expected, 1e-3) << "p=" << p << " q=" << q;
    }
  }
}

// --- Pseudo-Zernike radial polynomials --------------------------------------

TEST(PseudoZernike, RadialCoefficientExamples) {
  EXPECT_EQ(ms::pz_radial_coefficients(1, 1), std::vector<double>({1.0}));
  EXPECT_EQ(ms::pz_radial_coefficients(1, 0), std::vector<double>({-2.0, 3.0}));
  EXPECT_EQ(ms::pz_radial_coefficients(0, 0), std::vector<double>({1.0}));
}

TEST(PseudoZernike, RadialMatchesFactorialFormula) {
  for (int p = 0; p <= ms::kMaxPseudoZernikeOrder; ++p) {
    for (int q = 0; q <= p; ++q) {
      for (double r = 0.0; r <= 1.0; r += 0.125) {
        const double oracle = ms::testing::pz_radial_oracle(p, q, r);
        EXPECT_NEAR(ms::pz_radial(p, q, r), oracle, 1e-9 * std::max(1.0, std::abs(oracle)))
            << p << "," << q << " r=" << r;
      }
    }
  }
}

TEST(PseudoZernike, RadialRejectsBadIndices) {
  EXPECT_THROW(ms::pz_radial_coefficients(2, 3), std::invalid_argument);
  EXPECT_THROW(ms::pz_radial_coefficients(-1, 0), std::invalid_argument);
  EXPECT_THROW(ms::pz_radial_coefficients(ms::kMaxPseudoZernikeOrder + 1, 0), std::out_of_range);
}

TEST(PseudoZernike, OrthogonalityOverDisk) {
  // Midpoint rule in r, uniform in theta (exact for the trigonometric part).
  const int nr = 4000;
  const int nt = 64;
  const int order = 5;
  for (int p = 0; p <= order; ++p) {
    for (int q = 0; q <= p; ++q) {
      for (int p2 = 0; p2 <= order; ++p2) {
        for (int q2 = 0; q2 <= p2; ++q2) {
          std::complex<double> sum = 0.0;
          for (int i = 0; i < nr; ++i) {
            const double r = (i + 0.5) / nr;
            const double radial = ms::pz_radial(p, q, r) * ms::pz_radial(p2, q2, r) * r / nr;
            for (int j = 0; j < nt; ++j) {
              const double t = 2 * kPi * j / nt;
              sum += radial * std::polar(1.0, (q - q2) * t) * (2 * kPi / nt);
            }
          }
          const double expected = (p == p2 && q == q2) ? kPi / (p + 1) : 0.0;
          EXPECT_NEAR(std::abs(sum - expected), 0.0, 1e-5) << p << q << " vs " << p2 << q2;
        }
      }
    }
  }
}

// --- Basis and index map ---------------------------------------------------

TEST(MomentBasis, ComplexCountsForOrdersFourSixEight) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    EXPECT_EQ(MomentBasis(kind, 4).complex_count(), 14u);
    EXPECT_EQ(MomentBasis(kind, 6).complex_count(), 27u);
    EXPECT_EQ(MomentBasis(kind, 8).complex_count(), 44u);
  }
}

TEST(MomentBasis, RealEmbeddingLengths) {
  for (int n = 1; n <= 12; ++n) {
    EXPECT_EQ(MomentBasis(BasisKind::Legendre, n).real_size(), static_cast<std::size_t>(n * (n + 3) / 2));
    std::size_t pz = 0;
    for (int p = 1; p <= n; ++p) pz += 2 * p + 1;
    EXPECT_EQ(MomentBasis(BasisKind::PseudoZernike, n).real_size(), pz);
  }
}

TEST(MomentBasis, IndexMapIsBijection) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    for (int n = 1; n <= 10; ++n) {
      const MomentBasis b(kind, n);
      ASSERT_EQ(b.indices().size(), b.real_size());
      for (std::size_t i = 0; i < b.real_size(); ++i) EXPECT_EQ(b.flat_index(b.index(i)), i);
    }
  }
}

TEST(MomentBasis, OrderingGroupsByDegreeThenQThenPart) {
  const MomentBasis lm(BasisKind::Legendre, 2);
  const std::vector<MomentIndex> expected_lm{{1, 0, Part::Re}, {0, 1, Part::Re}, {2, 0, Part::Re},
                                             {1, 1, Part::Re}, {0, 2, Part::Re}};
  EXPECT_EQ(lm.indices(), expected_lm);
  const MomentBasis pz(BasisKind::PseudoZernike, 1);
  const std::vector<MomentIndex> expected_pz{{1, 0, Part::Re}, {1, 1, Part::Re}, {1, 1, Part::Im}};
  EXPECT_EQ(pz.indices(), expected_pz);
}

TEST(MomentBasis, RejectsComponentsOutsideBasis) {
  const MomentBasis lm(BasisKind::Legendre, 3);
  EXPECT_THROW(lm.flat_index({0, 0, Part::Re}), std::out_of_range);
  EXPECT_THROW(lm.flat_index({2, 2, Part::Re}), std::out_of_range);
  EXPECT_THROW(lm.flat_index({1, 0, Part::Im}), std::out_of_range);
  const MomentBasis pz(BasisKind::PseudoZernike, 3);
  EXPECT_THROW(pz.flat_index({2, 0, Part::Im}), std::out_of_range);
  EXPECT_THROW(MomentBasis(BasisKind::PseudoZernike, 13), std::out_of_range);
  EXPECT_THROW(MomentBasis(BasisKind::Legendre, 0), std::invalid_argument);
}

TEST(MomentBasis, ParsesKindNames) {
  EXPECT_EQ(ms::parse_basis_kind("legendre"), BasisKind::Legendre);
  EXPECT_EQ(ms::parse_basis_kind("LM"), BasisKind::Legendre);
  EXPECT_EQ(ms::parse_basis_kind("pseudo_zernike"), BasisKind::PseudoZernike);
  EXPECT_EQ(ms::parse_basis_kind("pzm"), BasisKind::PseudoZernike);
  EXPECT_THROW(ms::parse_basis_kind("zernike"), std::invalid_argument);
}

// --- phi and its Jacobian ----------------------------------------------------

TEST(Phi, LegendreOrderOneExamples) {
  const MomentBasis b(BasisKind::Legendre, 1);
  EXPECT_TRUE(ms::phi(b, {0, 0}).isZero());
  const auto v = ms::phi(b, {1, 1});
  EXPECT_DOUBLE_EQ(v[0], 0.75);
  EXPECT_DOUBLE_EQ(v[1], 0.75);
}

TEST(Phi, PseudoZernikeAtOrigin) {
  const MomentBasis b(BasisKind::PseudoZernike, 1);
  const auto v = ms::phi(b, {0, 0});
  ASSERT_EQ(v.size(), 3);
  EXPECT_NEAR(v[0], -4.0 / kPi, 1e-15);
  EXPECT_DOUBLE_EQ(v[1], 0.0);
  EXPECT_DOUBLE_EQ(v[2], 0.0);
}

TEST(Phi, LegendreMatchesProductOfClosedForms) {
  const MomentBasis b(BasisKind::Legendre, 8);
  for (const auto& s : ms::testing::random_square(20, 3, 1.0)) {
    const auto v = ms::phi(b, s);
    for (std::size_t i = 0; i < b.real_size(); ++i) {
      const auto& idx = b.index(i);
      const double oracle = (2 * idx.p + 1) * (2 * idx.q + 1) / 4.0 * legendre_oracle(idx.p, s.x) *
                            legendre_oracle(idx.q, s.y);
      EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], oracle, 1e-11);
    }
  }
}

TEST(Phi, PseudoZernikeIsScaledConjugate) {
  const MomentBasis b(BasisKind::PseudoZernike, 8);
  for (const auto& s : ms::testing::random_disk(20, 4, 0.0, 1.0)) {
    const auto v = ms::phi(b, s);
    for (std::size_t i = 0; i < b.real_size(); ++i) {
      const auto& idx = b.index(i);
      const auto w = std::conj(pz_w_oracle(idx.p, idx.q, s)) * ((idx.p + 1) / kPi);
      const double oracle = idx.part == Part::Re ? w.real() : w.imag();
      EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], oracle, 1e-9);
    }
  }
}

TEST(Phi, PseudoZernikeRejectsPointsOutsideDisk) {
  const MomentBasis b(BasisKind::PseudoZernike, 3);
  EXPECT_THROW(ms::phi(b, {0.8, 0.7}), std::domain_error);
  EXPECT_THROW(ms::phi_jacobian(b, {1.0, 0.1}), std::domain_error);
  EXPECT_NO_THROW(ms::phi(b, {1.0, 0.0}));
}

TEST(PhiJacobian, LegendreOrderOneIsScaledIdentity) {
  const MomentBasis b(BasisKind::Legendre, 1);
  for (const Position s : {Position{0, 0}, Position{0.3, -0.8}, Position{-1, 1}}) {
    const auto j = ms::phi_jacobian(b, s);
    EXPECT_DOUBLE_EQ(j(0, 0), 0.75);
    EXPECT_DOUBLE_EQ(j(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(j(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(j(1, 1), 0.75);
  }
}

namespace {

ms::Jacobian central_difference(const MomentBasis& b, const Position& s, double h) {
  ms::Jacobian fd(static_cast<Eigen::Index>(b.real_size()), 2);
  fd.col(0) = (ms::phi(b, {s.x + h, s.y}) - ms::phi(b, {s.x - h, s.y})) / (2 * h);
  fd.col(1) = (ms::phi(b, {s.x, s.y + h}) - ms::phi(b, {s.x, s.y - h})) / (2 * h);
  return fd;
}

}  // namespace

TEST(PhiJacobian, PseudoZernikeOrderTwoExample) {
  const MomentBasis b(BasisKind::PseudoZernike, 2);
  const Position s{0.3, 0.4};
  EXPECT_LT((ms::phi_jacobian(b, s) - central_difference(b, s, 1e-6)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PhiJacobian, MatchesFiniteDifferencesAtRandomPoints) {
  const double h = 1e-6;
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const auto points = kind == BasisKind::Legendre ? ms::testing::random_square(100, 11, 0.99)
                                                    : ms::testing::random_disk(100, 12, 0.0, 0.99);
    for (int n = 1; n <= 8; ++n) {
      const MomentBasis b(kind, n);
      for (const auto& s : points) {
        const auto j = ms::phi_jacobian(b, s);
        const auto fd = central_difference(b, s, h);
        const double rel = (j - fd).norm() / std::max(fd.norm(), 1.0);
        EXPECT_LT(rel, 1e-5) << describe(b) << " at (" << s.x << ", " << s.y << ")";
      }
    }
  }
}

TEST(PhiJacobian, FiniteAtOrigin) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentBasis b(kind, 6);
    const auto j = ms::phi_jacobian(b, {0, 0});
    EXPECT_TRUE(j.allFinite());
    // Terms such as r * (x + iy) leave an O(h) difference error here, hence the small step.
    EXPECT_LT((j - central_difference(b, {0, 0}, 1e-9)).norm() / std::max(j.norm(), 1.0), 1e-5);
  }
}

TEST(PhiJacobian, CombinedCallAgrees) {
  const MomentBasis b(BasisKind::PseudoZernike, 5);
  Eigen::VectorXd v;
  ms::Jacobian j;
  ms::phi_with_jacobian(b, {0.2, -0.5}, v, j);
  EXPECT_TRUE(v.isApprox(ms::phi(b, {0.2, -0.5})));
  EXPECT_TRUE(j.isApprox(ms::phi_jacobian(b, {0.2, -0.5})));
}

// --- Moments of point sets and grids --------------------------------------------

TEST(MomentsOfPoints, SingleRobotEqualsPhi) {
  const MomentBasis b(BasisKind::PseudoZernike, 4);
  const std::vector<Position> one{{0.1, 0.6}};
  EXPECT_TRUE(ms::moments_of_points(b, one).values().isApprox(ms::phi(b, one[0])));
}

TEST(MomentsOfPoints, SymmetricPairCancelsFirstOrder) {
  const MomentBasis b(BasisKind::Legendre, 1);
  const std::vector<Position> pair{{0.3, -0.2}, {-0.3, 0.2}};
  EXPECT_LT(ms::moments_of_points(b, pair).values().norm(), 1e-15);
}

TEST(MomentsOfPoints, EqualsBruteForceMean) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentBasis b(kind, 6);
    const auto pts = ms::testing::random_disk(5, 21);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.real_size()));
    for (const auto& s : pts) sum += ms::phi(b, s);
    EXPECT_LT((ms::moments_of_points(b, pts).values() - sum / 5.0).norm(), 1e-13);
  }
}

TEST(MomentsOfPoints, RejectsEmptySet) {
  const MomentBasis b(BasisKind::Legendre, 2);
  EXPECT_THROW(ms::moments_of_points(b, std::vector<Position>{}), std::invalid_argument);
}

TEST(MomentsOfPoints, WeightedMeanAcceptsSignedWeights) {
  const MomentBasis b(BasisKind::Legendre, 2);
  const std::vector<Position> pts{{0.1, 0.2}, {0.5, -0.3}, {-0.4, 0.4}};
  const std::vector<double> w{2.0, -0.5, 1.0};
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < 3; ++i) oracle += w[i] * ms::phi(b, pts[i]);
  oracle /= 2.5;
  EXPECT_LT((ms::moments_of_weighted_points(b, pts, w).values() - oracle).norm(), 1e-14);
  const std::vector<double> bad{1.0, -1.0, 0.0};
  EXPECT_THROW(ms::moments_of_weighted_points(b, pts, bad), std::invalid_argument);
}

TEST(MomentsOfPoints, TranslationShiftsFirstOrderByThreeQuarters) {
  const MomentBasis b(BasisKind::Legendre, 4);
  auto pts = ms::testing::random_square(12, 5, 0.5);
  const auto before = ms::moments_of_points(b, pts);
  const double dx = 0.13, dy = -0.27;
  for (auto& s : pts) s = {s.x + dx, s.y + dy};
  const auto after = ms::moments_of_points(b, pts);
  EXPECT_NEAR(after.at({1, 0, Part::Re}) - before.at({1, 0, Part::Re}), 0.75 * dx, 1e-14);
  EXPECT_NEAR(after.at({0, 1, Part::Re}) - before.at({0, 1, Part::Re}), 0.75 * dy, 1e-14);
}

TEST(MomentsOfPoints, PseudoZernikeRotationCovariance) {
  const MomentBasis b(BasisKind::PseudoZernike, 8);
  auto pts = ms::testing::random_disk(15, 8, 0.0, 0.9);
  const auto before = ms::moments_of_points(b, pts);
  const double dtheta = 0.731;
  for (auto& s : pts) {
    const double c = std::cos(dtheta), sn = std::sin(dtheta);
    s = {c * s.x - sn * s.y, sn * s.x + c * s.y};
  }
  const auto after = ms::moments_of_points(b, pts);
  for (int p = 1; p <= 8; ++p) {
    for (int q = 0; q <= p; ++q) {
      const auto get = [&](const MomentVector& m) {
        const double im = q > 0 ? m.at({p, q, Part::Im}) : 0.0;
        return std::complex<double>(m.at({p, q, Part::Re}), im);
      };
      const auto m0 = get(before);
      const auto m1 = get(after);
      EXPECT_NEAR(std::abs(m1), std::abs(m0), 1e-10) << p << "," << q;
      EXPECT_NEAR(std::abs(m1 - m0 * std::polar(1.0, -q * dtheta)), 0.0, 1e-10) << p << "," << q;
    }
  }
}

TEST(MomentsOfGrid, UniformGridHasZeroFirstOrder) {
  const MomentBasis b(BasisKind::Legendre, 4);
  const auto m = ms::moments_of_grid(b, ms::DensityGrid(32, 32, 1.0));
  EXPECT_NEAR(m.at({1, 0, Part::Re}), 0.0, 1e-14);
  EXPECT_NEAR(m.at({0, 1, Part::Re}), 0.0, 1e-14);
}

TEST(MomentsOfGrid, SinglePixelEqualsPhiAtCenter) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentBasis b(kind, 5);
    ms::DensityGrid g(10, 12);
    g.at(3, 7) = 2.5;
    const auto center = g.pixel_center(3, 7);
    EXPECT_LT((ms::moments_of_grid(b, g).values() - ms::phi(b, center)).norm(), 1e-12);
  }
}

TEST(MomentsOfGrid, PixelCentersFollowImageLayout) {
  const ms::DensityGrid g(4, 8);
  EXPECT_DOUBLE_EQ(g.pixel_center(0, 0).x, -1.0 + 1.0 / 8);
  EXPECT_DOUBLE_EQ(g.pixel_center(0, 0).y, 1.0 - 1.0 / 4);
  EXPECT_DOUBLE_EQ(g.pixel_center(3, 7).x, 1.0 - 1.0 / 8);
  EXPECT_DOUBLE_EQ(g.pixel_center(3, 7).y, -1.0 + 1.0 / 4);
}

TEST(MomentsOfGrid, RejectsZeroMass) {
  const MomentBasis b(BasisKind::Legendre, 3);
  EXPECT_THROW(ms::moments_of_grid(b, ms::DensityGrid(8, 8, 0.0)), std::invalid_argument);
  // PZM ignores mass outside the disk.
  ms::DensityGrid corner(8, 8);
  corner.at(0, 0) = 1.0;
  EXPECT_THROW(ms::moments_of_grid(MomentBasis(BasisKind::PseudoZernike, 3), corner), std::invalid_argument);
}

TEST(MomentsOfGrid, BunnyHeadVectorLengths) {
  const auto grid = ms::read_pgm(ms::testing::source_path("data/bunny_head.pgm"), true);
  for (auto [n, count] : {std::pair{4, 14}, {6, 27}, {8, 44}}) {
    const auto m = ms::moments_of_grid(MomentBasis(BasisKind::Legendre, n), grid);
    EXPECT_EQ(m.basis().complex_count(), static_cast<std::size_t>(count));
    EXPECT_EQ(m.size(), static_cast<std::size_t>(count));
  }
}

// --- Reconstruction ----------------------------------------------------------

TEST(Reconstruct, ZeroMomentsGiveZeroGrid) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentVector zero(MomentBasis(kind, 4));
    const auto g = ms::reconstruct(zero, 16, 16);
    EXPECT_DOUBLE_EQ(g.min(), 0.0);
    EXPECT_DOUBLE_EQ(g.max(), 0.0);
  }
}

TEST(Reconstruct, FirstOrderLegendreIsProportionalToX) {
  const MomentBasis b(BasisKind::Legendre, 1);
  const MomentVector m(b, Eigen::Vector2d(0.6, 0.0));
  const auto g = ms::reconstruct(m, 9, 10);
  const double ratio = g.at(0, 0) / g.pixel_center(0, 0).x;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      EXPECT_NEAR(g.at(r, c), ratio * g.pixel_center(r, c).x, 1e-14);
    }
  }
}

TEST(Reconstruct, LegendreSeriesMatchesDirectSum) {
  const MomentBasis b(BasisKind::Legendre, 4);
  const auto m = ms::moments_of_points(b, ms::testing::random_square(7, 2));
  for (const auto& s : ms::testing::random_square(10, 9, 1.0)) {
    double f = 0.0;
    for (std::size_t i = 0; i < b.real_size(); ++i) {
      const auto& idx = b.index(i);
      f += m[i] * legendre_oracle(idx.p, s.x) * legendre_oracle(idx.q, s.y);
    }
    EXPECT_NEAR(ms::evaluate_series(m, s), f, 1e-12);
  }
}

TEST(Reconstruct, PseudoZernikeSeriesAddsConjugateTerms) {
  const MomentBasis b(BasisKind::PseudoZernike, 4);
  const auto m = ms::moments_of_points(b, ms::testing::random_disk(7, 2));
  for (const auto& s : ms::testing::random_disk(10, 9, 0.0, 1.0)) {
    double f = 0.0;
    for (int p = 1; p <= 4; ++p) {
      f += m.at({p, 0, Part::Re}) * pz_w_oracle(p, 0, s).real();
      for (int q = 1; q <= p; ++q) {
        const std::complex<double> mpq(m.at({p, q, Part::Re}), m.at({p, q, Part::Im}));
        f += 2.0 * (mpq * pz_w_oracle(p, q, s)).real();
      }
    }
    EXPECT_NEAR(ms::evaluate_series(m, s), f, 1e-10);
  }
  EXPECT_DOUBLE_EQ(ms::evaluate_series(m, {0.9, 0.9}), 0.0);
}

TEST(Reconstruct, RemeasuringReconstructionRecoversMoments) {
  const auto image = ms::read_pgm(ms::testing::source_path("data/bunny_head.pgm"), true);
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentBasis b(kind, 8);
    const auto m = ms::moments_of_grid(b, image);
    auto g = ms::reconstruct(m, 400, 400);
    // Adding the zeroth-order term back yields a unit-mass density.
    const double m0 = ms::zeroth_order_moment(kind);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        const auto s = g.pixel_center(r, c);
        if (kind == BasisKind::PseudoZernike && s.radius() > 1.0) continue;
        g.at(r, c) += m0;
      }
    }
    const auto again = ms::moments_of_grid(b, g);
    EXPECT_LT((again.values() - m.values()).norm() / m.values().norm(), 2e-2) << describe(b);
  }
}

TEST(Reconstruct, LetterNFidelityImprovesWithOrder) {
  const auto image = ms::read_pgm(ms::testing::source_path("data/letter_n.pgm"), true);
  const auto density = unit_density(image);
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {5, 10, 15, 20}) {
    const auto m = ms::moments_of_grid(MomentBasis(BasisKind::Legendre, n), image);
    const auto g = ms::reconstruct(m, image.rows(), image.cols());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.values().size(); ++i) {
      const double f = g.values()[i] + ms::zeroth_order_moment(BasisKind::Legendre);
      num += (f - density.values()[i]) * (f - density.values()[i]);
      den += density.values()[i] * density.values()[i];
    }
    const double err = num / den;
    EXPECT_LE(err, previous) << "order " << n;
    previous = err;
  }
}

// --- MSRE ----------------------------------------------------------------------

TEST(Msre, Identities) {
  for (auto kind : {BasisKind::Legendre, BasisKind::PseudoZernike}) {
    const MomentBasis b(kind, 6);
    const auto m = ms::moments_of_points(b, ms::testing::random_disk(9, 14));
    EXPECT_DOUBLE_EQ(ms::msre(m, m), 0.0);
    EXPECT_NEAR(ms::msre(MomentVector(b), m), 1.0, 1e-14);
    const MomentVector twice(b, 2.0 * m.values());
    EXPECT_NEAR(ms::msre(twice, m), 1.0, 1e-14);
  }
}

TEST(Msre, MatchesLatticeOracle) {
  const MomentBasis b(BasisKind::PseudoZernike, 4);
  const auto m1 = ms::moments_of_points(b, ms::testing::random_disk(6, 1));
  const auto m2 = ms::moments_of_points(b, ms::testing::random_disk(6, 2));
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 41; ++i) {
    for (int j = 0; j < 41; ++j) {
      const Position s{-1.0 + 0.05 * i, -1.0 + 0.05 * j};
      if (s.radius() > 1.0) continue;
      const double f1 = ms::evaluate_series(m1, s);
      const double f2 = ms::evaluate_series(m2, s);
      num += (f1 - f2) * (f1 - f2);
      den += f2 * f2;
    }
  }
  EXPECT_NEAR(ms::msre(m1, m2), num / den, 1e-12);
  const ms::MsreEvaluator eval(m2);
  EXPECT_NEAR(eval(m1), num / den, 1e-12);
}

TEST(Msre, RejectsMismatchAndZeroDesired) {
  const MomentBasis b4(BasisKind::Legendre, 4);
  const MomentBasis b5(BasisKind::Legendre, 5);
  const auto m4 = ms::moments_of_points(b4, ms::testing::random_square(3, 1));
  const auto m5 = ms::moments_of_points(b5, ms::testing::random_square(3, 1));
  EXPECT_THROW(ms::msre(m4, m5), std::invalid_argument);
  EXPECT_THROW(ms::msre(m4, MomentVector(b4)), std::invalid_argument);
}
