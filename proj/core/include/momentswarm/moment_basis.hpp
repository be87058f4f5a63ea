#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace momentswarm {

enum class BasisKind { Legendre, PseudoZernike };

std::string_view to_string(BasisKind kind);

/// Accepts "legendre"/"lm" and "pseudo_zernike"/"pzm" (case-insensitive).
BasisKind parse_basis_kind(std::string_view text);

enum class Part { Re, Im };

std::string_view to_string(Part part);
Part parse_part(std::string_view text);

/// Identifies one real component of a moment vector.
///
/// Legendre: `p` is the x-degree and `q` the y-degree, so the component is
/// M_pq with total order p + q. Pseudo-Zernike: `p` is the radial order and
/// `q` the angular repetition; moments with q > 0 are complex and occupy two
/// real slots (Re then Im).
struct MomentIndex {
  int p = 0;
  int q = 0;
  Part part = Part::Re;

  friend bool operator==(const MomentIndex&, const MomentIndex&) = default;
};

inline constexpr int kMaxPseudoZernikeOrder = 12;
inline constexpr int kMaxLegendreOrder = 48;

namespace detail {
struct BasisTables;
}

/// Which polynomial family and the maximum order n (zeroth order excluded).
///
/// Components are laid out by increasing order, then increasing q, then
/// Re before Im. For Legendre moments "order" is p + q, which groups the
/// components the same way the truncated series and gain schedule do.
class MomentBasis {
 public:
  MomentBasis(BasisKind kind, int order);

  BasisKind kind() const { return kind_; }
  int order() const { return order_; }

  /// Number of (complex) moments from first to n-th order: n(n+3)/2.
  std::size_t complex_count() const;

  /// Length of the real embedding used for estimation and control.
  std::size_t real_size() const;

  const std::vector<MomentIndex>& indices() const;
  const MomentIndex& index(std::size_t flat) const;

  /// Throws std::out_of_range for an index that is not part of the basis.
  std::size_t flat_index(const MomentIndex& index) const;

  /// Moment order of a flat component (p + q for Legendre, p for PZM).
  int degree(std::size_t flat) const;

  /// Pseudo-Zernike radial coefficients B_{pqk}, k = q..p; empty for Legendre.
  const std::vector<double>& radial_coefficients(int p, int q) const;

  friend bool operator==(const MomentBasis& a, const MomentBasis& b) {
    return a.kind_ == b.kind_ && a.order_ == b.order_;
  }

 private:
  BasisKind kind_;
  int order_;
  std::shared_ptr<const detail::BasisTables> tables_;
};

std::string describe(const MomentBasis& basis);

/// A moment vector in the basis's real embedding.
class MomentVector {
 public:
  explicit MomentVector(MomentBasis basis);
  MomentVector(MomentBasis basis, Eigen::VectorXd values);

  const MomentBasis& basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double at(const MomentIndex& index) const;

 private:
  MomentBasis basis_;
  Eigen::VectorXd values_;
};

/// Throws std::invalid_argument unless both vectors share kind and order.
void require_same_basis(const MomentBasis& a, const MomentBasis& b, std::string_view what);

}  // namespace momentswarm
