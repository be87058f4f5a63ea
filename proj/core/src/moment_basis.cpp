#include "momentswarm/moment_basis.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include "momentswarm/moments.hpp"

namespace momentswarm {

namespace detail {

struct BasisTables {
  std::vector<MomentIndex> indices;
  std::vector<int> degrees;
  // flat lookup: ((p * (n+1)) + q) * 2 + part  ->  flat index or -1
  std::vector<long> lookup;
  // radial[p * (n+1) + q] = B_{pqk}, pseudo-Zernike only
  std::vector<std::vector<double>> radial;
  int order = 0;

  std::size_t slot(int p, int q, Part part) const {
    const auto n1 = static_cast<std::size_t>(order + 1);
    return (static_cast<std::size_t>(p) * n1 + static_cast<std::size_t>(q)) * 2 +
           (part == Part::Im ? 1 : 0);
  }
};

}  // namespace detail

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::shared_ptr<const detail::BasisTables> build_tables(BasisKind kind, int n) {
  auto t = std::make_shared<detail::BasisTables>();
  t->order = n;
  if (kind == BasisKind::Legendre) {
    for (int d = 1; d <= n; ++d) {
      for (int q = 0; q <= d; ++q) {
        t->indices.push_back({d - q, q, Part::Re});
        t->degrees.push_back(d);
      }
    }
  } else {
    t->radial.resize(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int p = 1; p <= n; ++p) {
      for (int q = 0; q <= p; ++q) {
        t->radial[static_cast<std::size_t>(p * (n + 1) + q)] = pz_radial_coefficients(p, q);
        t->indices.push_back({p, q, Part::Re});
        t->degrees.push_back(p);
        if (q > 0) {
          t->indices.push_back({p, q, Part::Im});
          t->degrees.push_back(p);
        }
      }
    }
  }
  t->lookup.assign(static_cast<std::size_t>((n + 1) * (n + 1) * 2), -1);
  for (std::size_t i = 0; i < t->indices.size(); ++i) {
    const auto& idx = t->indices[i];
    t->lookup[t->slot(idx.p, idx.q, idx.part)] = static_cast<long>(i);
  }
  return t;
}

}  // namespace

std::string_view to_string(BasisKind kind) {
  return kind == BasisKind::Legendre ? "legendre" : "pseudo_zernike";
}

BasisKind parse_basis_kind(std::string_view text) {
  const auto s = lowercase(text);
  if (s == "legendre" || s == "lm") return BasisKind::Legendre;
  if (s == "pseudo_zernike" || s == "pseudo-zernike" || s == "pzm") return BasisKind::PseudoZernike;
  throw std::invalid_argument("unknown basis '" + std::string(text) +
                              "' (expected legendre|lm|pseudo_zernike|pzm)");
}

std::string_view to_string(Part part) { return part == Part::Re ? "re" : "im"; }

Part parse_part(std::string_view text) {
  const auto s = lowercase(text);
  if (s == "re") return Part::Re;
  if (s == "im") return Part::Im;
  throw std::invalid_argument("unknown moment part '" + std::string(text) + "'");
}

MomentBasis::MomentBasis(BasisKind kind, int order) : kind_(kind), order_(order) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  const int cap = kind == BasisKind::Legendre ? kMaxLegendreOrder : kMaxPseudoZernikeOrder;
  if (order > cap) {
    throw std::out_of_range(std::string(to_string(kind)) + " order " + std::to_string(order) +
                            " above supported maximum " + std::to_string(cap));
  }
  tables_ = build_tables(kind, order);
}

std::size_t MomentBasis::complex_count() const {
  const auto n = static_cast<std::size_t>(order_);
  return n * (n + 3) / 2;
}

std::size_t MomentBasis::real_size() const { return tables_->indices.size(); }

const std::vector<MomentIndex>& MomentBasis::indices() const { return tables_->indices; }

const MomentIndex& MomentBasis::index(std::size_t flat) const { return tables_->indices.at(flat); }

std::size_t MomentBasis::flat_index(const MomentIndex& idx) const {
  if (idx.p < 0 || idx.q < 0 || idx.p > order_ || idx.q > order_) {
    throw std::out_of_range("moment index outside basis");
  }
  const long flat = tables_->lookup[tables_->slot(idx.p, idx.q, idx.part)];
  if (flat < 0) {
    throw std::out_of_range("moment (" + std::to_string(idx.p) + "," + std::to_string(idx.q) +
                            "," + std::string(to_string(idx.part)) + ") not in " +
                            describe(*this));
  }
  return static_cast<std::size_t>(flat);
}

int MomentBasis::degree(std::size_t flat) const { return tables_->degrees.at(flat); }

const std::vector<double>& MomentBasis::radial_coefficients(int p, int q) const {
  static const std::vector<double> empty;
  if (kind_ != BasisKind::PseudoZernike) return empty;
  return tables_->radial.at(static_cast<std::size_t>(p * (order_ + 1) + q));
}

std::string describe(const MomentBasis& basis) {
  return std::string(to_string(basis.kind())) + " order " + std::to_string(basis.order());
}

MomentVector::MomentVector(MomentBasis basis)
    : basis_(std::move(basis)),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.real_size()))) {}

MomentVector::MomentVector(MomentBasis basis, Eigen::VectorXd values)
    : basis_(std::move(basis)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != basis_.real_size()) {
    throw std::invalid_argument("moment vector length " + std::to_string(values_.size()) +
                                " does not match " + describe(basis_) + " (expected " +
                                std::to_string(basis_.real_size()) + ")");
  }
}

double MomentVector::at(const MomentIndex& index) const {
  return values_[static_cast<Eigen::Index>(basis_.flat_index(index))];
}

void require_same_basis(const MomentBasis& a, const MomentBasis& b, std::string_view what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": basis mismatch (" + describe(a) + " vs " +
                                describe(b) + ")");
  }
}

}  // namespace momentswarm
