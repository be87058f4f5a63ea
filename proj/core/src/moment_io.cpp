#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "momentswarm/io.hpp"

namespace momentswarm {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string& s, int line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("moment CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, int line_no) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("moment CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_moments_csv(std::ostream& out, const MomentVector& moments) {
  out << "p,q,part,value\n";
  const auto& indices = moments.basis().indices();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out << indices[i].p << ',' << indices[i].q << ',' << to_string(indices[i].part) << ','
        << format_double(moments[i]) << '\n';
  }
}

void write_moments_csv(const std::filesystem::path& path, const MomentVector& moments) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_moments_csv(out, moments);
}

MomentVector read_moments_csv(std::istream& in, std::optional<BasisKind> expected_kind) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line) != "p,q,part,value") {
    throw FormatError("moment CSV: expected header 'p,q,part,value'");
  }

  using Key = std::tuple<int, int, Part>;
  std::map<Key, double> rows;
  bool has_p_zero = false;
  bool has_imag = false;
  int max_p = 0;
  int max_total = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) {
      throw FormatError("moment CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const int p = parse_int(f[0], line_no);
    const int q = parse_int(f[1], line_no);
    Part part;
    try {
      part = parse_part(f[2]);
    } catch (const std::invalid_argument& e) {
      throw FormatError("moment CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    if (p < 0 || q < 0) throw FormatError("moment CSV line " + std::to_string(line_no) + ": negative index");
    if (!rows.emplace(Key{p, q, part}, parse_double(f[3], line_no)).second) {
      throw FormatError("moment CSV line " + std::to_string(line_no) + ": duplicate component");
    }
    has_p_zero |= p == 0;
    has_imag |= part == Part::Im;
    max_p = std::max(max_p, p);
    max_total = std::max(max_total, p + q);
  }
  if (rows.empty()) throw FormatError("moment CSV: no components");
  if (has_p_zero && has_imag) throw FormatError("moment CSV: mixes Legendre and pseudo-Zernike rows");

  const BasisKind kind = has_p_zero ? BasisKind::Legendre : BasisKind::PseudoZernike;
  if (expected_kind && *expected_kind != kind) {
    throw FormatError("moment CSV holds " + std::string(to_string(kind)) + " moments, expected " +
                      std::string(to_string(*expected_kind)));
  }
  const int order = kind == BasisKind::Legendre ? max_total : max_p;
  MomentBasis basis = [&] {
    try {
      return MomentBasis(kind, order);
    } catch (const std::exception& e) {
      throw FormatError(std::string("moment CSV: ") + e.what());
    }
  }();
  if (rows.size() != basis.real_size()) {
    throw FormatError("moment CSV: " + std::to_string(rows.size()) + " rows, " + describe(basis) +
                      " needs " + std::to_string(basis.real_size()));
  }
  MomentVector out(basis);
  for (const auto& [key, value] : rows) {
    const auto& [p, q, part] = key;
    std::size_t flat = 0;
    try {
      flat = basis.flat_index({p, q, part});
    } catch (const std::out_of_range&) {
      throw FormatError("moment CSV: component (" + std::to_string(p) + "," + std::to_string(q) +
                        ") not valid for " + describe(basis));
    }
    out.values()[static_cast<Eigen::Index>(flat)] = value;
  }
  return out;
}

MomentVector read_moments_csv(const std::filesystem::path& path,
                              std::optional<BasisKind> expected_kind) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open moment file '" + path.string() + "'");
  return read_moments_csv(in, expected_kind);
}

}  // namespace momentswarm
