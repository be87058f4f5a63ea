#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "momentswarm/io.hpp"

namespace momentswarm {
namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == EOF) return;
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in, const char* field) {
  skip_space_and_comments(in);
  long value = 0;
  if (!(in >> value) || value <= 0) {
    throw FormatError(std::string("PGM: invalid or missing ") + field);
  }
  return value;
}

}  // namespace

DensityGrid read_pgm(std::istream& in, bool invert) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) {
    throw FormatError("PGM: expected magic P2 or P5");
  }
  const bool binary = magic[1] == '5';
  const long width = read_header_int(in, "width");
  const long height = read_header_int(in, "height");
  const long maxval = read_header_int(in, "maxval");
  if (maxval > 65535) throw FormatError("PGM: maxval above 65535");

  const auto rows = static_cast<std::size_t>(height);
  const auto cols = static_cast<std::size_t>(width);
  std::vector<double> values(rows * cols);

  if (binary) {
    // exactly one whitespace byte separates the header from the raster
    if (!std::isspace(in.get())) throw FormatError("PGM: malformed header terminator");
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raster(values.size() * bytes_per);
    if (!in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()))) {
      throw FormatError("PGM: truncated raster");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const unsigned v = bytes_per == 1
                             ? raster[i]
                             : (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
      values[i] = static_cast<double>(v);
    }
  } else {
    for (auto& v : values) {
      skip_space_and_comments(in);
      long sample = 0;
      if (!(in >> sample)) throw FormatError("PGM: truncated ASCII raster");
      v = static_cast<double>(sample);
    }
  }

  for (auto& v : values) {
    if (v > static_cast<double>(maxval)) throw FormatError("PGM: sample exceeds maxval");
    if (invert) v = static_cast<double>(maxval) - v;
  }
  return DensityGrid(rows, cols, std::move(values));
}

DensityGrid read_pgm(const std::filesystem::path& path, bool invert) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image '" + path.string() + "'");
  try {
    return read_pgm(in, invert);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pgm(std::ostream& out, const DensityGrid& grid) {
  const double lo = grid.min();
  const double hi = grid.max();
  const double span = hi - lo;
  out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  std::vector<unsigned char> raster(grid.values().size(), 0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < raster.size(); ++i) {
      raster[i] = static_cast<unsigned char>(std::lround(255.0 * (grid.values()[i] - lo) / span));
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
}

void write_pgm(const std::filesystem::path& path, const DensityGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_pgm(out, grid);
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c) out << ',';
      out << format_double(grid.at(r, c));
    }
    out << '\n';
  }
}

}  // namespace momentswarm
