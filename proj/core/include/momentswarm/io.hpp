#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "momentswarm/density_grid.hpp"
#include "momentswarm/errors.hpp"
#include "momentswarm/moment_basis.hpp"

namespace momentswarm {

/// Reads a grayscale PGM (P2 ASCII or P5 binary, maxval <= 65535).
///
/// Pixel intensity becomes mass. With `invert`, mass is maxval - intensity
/// so dark shapes on a white background are the dense region.
DensityGrid read_pgm(const std::filesystem::path& path, bool invert = false);
DensityGrid read_pgm(std::istream& in, bool invert = false);

/// Writes a binary 8-bit PGM, min-max scaled to 0..255. A constant grid is
/// written as all zeros.
void write_pgm(const std::filesystem::path& path, const DensityGrid& grid);
void write_pgm(std::ostream& out, const DensityGrid& grid);

/// Raw grid values, one CSV row per grid row (top row first).
void write_grid_csv(std::ostream& out, const DensityGrid& grid);

/// Moment CSV with header `p,q,part,value`, rows in flat-index order.
void write_moments_csv(std::ostream& out, const MomentVector& moments);
void write_moments_csv(const std::filesystem::path& path, const MomentVector& moments);

/// Parses a moment CSV. The basis is inferred from the rows: a p = 0 row
/// only occurs for Legendre moments; pseudo-Zernike files have an Im row for
/// every q > 0. When `expected_kind` is given, a different inferred kind is
/// an error. Every component of the inferred basis must be present exactly
/// once.
MomentVector read_moments_csv(std::istream& in,
                              std::optional<BasisKind> expected_kind = std::nullopt);
MomentVector read_moments_csv(const std::filesystem::path& path,
                              std::optional<BasisKind> expected_kind = std::nullopt);

/// Formats a double so it parses back to the identical value.
std::string format_double(double value);

}  // namespace momentswarm
