#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace momentswarm::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

struct MomentsOptions {
  std::filesystem::path image;
  std::string basis = "legendre";
  int order = 8;
  bool invert = false;
  std::optional<std::filesystem::path> out;
};

struct ReconstructOptions {
  std::filesystem::path moments;
  std::size_t rows = 128;
  std::size_t cols = 128;
  std::optional<std::filesystem::path> reference;
  std::filesystem::path out_dir = ".";
};

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trial;
  std::optional<std::uint32_t> trace_robot;
  std::int64_t snapshot_every = 0;
  std::filesystem::path out_dir = ".";
};

struct GainsOptions {
  std::string basis = "legendre";
  int order = 8;
  double beta = 1.7;
  double scale = 1.0;
};

int cmd_moments(const MomentsOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const ReconstructOptions& opts, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gains(const GainsOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace momentswarm::cli
