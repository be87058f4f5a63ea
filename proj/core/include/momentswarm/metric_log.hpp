#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace momentswarm {

/// One logged value. `robot` is empty for swarm-level metrics.
struct MetricRow {
  std::int64_t iteration = 0;
  std::uint32_t metric = 0;
  std::optional<std::uint32_t> robot;
  double value = 0.0;
};

/// Append-only metric log with interned metric names.
class MetricLog {
 public:
  void add(std::int64_t iteration, std::string_view metric, double value,
           std::optional<std::uint32_t> robot = std::nullopt);

  const std::vector<MetricRow>& rows() const { return rows_; }
  std::string_view name(std::uint32_t metric) const { return names_.at(metric); }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// (iteration, value) pairs of one metric, optionally restricted to a robot.
  std::vector<std::pair<std::int64_t, double>> series(
      std::string_view metric, std::optional<std::uint32_t> robot = std::nullopt) const;

  /// Most recent value of a swarm-level metric.
  std::optional<double> last(std::string_view metric) const;

  /// `iteration,metric,robot_id,value`.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::optional<std::uint32_t> find(std::string_view metric) const;

  std::vector<std::string> names_;
  std::vector<MetricRow> rows_;
};

}  // namespace momentswarm
