#include "momentswarm/metric_log.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "momentswarm/errors.hpp"
#include "momentswarm/io.hpp"

namespace momentswarm {

std::optional<std::uint32_t> MetricLog::find(std::string_view metric) const {
  const auto it = std::find(names_.begin(), names_.end(), metric);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - names_.begin());
}

void MetricLog::add(std::int64_t iteration, std::string_view metric, double value,
                    std::optional<std::uint32_t> robot) {
  auto id = find(metric);
  if (!id) {
    id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(metric);
  }
  rows_.push_back({iteration, *id, robot, value});
}

std::vector<std::pair<std::int64_t, double>> MetricLog::series(
    std::string_view metric, std::optional<std::uint32_t> robot) const {
  std::vector<std::pair<std::int64_t, double>> out;
  const auto id = find(metric);
  if (!id) return out;
  for (const auto& row : rows_) {
    if (row.metric == *id && row.robot == robot) out.emplace_back(row.iteration, row.value);
  }
  return out;
}

std::optional<double> MetricLog::last(std::string_view metric) const {
  const auto id = find(metric);
  if (!id) return std::nullopt;
  for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
    if (it->metric == *id && !it->robot) return it->value;
  }
  return std::nullopt;
}

void MetricLog::write_csv(std::ostream& out) const {
  out << "iteration,metric,robot_id,value\n";
  for (const auto& row : rows_) {
    out << row.iteration << ',' << names_[row.metric] << ',';
    if (row.robot) out << *row.robot;
    out << ',' << format_double(row.value) << '\n';
  }
}

void MetricLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_csv(out);
}

}  // namespace momentswarm
