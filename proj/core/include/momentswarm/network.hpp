#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "momentswarm/geometry.hpp"

namespace momentswarm {

/// Directed edge src -> dst: src sends to dst.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Communication digraph over vertices 0..N-1, no self-loops.
class Digraph {
 public:
  explicit Digraph(std::size_t vertex_count = 0);

  /// Adds src -> dst; duplicates are ignored. Throws std::invalid_argument on
  /// self-loops or out-of-range vertices.
  void add_edge(std::size_t src, std::size_t dst);

  std::size_t vertex_count() const { return out_.size(); }
  std::size_t edge_count() const;
  bool has_edge(std::size_t src, std::size_t dst) const;

  std::size_t out_degree(std::size_t v) const { return out_.at(v).size(); }
  std::size_t in_degree(std::size_t v) const { return in_.at(v).size(); }

  /// Sorted ascending.
  const std::vector<std::size_t>& out_neighbors(std::size_t v) const { return out_.at(v); }
  const std::vector<std::size_t>& in_neighbors(std::size_t v) const { return in_.at(v); }

  /// All edges ordered by (src, dst).
  std::vector<Edge> edges() const;

  bool symmetric() const;

 private:
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

Digraph complete_digraph(std::size_t n);
Digraph directed_cycle(std::size_t n);
Digraph digraph_from_edges(std::size_t n, std::span<const Edge> edges);

/// Edge i -> j iff i != j and |s_i - s_j| <= radius. Throws on radius <= 0.
Digraph build_radius_graph(std::span<const Position> positions, double radius);

/// D_out - A_adj with A_ij = 1 iff i -> j.
Eigen::MatrixXd out_laplacian(const Digraph& g);

/// True iff every vertex reaches every other vertex.
bool strongly_connected(const Digraph& g);

void write_edges_csv(std::ostream& out, const Digraph& g);

/// Independent per-message drops with probability `drop_rate`, driven by a
/// private seeded stream so a run replays identically.
class PacketLossModel {
 public:
  /// Throws std::invalid_argument unless 0 <= drop_rate < 1.
  explicit PacketLossModel(double drop_rate = 0.0, std::uint64_t seed = 0);

  double drop_rate() const { return drop_rate_; }

  /// One Bernoulli(1 - drop_rate) draw.
  bool delivered();

 private:
  double drop_rate_;
  std::mt19937_64 rng_;
};

/// Edges whose message gets through this step, in (src, dst) order. Draws
/// exactly one variate per edge when drop_rate > 0.
std::vector<Edge> sample_delivery(const Digraph& g, PacketLossModel& loss);
/// Same, writing into `out` (cleared first) to reuse its storage.
void sample_delivery(const Digraph& g, PacketLossModel& loss, std::vector<Edge>& out);

/// How the communication graph is formed each iteration.
struct TopologySpec {
  enum class Kind { AllToAll, Radius, Explicit };
  Kind kind = Kind::AllToAll;
  double radius = 0.0;
  std::vector<Edge> edges;

  /// "all_to_all" or "radius:<r>".
  static TopologySpec parse(std::string_view text);
  static TopologySpec explicit_edges(std::vector<Edge> edges);

  /// Builds the graph for the current robot positions. Explicit edge lists
  /// refer to robot slots and must fit the robot count.
  Digraph build(std::span<const Position> positions) const;

  /// True if the graph depends on positions and must be rebuilt as robots move.
  bool position_dependent() const { return kind == Kind::Radius; }

  std::string to_string() const;
};

}  // namespace momentswarm
