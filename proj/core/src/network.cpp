#include "momentswarm/network.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>

namespace momentswarm {

Digraph::Digraph(std::size_t vertex_count) : out_(vertex_count), in_(vertex_count) {}

void Digraph::add_edge(std::size_t src, std::size_t dst) {
  if (src >= vertex_count() || dst >= vertex_count()) {
    throw std::invalid_argument("Digraph: edge " + std::to_string(src) + "->" +
                                std::to_string(dst) + " out of range");
  }
  if (src == dst) throw std::invalid_argument("Digraph: self-loop at " + std::to_string(src));
  auto& out = out_[src];
  const auto it = std::lower_bound(out.begin(), out.end(), dst);
  if (it != out.end() && *it == dst) return;
  out.insert(it, dst);
  auto& in = in_[dst];
  in.insert(std::lower_bound(in.begin(), in.end(), src), src);
}

std::size_t Digraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& out : out_) n += out.size();
  return n;
}

bool Digraph::has_edge(std::size_t src, std::size_t dst) const {
  const auto& out = out_.at(src);
  return std::binary_search(out.begin(), out.end(), dst);
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> all;
  all.reserve(edge_count());
  for (std::size_t i = 0; i < out_.size(); ++i) {
    for (auto j : out_[i]) all.push_back({i, j});
  }
  return all;
}

bool Digraph::symmetric() const {
  for (std::size_t i = 0; i < out_.size(); ++i) {
    for (auto j : out_[i]) {
      if (!has_edge(j, i)) return false;
    }
  }
  return true;
}

Digraph complete_digraph(std::size_t n) {
  Digraph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) g.add_edge(i, j);
    }
  }
  return g;
}

Digraph directed_cycle(std::size_t n) {
  Digraph g(n);
  if (n < 2) return g;
  for (std::size_t i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

Digraph digraph_from_edges(std::size_t n, std::span<const Edge> edges) {
  Digraph g(n);
  for (const auto& e : edges) g.add_edge(e.src, e.dst);
  return g;
}

Digraph build_radius_graph(std::span<const Position> positions, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("build_radius_graph: radius must be positive");
  Digraph g(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (distance(positions[i], positions[j]) <= radius) {
        g.add_edge(i, j);
        g.add_edge(j, i);
      }
    }
  }
  return g;
}

Eigen::MatrixXd out_laplacian(const Digraph& g) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    lap(row, row) = static_cast<double>(g.out_degree(i));
    for (auto j : g.out_neighbors(i)) lap(row, static_cast<Eigen::Index>(j)) = -1.0;
  }
  return lap;
}

namespace {

std::size_t reachable_count(const Digraph& g, bool forward) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : forward ? g.out_neighbors(v) : g.in_neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count;
}

}  // namespace

bool strongly_connected(const Digraph& g) {
  const auto n = g.vertex_count();
  if (n <= 1) return true;
  return reachable_count(g, true) == n && reachable_count(g, false) == n;
}

void write_edges_csv(std::ostream& out, const Digraph& g) {
  out << "src,dst\n";
  for (const auto& e : g.edges()) out << e.src << ',' << e.dst << '\n';
}

PacketLossModel::PacketLossModel(double drop_rate, std::uint64_t seed)
    : drop_rate_(drop_rate), rng_(seed) {
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) {
    throw std::invalid_argument("drop rate must lie in [0, 1)");
  }
}

bool PacketLossModel::delivered() {
  if (drop_rate_ == 0.0) return true;
  // 53-bit uniform in [0,1); avoids the implementation-defined
  // std::*_distribution algorithms so streams match across standard libraries.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u >= drop_rate_;
}

std::vector<Edge> sample_delivery(const Digraph& g, PacketLossModel& loss) {
  std::vector<Edge> out;
  sample_delivery(g, loss, out);
  return out;
}

void sample_delivery(const Digraph& g, PacketLossModel& loss, std::vector<Edge>& out) {
  out.clear();
  out.reserve(g.edge_count());
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    for (auto j : g.out_neighbors(i)) {
      if (loss.delivered()) out.push_back({i, j});
    }
  }
}

TopologySpec TopologySpec::parse(std::string_view text) {
  if (text == "all_to_all") return {};
  constexpr std::string_view prefix = "radius:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto rest = text.substr(prefix.size());
    double r = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), r);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || !(r > 0.0)) {
      throw std::invalid_argument("topology: bad radius in '" + std::string(text) + "'");
    }
    TopologySpec spec;
    spec.kind = Kind::Radius;
    spec.radius = r;
    return spec;
  }
  throw std::invalid_argument("topology: expected 'all_to_all', 'radius:<r>' or an edge list, got '" +
                              std::string(text) + "'");
}

TopologySpec TopologySpec::explicit_edges(std::vector<Edge> edges) {
  TopologySpec spec;
  spec.kind = Kind::Explicit;
  spec.edges = std::move(edges);
  return spec;
}

Digraph TopologySpec::build(std::span<const Position> positions) const {
  switch (kind) {
    case Kind::AllToAll:
      return complete_digraph(positions.size());
    case Kind::Radius:
      return build_radius_graph(positions, radius);
    case Kind::Explicit:
      return digraph_from_edges(positions.size(), edges);
  }
  return Digraph(positions.size());
}

std::string TopologySpec::to_string() const {
  switch (kind) {
    case Kind::AllToAll:
      return "all_to_all";
    case Kind::Radius: {
      char buf[32];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, radius);
      return "radius:" + std::string(buf, ptr);
    }
    case Kind::Explicit:
      return "explicit(" + std::to_string(edges.size()) + " edges)";
  }
  return {};
}

}  // namespace momentswarm
