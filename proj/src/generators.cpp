#include "dwlkit/generators.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace dwlkit {
namespace {

std::pair<NodeId, NodeId> distinct_pair(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  const NodeId a = pick(rng);
  NodeId b = pick(rng);
  while (b == a) b = pick(rng);
  return {a, b};
}

double open_uniform(double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  double x = dist(rng);
  while (x <= lo) x = dist(rng);
  return x;
}

}  // namespace

DynamicGraph random_dynamic_graph(std::size_t n, std::size_t m, double t_max, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("need at least one node");
  if (m > 0 && n < 2) throw std::invalid_argument("distinct endpoints need at least two nodes");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Event> events;
  events.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto [a, b] = distinct_pair(n, rng);
    events.push_back({a, b, open_uniform(0.0, t_max, rng), std::nullopt});
  }
  return DynamicGraph(n, std::move(events));
}

TriangleGraph triangle_graph(const TriangleConfig& c) {
  if (c.nodes < 3) throw std::invalid_argument("triangles need at least three nodes");
  if (c.communities == 0 && c.triangles > 0) throw std::invalid_argument("no communities to plant");
  if (!(c.t_max > 3.0 * c.max_gap)) throw std::invalid_argument("t_max too small for the triangle gap");
  std::mt19937_64 rng(c.seed);
  std::vector<std::array<NodeId, 3>> triples;
  std::vector<NodeId> ids(c.nodes);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = 0; i < c.communities; ++i) {
    std::shuffle(ids.begin(), ids.end(), rng);
    triples.push_back({ids[0], ids[1], ids[2]});
  }
  TriangleGraph out;
  std::vector<Event> events;
  std::uniform_int_distribution<std::size_t> which(0, triples.empty() ? 0 : triples.size() - 1);
  for (std::size_t i = 0; i < c.triangles; ++i) {
    const auto& tri = triples[which(rng)];
    PlantedTriangle p{tri[0], tri[1], tri[2], 0, 0, 0};
    p.t_ab = open_uniform(0.0, c.t_max - 2.0 * c.max_gap, rng);
    p.t_bc = p.t_ab + open_uniform(0.0, c.max_gap, rng);
    p.t_ac = p.t_bc + open_uniform(0.0, c.max_gap, rng);
    events.push_back({p.a, p.b, p.t_ab, std::nullopt});
    events.push_back({p.b, p.c, p.t_bc, std::nullopt});
    events.push_back({p.a, p.c, p.t_ac, std::nullopt});
    out.triangles.push_back(p);
  }
  for (std::size_t i = 0; i < c.noise_events; ++i) {
    const auto [a, b] = distinct_pair(c.nodes, rng);
    events.push_back({a, b, open_uniform(0.0, c.t_max, rng), std::nullopt});
  }
  out.graph = DynamicGraph(c.nodes, std::move(events));
  return out;
}

DynamicGraph six_node_graph() {
  using namespace six_node;
  return DynamicGraph(6, {{A, B, t1, std::nullopt},
                          {B, C, t2, std::nullopt},
                          {F, E, t1, std::nullopt},
                          {E, D, t2, std::nullopt}});
}

DynamicGraph permute_graph(const DynamicGraph& g, const std::vector<NodeId>& perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) throw std::invalid_argument("permutation size mismatch");
  std::vector<bool> seen(n, false);
  for (NodeId p : perm) {
    if (p >= n || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = true;
  }
  std::vector<Event> events(g.events().begin(), g.events().end());
  for (Event& e : events) {
    e.src = perm[e.src];
    e.dst = perm[e.dst];
  }
  Matrix x(g.node_features().rows(), g.node_features().cols());
  for (std::size_t i = 0; i < n; ++i) {
    x.row(static_cast<Eigen::Index>(perm[i])) = g.node_features().row(static_cast<Eigen::Index>(i));
  }
  return DynamicGraph(n, std::move(events), std::move(x), g.edge_features());
}

std::vector<NodeId> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

DynamicGraph small_random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_events,
                                std::size_t time_grid) {
  if (max_nodes < 2 || time_grid == 0) throw std::invalid_argument("invalid small-graph bounds");
  std::uniform_int_distribution<std::size_t> nodes(2, max_nodes);
  std::uniform_int_distribution<std::size_t> count(0, max_events);
  std::uniform_int_distribution<std::size_t> tick(1, time_grid);
  const std::size_t n = nodes(rng);
  const std::size_t m = count(rng);
  std::vector<Event> events;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [a, b] = distinct_pair(n, rng);
    events.push_back({a, b, static_cast<double>(tick(rng)), std::nullopt});
  }
  return DynamicGraph(n, std::move(events));
}

}  // namespace dwlkit
