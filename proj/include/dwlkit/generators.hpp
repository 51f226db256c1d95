#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

// m events over distinct endpoint pairs, times uniform in (0, t_max).
DynamicGraph random_dynamic_graph(std::size_t n, std::size_t m, double t_max, std::uint64_t seed);

struct PlantedTriangle {
  NodeId a, b, c;
  double t_ab, t_bc, t_ac;  // wedge a-b, wedge b-c, closing a-c
};

struct TriangleConfig {
  std::size_t nodes = 100;
  std::size_t communities = 30;   // fixed triples that keep recurring
  std::size_t triangles = 600;    // planted occurrences
  std::size_t noise_events = 400; // uniform background events
  double t_max = 10000.0;
  double max_gap = 5.0;           // spacing between consecutive triangle edges
  std::uint64_t seed = 0;
};

struct TriangleGraph {
  DynamicGraph graph;
  std::vector<PlantedTriangle> triangles;
};

// Recurring-triangle stream: each occurrence draws one of `communities`
// fixed triples and emits a-b, then b-c, then the closing a-c.
TriangleGraph triangle_graph(const TriangleConfig& config);

// Node ids of the six-node counterexample.
namespace six_node {
inline constexpr NodeId A = 0, B = 1, C = 2, D = 3, E = 4, F = 5;
inline constexpr double t1 = 1.0, t2 = 2.0, t4 = 4.0;
}  // namespace six_node

// Events (A,B,t1), (B,C,t2), (F,E,t1), (E,D,t2); query at t4.
DynamicGraph six_node_graph();

// Relabels node i as perm[i]; feature rows move with their nodes.
DynamicGraph permute_graph(const DynamicGraph& g, const std::vector<NodeId>& perm);

std::vector<NodeId> random_permutation(std::size_t n, std::mt19937_64& rng);

// Small instance on an integer time grid, used by the property suite.
DynamicGraph small_random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_events,
                                std::size_t time_grid);

}  // namespace dwlkit
