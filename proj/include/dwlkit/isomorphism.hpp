#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

struct IsomorphismResult {
  bool isomorphic = false;
  // witness[i] = image in gB of node i of gA.
  std::optional<std::vector<NodeId>> witness;
};

inline constexpr std::size_t kDefaultOracleNodeBound = 8;

// Exhaustive search for a bijection phi with A^{<t}_{i,j} == A'^{<t}_{phi(i),phi(j)}
// for every pair and equal node-feature rows under phi.
// Throws std::length_error when either graph exceeds node_bound.
IsomorphismResult brute_force_isomorphic_until(const DynamicGraph& a, const DynamicGraph& b,
                                               double t,
                                               std::size_t node_bound = kDefaultOracleNodeBound);

// Same search restricted to bijections that map tuple `sa` onto `sb`
// element-wise (node-pair isomorphism when both tuples have two entries).
IsomorphismResult brute_force_tuples_isomorphic_until(
    const DynamicGraph& a, const std::vector<NodeId>& sa, const DynamicGraph& b,
    const std::vector<NodeId>& sb, double t, std::size_t node_bound = kDefaultOracleNodeBound);

}  // namespace dwlkit
