#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

enum class Section { train, val, test, inductive_test };

// Chronological partition of a graph's (time-sorted) event indices.
struct SplitSpec {
  double total_time = 0.0;
  double val_start = 0.0;   // 0.7 T
  double test_start = 0.0;  // 0.85 T
  // Half-open index ranges into DynamicGraph::events().
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t event_count = 0;
  std::set<NodeId> masked;  // empty in the transductive setting
  std::uint64_t seed = 0;
};

inline constexpr double kValFraction = 0.70;
inline constexpr double kTestFraction = 0.85;

// [0, 0.7T) train, [0.7T, 0.85T) validation, [0.85T, T] test.
// Throws when there are fewer than 3 events or a section comes out empty.
SplitSpec chronological_split(const DynamicGraph& g);

// Samples ceil(fraction * |test nodes|) nodes appearing in the test range.
SplitSpec inductive_mask(const SplitSpec& split, const DynamicGraph& g, double fraction, std::uint64_t seed);

bool touches_masked(const SplitSpec& split, const Event& e);

// Event indices of a section. Training drops events incident to masked
// nodes; the inductive test keeps only test events touching one.
std::vector<std::size_t> section_events(const SplitSpec& split, const DynamicGraph& g, Section section);

// Graph holding only the usable training events (time < val_start, masked
// events removed); features are carried over.
DynamicGraph training_graph(const SplitSpec& split, const DynamicGraph& g);

Section parse_section(const std::string& name);

}  // namespace dwlkit
