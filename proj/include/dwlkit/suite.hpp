#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

struct SuiteConfig {
  std::size_t trials = 1000;
  std::size_t max_nodes = 6;
  std::size_t max_events = 10;
  std::size_t time_grid = 5;          // event times drawn from {1..time_grid}
  std::uint64_t seed = 1;
  std::size_t search_budget = 5000;   // graphs tried for the MITE counterexample
  bool drop_histories = false;        // mutation hook for the 2-DWL side of (d)
};

struct Counterexample {
  std::string graph_a;  // edge_list text
  std::string graph_b;
  double t = 0.0;
  std::string detail;
};

struct PropertyResult {
  std::string id;    // "a".."f"
  std::string name;
  bool passed = true;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::vector<Counterexample> counterexamples;  // first few violations, or the witness for (f)
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<PropertyResult> properties;

  bool passed() const;
  const PropertyResult& property(const std::string& id) const;
};

SuiteReport expressiveness_suite(const SuiteConfig& config);

nlohmann::json to_json(const SuiteReport& report);

std::string edge_list_text(const DynamicGraph& g);

}  // namespace dwlkit
