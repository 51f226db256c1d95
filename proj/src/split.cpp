#include "dwlkit/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dwlkit {

SplitSpec chronological_split(const DynamicGraph& g) {
  const auto events = g.events();
  if (events.size() < 3) throw std::invalid_argument("a chronological split needs at least 3 events");
  SplitSpec s;
  s.total_time = g.max_time();
  s.val_start = kValFraction * s.total_time;
  s.test_start = kTestFraction * s.total_time;
  s.event_count = events.size();
  const auto first_at = [&](double bound) {
    return static_cast<std::size_t>(
        std::partition_point(events.begin(), events.end(), [&](const Event& e) { return e.time < bound; }) -
        events.begin());
  };
  s.train_end = first_at(s.val_start);
  s.val_end = first_at(s.test_start);
  if (s.train_end == 0 || s.val_end == s.train_end || s.val_end == s.event_count) {
    throw std::invalid_argument("degenerate split: a section is empty");
  }
  return s;
}

SplitSpec inductive_mask(const SplitSpec& split, const DynamicGraph& g, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("mask fraction must lie in [0,1]");
  if (split.val_end >= split.event_count) throw std::invalid_argument("test section is empty");
  std::set<NodeId> test_nodes;
  for (std::size_t i = split.val_end; i < split.event_count; ++i) {
    test_nodes.insert(g.events()[i].src);
    test_nodes.insert(g.events()[i].dst);
  }
  std::vector<NodeId> pool(test_nodes.begin(), test_nodes.end());
  const auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool.size())));
  std::mt19937_64 rng(seed);
  std::vector<NodeId> chosen;
  std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), take, rng);
  SplitSpec out = split;
  out.masked = std::set<NodeId>(chosen.begin(), chosen.end());
  out.seed = seed;
  return out;
}

bool touches_masked(const SplitSpec& split, const Event& e) {
  return split.masked.contains(e.src) || split.masked.contains(e.dst);
}

std::vector<std::size_t> section_events(const SplitSpec& split, const DynamicGraph& g, Section section) {
  if (g.events().size() != split.event_count) throw std::invalid_argument("split does not belong to this graph");
  std::vector<std::size_t> out;
  const auto push_range = [&](std::size_t lo, std::size_t hi, auto keep) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (keep(g.events()[i])) out.push_back(i);
    }
  };
  switch (section) {
    case Section::train:
      push_range(0, split.train_end, [&](const Event& e) { return !touches_masked(split, e); });
      break;
    case Section::val:
      push_range(split.train_end, split.val_end, [](const Event&) { return true; });
      break;
    case Section::test:
      push_range(split.val_end, split.event_count, [](const Event&) { return true; });
      break;
    case Section::inductive_test:
      push_range(split.val_end, split.event_count, [&](const Event& e) { return touches_masked(split, e); });
      break;
  }
  return out;
}

DynamicGraph training_graph(const SplitSpec& split, const DynamicGraph& g) {
  std::vector<Event> kept;
  for (std::size_t i : section_events(split, g, Section::train)) kept.push_back(g.events()[i]);
  return DynamicGraph(g.node_count(), std::move(kept), g.node_features(), g.edge_features());
}

Section parse_section(const std::string& name) {
  if (name == "train") return Section::train;
  if (name == "val") return Section::val;
  if (name == "test") return Section::test;
  if (name == "inductive" || name == "inductive-test") return Section::inductive_test;
  throw std::invalid_argument("unknown section: " + name);
}

}  // namespace dwlkit
