#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace dwlkit {

using NodeId = std::uint32_t;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Event {
  NodeId src = 0;
  NodeId dst = 0;
  double time = 0.0;
  // Row of the edge-feature table; absent means an all-zero feature row.
  std::optional<std::size_t> edge_feature_index;
};

// One entry of a node's incident-event index.
struct Incidence {
  NodeId neighbor;
  double time;
  std::size_t event;  // position in DynamicGraph::events()
};

// Node and edge features plus a time-sorted interaction stream. Immutable
// after construction.
class DynamicGraph {
 public:
  DynamicGraph() = default;

  // Validates ids/feature shapes and stable-sorts events by time. An empty
  // feature matrix is replaced by a zero matrix with one column.
  DynamicGraph(std::size_t node_count, std::vector<Event> events,
               Matrix node_features = Matrix(), Matrix edge_features = Matrix());

  std::size_t node_count() const { return node_count_; }
  std::span<const Event> events() const { return events_; }
  const Matrix& node_features() const { return node_features_; }
  const Matrix& edge_features() const { return edge_features_; }
  std::size_t node_feature_dim() const { return node_features_.cols(); }
  std::size_t edge_feature_dim() const { return edge_features_.cols(); }

  // Edge-feature row of an event (zeros when the event carries none).
  Eigen::RowVectorXd edge_feature(const Event& e) const;

  // Incident events of u in ascending time order (self-loops appear once).
  std::span<const Incidence> incidences(NodeId u) const;

  // Largest event time, 0 for an empty stream.
  double max_time() const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Event> events_;
  Matrix node_features_;
  Matrix edge_features_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<Incidence> incidences_;
};

enum class EventFormat { jodie_csv, edge_list };

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// jodie_csv: header, then `src,dst,timestamp,state_label,f1,...,fk`.
// edge_list: `src dst timestamp` whitespace separated, no header; '#' lines
// are comments.
DynamicGraph load_events(std::istream& in, EventFormat format);
DynamicGraph load_events_file(const std::string& path, EventFormat format);
EventFormat parse_event_format(const std::string& name);

void write_edge_list(std::ostream& out, const DynamicGraph& g);

// Key for an unordered node pair.
inline std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Dynamic adjacency tensor stored sparsely: every unordered pair with at
// least one interaction maps to its ascending timestamp sequence. Absent
// pairs are the all-infinity sequence.
class Dat {
 public:
  Dat() = default;
  explicit Dat(const DynamicGraph& g);

  // Stored timestamps of {u,v} (empty for absent pairs).
  std::span<const double> timestamps(NodeId u, NodeId v) const;
  // Stored timestamps strictly before t.
  std::span<const double> before(NodeId u, NodeId v, double t) const;
  // Interaction count q(u,v).
  std::size_t count(NodeId u, NodeId v) const { return timestamps(u, v).size(); }

  // Maximum sequence length over all pairs.
  std::size_t depth() const { return depth_; }
  std::size_t pair_count() const { return pairs_.size(); }
  const std::unordered_map<std::uint64_t, std::vector<double>>& pairs() const { return pairs_; }

 private:
  std::unordered_map<std::uint64_t, std::vector<double>> pairs_;
  std::size_t depth_ = 0;
};

Dat build_dat(const DynamicGraph& g);

// Historical DAT row: stored timestamps < t, padded with infinity to depth().
std::vector<double> hdat_at(const Dat& dat, NodeId u, NodeId v, double t);
// Time-interval row: t - timestamp where hdat_at is finite, else infinity.
std::vector<double> tit_at(const Dat& dat, NodeId u, NodeId v, double t);

struct NeighborEntry {
  NodeId neighbor;
  double time;
  std::size_t event;
};

struct HistoricalNeighborhood {
  NodeId root = 0;
  double t = 0.0;
  std::vector<NeighborEntry> entries;  // ascending by time
};

// Events incident to u strictly before t, keeping the `limit` most recent.
HistoricalNeighborhood historical_neighbors(const DynamicGraph& g, NodeId u, double t,
                                            std::size_t limit);

}  // namespace dwlkit
