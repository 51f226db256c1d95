#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dwlkit/color_table.hpp"
#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

enum class EntityKind { node, pair };

// Round-by-round colors of one graph. Pair (u,v) lives at index u * n + v;
// all n^2 ordered pairs, diagonal included.
struct Coloring {
  EntityKind kind = EntityKind::node;
  std::size_t node_count = 0;
  double t = 0.0;
  std::vector<std::vector<ColorId>> rounds;  // rounds[0] is the initial labeling
  bool stable = false;                       // refinement stopped on a fixed partition

  std::size_t rounds_run() const { return rounds.empty() ? 0 : rounds.size() - 1; }
  const std::vector<ColorId>& final_colors() const { return rounds.back(); }
  ColorId node(NodeId u, std::size_t round) const { return rounds.at(round).at(u); }
  ColorId pair(NodeId u, NodeId v, std::size_t round) const {
    return rounds.at(round).at(static_cast<std::size_t>(u) * node_count + v);
  }
};

enum class InitLabel { constant, features };

// How a neighbor with m events before t enters the 1-DWL multiset.
enum class NeighborMultiplicity { per_event, per_neighbor };

struct DwlOptions {
  int k = 1;
  InitLabel init = InitLabel::constant;
  // Defaults to the entity count (n for k=1, n^2 for k=2).
  std::optional<std::size_t> max_rounds;
  NeighborMultiplicity multiplicity = NeighborMultiplicity::per_event;
  bool stop_when_stable = true;
  // Mutation hook: drops the interaction-history terms from every signature.
  // Only used to check that the property suite notices a broken test.
  bool drop_histories = false;
};

Coloring dwl_refine(const DynamicGraph& g, double t, const DwlOptions& options, ColorTable& table);

struct Verdict {
  enum class Kind { non_isomorphic, possibly_isomorphic };
  Kind kind = Kind::possibly_isomorphic;
  // First distinguishing round, or the number of rounds run.
  std::size_t round = 0;

  bool non_isomorphic() const { return kind == Kind::non_isomorphic; }
};

// Runs k-DWL on both graphs in lock-step with one fresh shared table.
// Differing node counts show up as differing round-0 multisets.
Verdict dwl_distinguish(const DynamicGraph& a, const DynamicGraph& b, double t,
                        const DwlOptions& options);

// Refines several graphs in lock-step with one shared table and a joint
// stopping rule; the colorings are mutually comparable.
std::vector<Coloring> dwl_refine_jointly(std::span<const DynamicGraph* const> graphs, double t,
                                         const DwlOptions& options, ColorTable& table);

// --- symbolic message passing ----------------------------------------------

enum class MessageFormat {
  interval,  // (h(w), t - t') per event, the DyGNN message
  sequence,  // (h(w), interval row of {u,w}) per event, mirroring 1-DWL
};

struct SimOptions {
  bool with_mite = false;
  // Target pair the MITE rows are taken against (required when with_mite).
  NodeId target_u = 0;
  NodeId target_v = 0;
  MessageFormat format = MessageFormat::interval;
};

// DyGNN aggregation with exact (injective) AGG/UPDATE over `rounds` rounds.
Coloring dygnn_sim(const DynamicGraph& g, double t, std::size_t rounds, const SimOptions& options,
                   ColorTable& table);

enum class HopeMode { global, local };

// Node-pair refinement of HopeDGN with every learned map replaced by exact
// hashing: a pair hashes its own color with the multiset of
// (h(u,w), h(v,w), B_{u,w}, B_{v,w}) over replacing nodes w.
Coloring hopedgn_symbolic(const DynamicGraph& g, double t, std::size_t rounds, HopeMode mode,
                          ColorTable& table, bool drop_histories = false);

// Classic 1-WL on the static multigraph obtained by dropping timestamps.
Coloring static_wl1(const DynamicGraph& g, std::size_t rounds, ColorTable& table,
                    InitLabel init = InitLabel::constant);
Verdict static_wl1_distinguish(const DynamicGraph& a, const DynamicGraph& b, std::size_t max_rounds);

// --- partition utilities -----------------------------------------------------

// Relabels colors by first occurrence, giving a canonical partition encoding.
std::vector<std::uint32_t> canonical_partition(std::span<const ColorId> colors);
std::size_t class_count(std::span<const ColorId> colors);
// Equal colors under `fine` imply equal colors under `coarse`.
bool refines(std::span<const ColorId> fine, std::span<const ColorId> coarse);
bool same_partition(std::span<const ColorId> a, std::span<const ColorId> b);
// Sorted color multiset.
std::vector<ColorId> color_multiset(std::span<const ColorId> colors);

}  // namespace dwlkit
