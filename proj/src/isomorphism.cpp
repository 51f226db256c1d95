#include "dwlkit/isomorphism.hpp"

#include <algorithm>
#include <span>

namespace dwlkit {
namespace {

// Dense n x n table of historical sequences (timestamps < t).
struct HistoryGrid {
  std::size_t n;
  std::vector<std::vector<double>> cells;

  HistoryGrid(const DynamicGraph& g, double t) : n(g.node_count()), cells(n * n) {
    const Dat dat(g);
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        const auto seq = dat.before(i, j, t);
        cells[i * n + j].assign(seq.begin(), seq.end());
      }
    }
  }
  const std::vector<double>& at(NodeId i, NodeId j) const { return cells[i * n + j]; }
};

class Search {
 public:
  Search(const DynamicGraph& a, const DynamicGraph& b, double t)
      : ga_(a), gb_(b), ha_(a, t), hb_(b, t), phi_(a.node_count(), kUnset),
        used_(b.node_count(), false) {}

  bool pin(NodeId x, NodeId y) {
    if (x >= phi_.size() || y >= used_.size()) throw std::out_of_range("tuple node out of range");
    if (phi_[x] != kUnset) return phi_[x] == y;
    if (used_[y] || !compatible(x, y)) return false;
    phi_[x] = y;
    used_[y] = true;
    return true;
  }

  bool run() { return extend(0); }
  std::vector<NodeId> witness() const { return phi_; }

 private:
  static constexpr NodeId kUnset = static_cast<NodeId>(-1);

  // x -> y is consistent with every node mapped so far (including x itself).
  bool compatible(NodeId x, NodeId y) const {
    if (ga_.node_features().row(x) != gb_.node_features().row(y)) return false;
    if (ha_.at(x, x) != hb_.at(y, y)) return false;
    for (NodeId z = 0; z < phi_.size(); ++z) {
      if (phi_[z] == kUnset) continue;
      if (ha_.at(x, z) != hb_.at(y, phi_[z])) return false;
    }
    return true;
  }

  bool extend(NodeId x) {
    while (x < phi_.size() && phi_[x] != kUnset) ++x;
    if (x == phi_.size()) return true;
    for (NodeId y = 0; y < used_.size(); ++y) {
      if (used_[y] || !compatible(x, y)) continue;
      phi_[x] = y;
      used_[y] = true;
      if (extend(x + 1)) return true;
      phi_[x] = kUnset;
      used_[y] = false;
    }
    return false;
  }

  const DynamicGraph& ga_;
  const DynamicGraph& gb_;
  HistoryGrid ha_;
  HistoryGrid hb_;
  std::vector<NodeId> phi_;
  std::vector<bool> used_;
};

void check_bounds(const DynamicGraph& a, const DynamicGraph& b, std::size_t bound) {
  if (a.node_count() > bound || b.node_count() > bound) {
    throw std::length_error("graph exceeds brute-force oracle node bound of " + std::to_string(bound));
  }
}

}  // namespace

IsomorphismResult brute_force_isomorphic_until(const DynamicGraph& a, const DynamicGraph& b,
                                               double t, std::size_t node_bound) {
  return brute_force_tuples_isomorphic_until(a, {}, b, {}, t, node_bound);
}

IsomorphismResult brute_force_tuples_isomorphic_until(const DynamicGraph& a,
                                                      const std::vector<NodeId>& sa,
                                                      const DynamicGraph& b,
                                                      const std::vector<NodeId>& sb, double t,
                                                      std::size_t node_bound) {
  check_bounds(a, b, node_bound);
  if (sa.size() != sb.size()) throw std::invalid_argument("tuple lengths differ");
  if (a.node_count() != b.node_count()) return {};
  if (a.node_feature_dim() != b.node_feature_dim()) return {};

  Search search(a, b, t);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (!search.pin(sa[i], sb[i])) return {};
  }
  if (!search.run()) return {};
  return {true, search.witness()};
}

}  // namespace dwlkit
