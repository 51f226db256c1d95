#include "dwlkit/dwl.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <unordered_map>

namespace dwlkit {
namespace {

// Signature domains. Every signature starts with one so that colors from
// different stages can never alias.
enum Domain : std::uint64_t {
  kConstInit = 1,
  kNodeInit,
  kPairInit,
  kNodeStep,
  kPairStep,
  kSimInit,
  kSimStep,
  kHopeInit,
  kHopeStep,
  kStaticStep,
  kTimestampRow,
  kIntervalRow,
};

std::vector<double> intervals_before(const Dat& dat, NodeId a, NodeId b, double t) {
  const auto seq = dat.before(a, b, t);
  std::vector<double> out(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) out[k] = t - seq[k];
  return out;
}

std::span<const double> row_of(const Matrix& m, Eigen::Index r, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) buf[static_cast<std::size_t>(c)] = m(r, c);
  return buf;
}

std::vector<ColorId> initial_node_colors(const DynamicGraph& g, InitLabel init, ColorTable& table) {
  std::vector<ColorId> out(g.node_count());
  std::vector<double> buf;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    Signature sig;
    if (init == InitLabel::constant) {
      sig.tag(kConstInit);
    } else {
      sig.tag(kNodeInit).reals(row_of(g.node_features(), u, buf));
    }
    out[u] = table.color(sig);
  }
  return out;
}

class Refiner {
 public:
  virtual ~Refiner() = default;
  virtual std::vector<ColorId> initial(ColorTable& table) = 0;
  virtual std::vector<ColorId> step(const std::vector<ColorId>& prev, ColorTable& table) = 0;
  virtual std::size_t entity_count() const = 0;
};

// 1-DWL: a node hashes its color with {{(c(w), A^{<t}_{u,w})}} over N(u,t).
class NodeRefiner final : public Refiner {
 public:
  NodeRefiner(const DynamicGraph& g, double t, const DwlOptions& opt, ColorTable& table)
      : g_(g), opt_(opt), neighbors_(g.node_count()) {
    const Dat dat(g);
    for (NodeId u = 0; u < g.node_count(); ++u) {
      auto& list = neighbors_[u];
      for (const Incidence& inc : g.incidences(u)) {
        if (!(inc.time < t)) break;
        list.push_back({inc.neighbor, table.history(kTimestampRow, dat.before(u, inc.neighbor, t))});
      }
      if (opt.multiplicity == NeighborMultiplicity::per_neighbor) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
      }
    }
  }

  std::vector<ColorId> initial(ColorTable& table) override { return initial_node_colors(g_, opt_.init, table); }

  std::vector<ColorId> step(const std::vector<ColorId>& prev, ColorTable& table) override {
    std::vector<ColorId> out(prev.size());
    for (NodeId u = 0; u < g_.node_count(); ++u) {
      std::vector<std::vector<std::uint64_t>> items;
      items.reserve(neighbors_[u].size());
      for (const auto& [w, hist] : neighbors_[u]) {
        if (opt_.drop_histories) {
          items.push_back({prev[w]});
        } else {
          items.push_back({prev[w], hist});
        }
      }
      Signature sig;
      sig.tag(kNodeStep).word(prev[u]).multiset(std::move(items));
      out[u] = table.color(sig);
    }
    return out;
  }

  std::size_t entity_count() const override { return g_.node_count(); }

 private:
  const DynamicGraph& g_;
  DwlOptions opt_;
  std::vector<std::vector<std::pair<NodeId, ColorId>>> neighbors_;
};

// 2-DWL: (u,v) hashes its color with {{(c(w,v), c(u,w), A_{w,u}, A_{w,v}) | w in V}}.
class PairRefiner final : public Refiner {
 public:
  PairRefiner(const DynamicGraph& g, double t, const DwlOptions& opt, ColorTable& table)
      : g_(g), opt_(opt), n_(g.node_count()), hist_(n_ * n_) {
    const Dat dat(g);
    for (NodeId a = 0; a < n_; ++a) {
      for (NodeId b = 0; b < n_; ++b) hist_[a * n_ + b] = table.history(kTimestampRow, dat.before(a, b, t));
    }
  }

  std::vector<ColorId> initial(ColorTable& table) override {
    std::vector<ColorId> out(n_ * n_);
    std::vector<double> bu;
    std::vector<double> bv;
    for (NodeId u = 0; u < n_; ++u) {
      for (NodeId v = 0; v < n_; ++v) {
        Signature sig;
        if (opt_.init == InitLabel::constant) {
          sig.tag(kConstInit);
        } else {
          sig.tag(kPairInit)
              .reals(row_of(g_.node_features(), u, bu))
              .reals(row_of(g_.node_features(), v, bv));
        }
        out[u * n_ + v] = table.color(sig);
      }
    }
    return out;
  }

  std::vector<ColorId> step(const std::vector<ColorId>& prev, ColorTable& table) override {
    std::vector<ColorId> out(prev.size());
    for (NodeId u = 0; u < n_; ++u) {
      for (NodeId v = 0; v < n_; ++v) {
        std::vector<std::vector<std::uint64_t>> items;
        items.reserve(n_);
        for (NodeId w = 0; w < n_; ++w) {
          if (opt_.drop_histories) {
            items.push_back({prev[w * n_ + v], prev[u * n_ + w]});
          } else {
            items.push_back({prev[w * n_ + v], prev[u * n_ + w], hist_[w * n_ + u], hist_[w * n_ + v]});
          }
        }
        Signature sig;
        sig.tag(kPairStep).word(prev[u * n_ + v]).multiset(std::move(items));
        out[u * n_ + v] = table.color(sig);
      }
    }
    return out;
  }

  std::size_t entity_count() const override { return n_ * n_; }

 private:
  const DynamicGraph& g_;
  DwlOptions opt_;
  std::size_t n_;
  std::vector<ColorId> hist_;
};

// 1-WL on the timestamp-free multigraph.
class StaticRefiner final : public Refiner {
 public:
  StaticRefiner(const DynamicGraph& g, InitLabel init) : g_(g), init_(init) {}

  std::vector<ColorId> initial(ColorTable& table) override { return initial_node_colors(g_, init_, table); }

  std::vector<ColorId> step(const std::vector<ColorId>& prev, ColorTable& table) override {
    std::vector<ColorId> out(prev.size());
    for (NodeId u = 0; u < g_.node_count(); ++u) {
      std::vector<std::vector<std::uint64_t>> items;
      for (const Incidence& inc : g_.incidences(u)) items.push_back({prev[inc.neighbor]});
      Signature sig;
      sig.tag(kStaticStep).word(prev[u]).multiset(std::move(items));
      out[u] = table.color(sig);
    }
    return out;
  }

  std::size_t entity_count() const override { return g_.node_count(); }

 private:
  const DynamicGraph& g_;
  InitLabel init_;
};

std::unique_ptr<Refiner> make_refiner(const DynamicGraph& g, double t, const DwlOptions& opt,
                                      ColorTable& table) {
  if (opt.k == 1) return std::make_unique<NodeRefiner>(g, t, opt, table);
  if (opt.k == 2) return std::make_unique<PairRefiner>(g, t, opt, table);
  throw std::invalid_argument("only k = 1 and k = 2 DWL tests are supported");
}

std::size_t joint_class_count(const std::vector<std::vector<ColorId>>& current) {
  std::vector<ColorId> all;
  for (const auto& c : current) all.insert(all.end(), c.begin(), c.end());
  return class_count(all);
}

std::size_t default_rounds(const std::vector<std::unique_ptr<Refiner>>& refiners) {
  std::size_t r = 0;
  for (const auto& ref : refiners) r = std::max(r, ref->entity_count());
  return r;
}

struct JointRun {
  std::vector<std::vector<std::vector<ColorId>>> rounds;  // [graph][round][entity]
  bool stable = false;
  std::optional<std::size_t> first_difference;
};

// Lock-step refinement. With `compare`, stops at the first round whose color
// multisets differ between graphs.
JointRun run_jointly(std::vector<std::unique_ptr<Refiner>>& refiners, std::size_t max_rounds,
                     bool stop_when_stable, bool compare, ColorTable& table) {
  JointRun run;
  run.rounds.resize(refiners.size());
  std::vector<std::vector<ColorId>> current(refiners.size());
  for (std::size_t i = 0; i < refiners.size(); ++i) {
    current[i] = refiners[i]->initial(table);
    run.rounds[i].push_back(current[i]);
  }
  auto differs = [&](std::size_t round) {
    if (!compare) return false;
    for (std::size_t i = 1; i < current.size(); ++i) {
      if (color_multiset(current[i]) != color_multiset(current[0])) {
        run.first_difference = round;
        return true;
      }
    }
    return false;
  };
  if (differs(0)) return run;

  std::size_t classes = joint_class_count(current);
  for (std::size_t r = 1; r <= max_rounds; ++r) {
    for (std::size_t i = 0; i < refiners.size(); ++i) {
      current[i] = refiners[i]->step(current[i], table);
      run.rounds[i].push_back(current[i]);
    }
    if (differs(r)) return run;
    const std::size_t next = joint_class_count(current);
    // Each new color hashes the previous one, so an unchanged class count
    // means an unchanged partition.
    if (stop_when_stable && next == classes) {
      run.stable = true;
      break;
    }
    classes = next;
  }
  return run;
}

Coloring to_coloring(EntityKind kind, const DynamicGraph& g, double t,
                     std::vector<std::vector<ColorId>> rounds, bool stable) {
  Coloring c;
  c.kind = kind;
  c.node_count = g.node_count();
  c.t = t;
  c.rounds = std::move(rounds);
  c.stable = stable;
  return c;
}

}  // namespace

std::vector<Coloring> dwl_refine_jointly(std::span<const DynamicGraph* const> graphs, double t,
                                         const DwlOptions& options, ColorTable& table) {
  std::vector<std::unique_ptr<Refiner>> refiners;
  for (const DynamicGraph* g : graphs) refiners.push_back(make_refiner(*g, t, options, table));
  const std::size_t max_rounds = options.max_rounds.value_or(default_rounds(refiners));
  JointRun run = run_jointly(refiners, max_rounds, options.stop_when_stable, false, table);
  std::vector<Coloring> out;
  const EntityKind kind = options.k == 1 ? EntityKind::node : EntityKind::pair;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    out.push_back(to_coloring(kind, *graphs[i], t, std::move(run.rounds[i]), run.stable));
  }
  return out;
}

Coloring dwl_refine(const DynamicGraph& g, double t, const DwlOptions& options, ColorTable& table) {
  const DynamicGraph* graphs[] = {&g};
  return std::move(dwl_refine_jointly(graphs, t, options, table).front());
}

Verdict dwl_distinguish(const DynamicGraph& a, const DynamicGraph& b, double t,
                        const DwlOptions& options) {
  ColorTable table;
  std::vector<std::unique_ptr<Refiner>> refiners;
  refiners.push_back(make_refiner(a, t, options, table));
  refiners.push_back(make_refiner(b, t, options, table));
  const std::size_t max_rounds = options.max_rounds.value_or(default_rounds(refiners));
  const JointRun run = run_jointly(refiners, max_rounds, options.stop_when_stable, true, table);
  if (run.first_difference) return {Verdict::Kind::non_isomorphic, *run.first_difference};
  return {Verdict::Kind::possibly_isomorphic, run.rounds.front().size() - 1};
}

Coloring dygnn_sim(const DynamicGraph& g, double t, std::size_t rounds, const SimOptions& options,
                   ColorTable& table) {
  const std::size_t n = g.node_count();
  const Dat dat(g);
  if (options.with_mite && (options.target_u >= n || options.target_v >= n)) {
    throw std::out_of_range("MITE target pair out of range");
  }

  // Per node: (neighbor, message payload) for every event before t.
  std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> messages(n);
  for (NodeId u = 0; u < n; ++u) {
    for (const Incidence& inc : g.incidences(u)) {
      if (!(inc.time < t)) break;
      std::uint64_t payload = 0;
      if (options.format == MessageFormat::interval) {
        Signature s;
        s.real(t - inc.time);
        payload = s.words().front();
      } else {
        payload = table.history(kIntervalRow, intervals_before(dat, u, inc.neighbor, t));
      }
      messages[u].push_back({inc.neighbor, payload});
    }
  }

  std::vector<std::vector<ColorId>> history;
  std::vector<ColorId> current(n);
  std::vector<double> buf;
  for (NodeId w = 0; w < n; ++w) {
    Signature sig;
    sig.tag(kSimInit).word(options.with_mite ? 1 : 0).reals(row_of(g.node_features(), w, buf));
    if (options.with_mite) {
      sig.reals(intervals_before(dat, w, options.target_u, t))
          .reals(intervals_before(dat, w, options.target_v, t));
    }
    current[w] = table.color(sig);
  }
  history.push_back(current);

  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<ColorId> next(n);
    for (NodeId u = 0; u < n; ++u) {
      std::vector<std::vector<std::uint64_t>> items;
      items.reserve(messages[u].size());
      for (const auto& [w, payload] : messages[u]) items.push_back({current[w], payload});
      Signature sig;
      sig.tag(kSimStep).word(static_cast<std::uint64_t>(options.format)).word(current[u]).multiset(std::move(items));
      next[u] = table.color(sig);
    }
    current = std::move(next);
    history.push_back(current);
  }
  return to_coloring(EntityKind::node, g, t, std::move(history), false);
}

Coloring hopedgn_symbolic(const DynamicGraph& g, double t, std::size_t rounds, HopeMode mode,
                          ColorTable& table, bool drop_histories) {
  const std::size_t n = g.node_count();
  const Dat dat(g);
  std::vector<ColorId> tit(n * n);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) tit[a * n + b] = table.history(kIntervalRow, intervals_before(dat, a, b, t));
  }

  // Replacing nodes per pair; the local variant walks N(u,t) then N(v,t)
  // with multiplicity.
  std::vector<std::vector<NodeId>> replacing(n * n);
  if (mode == HopeMode::global) {
    std::vector<NodeId> all(n);
    for (NodeId w = 0; w < n; ++w) all[w] = w;
    for (auto& r : replacing) r = all;
  } else {
    std::vector<std::vector<NodeId>> nbrs(n);
    for (NodeId u = 0; u < n; ++u) {
      for (const Incidence& inc : g.incidences(u)) {
        if (!(inc.time < t)) break;
        nbrs[u].push_back(inc.neighbor);
      }
    }
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = 0; v < n; ++v) {
        auto& r = replacing[u * n + v];
        r = nbrs[u];
        r.insert(r.end(), nbrs[v].begin(), nbrs[v].end());
      }
    }
  }

  std::vector<std::vector<ColorId>> history;
  std::vector<ColorId> current(n * n);
  std::vector<double> bu;
  std::vector<double> bv;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      Signature sig;
      sig.tag(kHopeInit).reals(row_of(g.node_features(), u, bu)).reals(row_of(g.node_features(), v, bv));
      current[u * n + v] = table.color(sig);
    }
  }
  history.push_back(current);

  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<ColorId> next(n * n);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = 0; v < n; ++v) {
        std::vector<std::vector<std::uint64_t>> items;
        for (NodeId w : replacing[u * n + v]) {
          if (drop_histories) {
            items.push_back({current[u * n + w], current[v * n + w]});
          } else {
            items.push_back({current[u * n + w], current[v * n + w], tit[u * n + w], tit[v * n + w]});
          }
        }
        Signature sig;
        sig.tag(kHopeStep).word(static_cast<std::uint64_t>(mode)).word(current[u * n + v]).multiset(std::move(items));
        next[u * n + v] = table.color(sig);
      }
    }
    current = std::move(next);
    history.push_back(current);
  }
  return to_coloring(EntityKind::pair, g, t, std::move(history), false);
}

Coloring static_wl1(const DynamicGraph& g, std::size_t rounds, ColorTable& table, InitLabel init) {
  std::vector<std::unique_ptr<Refiner>> refiners;
  refiners.push_back(std::make_unique<StaticRefiner>(g, init));
  JointRun run = run_jointly(refiners, rounds, true, false, table);
  return to_coloring(EntityKind::node, g, 0.0, std::move(run.rounds.front()), run.stable);
}

Verdict static_wl1_distinguish(const DynamicGraph& a, const DynamicGraph& b, std::size_t max_rounds) {
  ColorTable table;
  std::vector<std::unique_ptr<Refiner>> refiners;
  refiners.push_back(std::make_unique<StaticRefiner>(a, InitLabel::constant));
  refiners.push_back(std::make_unique<StaticRefiner>(b, InitLabel::constant));
  const JointRun run = run_jointly(refiners, max_rounds, true, true, table);
  if (run.first_difference) return {Verdict::Kind::non_isomorphic, *run.first_difference};
  return {Verdict::Kind::possibly_isomorphic, run.rounds.front().size() - 1};
}

std::vector<std::uint32_t> canonical_partition(std::span<const ColorId> colors) {
  std::unordered_map<ColorId, std::uint32_t> relabel;
  std::vector<std::uint32_t> out(colors.size());
  for (std::size_t i = 0; i < colors.size(); ++i) {
    const auto [it, inserted] = relabel.try_emplace(colors[i], static_cast<std::uint32_t>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

std::size_t class_count(std::span<const ColorId> colors) {
  std::vector<ColorId> sorted(colors.begin(), colors.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

bool refines(std::span<const ColorId> fine, std::span<const ColorId> coarse) {
  if (fine.size() != coarse.size()) throw std::invalid_argument("colorings differ in size");
  std::unordered_map<ColorId, ColorId> image;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const auto [it, inserted] = image.try_emplace(fine[i], coarse[i]);
    if (!inserted && it->second != coarse[i]) return false;
  }
  return true;
}

bool same_partition(std::span<const ColorId> a, std::span<const ColorId> b) {
  return canonical_partition(a) == canonical_partition(b);
}

std::vector<ColorId> color_multiset(std::span<const ColorId> colors) {
  std::vector<ColorId> sorted(colors.begin(), colors.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace dwlkit
