#include "dwlkit/suite.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "dwlkit/dwl.hpp"
#include "dwlkit/generators.hpp"
#include "dwlkit/isomorphism.hpp"

namespace dwlkit {
namespace {

constexpr std::size_t kKeptCounterexamples = 3;

void record(PropertyResult& p, bool ok, const DynamicGraph& a, const DynamicGraph& b, double t,
            const std::string& detail) {
  ++p.checked;
  if (ok) return;
  p.passed = false;
  ++p.violations;
  if (p.counterexamples.size() < kKeptCounterexamples) {
    p.counterexamples.push_back({edge_list_text(a), edge_list_text(b), t, detail});
  }
}

std::vector<ColorId> joined(const Coloring& a, const Coloring& b, std::size_t round) {
  std::vector<ColorId> out = a.rounds.at(round);
  const auto& rb = b.rounds.at(round);
  out.insert(out.end(), rb.begin(), rb.end());
  return out;
}

// Lock-step refinement without early stopping, so rounds line up.
std::vector<Coloring> fixed_rounds(const DynamicGraph& a, const DynamicGraph& b, double t, int k,
                                   std::size_t rounds, bool drop_histories, ColorTable& table) {
  DwlOptions opt;
  opt.k = k;
  opt.max_rounds = rounds;
  opt.stop_when_stable = false;
  opt.drop_histories = drop_histories;
  const DynamicGraph* graphs[] = {&a, &b};
  return dwl_refine_jointly(graphs, t, opt, table);
}

// (h(u), h(v)) per round under a sim coloring.
std::vector<std::pair<ColorId, ColorId>> pair_trace(const Coloring& c, NodeId u, NodeId v) {
  std::vector<std::pair<ColorId, ColorId>> out;
  for (const auto& r : c.rounds) out.emplace_back(r[u], r[v]);
  return out;
}

struct MiteWitness {
  bool found = false;
  DynamicGraph a, b;
  NodeId ua = 0, va = 0, ub = 0, vb = 0;
  double t = 0.0;
  std::size_t tried = 0;
};

// Target pairs whose vanilla sim traces coincide in every round while the
// MITE-augmented traces differ and the oracle rules out pair isomorphism.
MiteWitness search_mite_counterexample(const SuiteConfig& cfg, std::mt19937_64& rng) {
  MiteWitness w;
  for (; w.tried < cfg.search_budget && !w.found; ++w.tried) {
    const DynamicGraph a = small_random_graph(rng, cfg.max_nodes, cfg.max_events, cfg.time_grid);
    const DynamicGraph b = permute_graph(a, random_permutation(a.node_count(), rng));
    const double t = static_cast<double>(cfg.time_grid + 1);
    const std::size_t n = a.node_count();
    const std::size_t rounds = n;
    ColorTable table;
    const Coloring va = dygnn_sim(a, t, rounds, {}, table);
    const Coloring vb = dygnn_sim(b, t, rounds, {}, table);
    for (NodeId u1 = 0; u1 < n && !w.found; ++u1) {
      for (NodeId v1 = 0; v1 < n && !w.found; ++v1) {
        if (u1 == v1) continue;
        for (NodeId u2 = 0; u2 < n && !w.found; ++u2) {
          for (NodeId v2 = 0; v2 < n && !w.found; ++v2) {
            if (u2 == v2 || pair_trace(va, u1, v1) != pair_trace(vb, u2, v2)) continue;
            SimOptions ma{true, u1, v1, MessageFormat::interval};
            SimOptions mb{true, u2, v2, MessageFormat::interval};
            const Coloring ca = dygnn_sim(a, t, rounds, ma, table);
            const Coloring cb = dygnn_sim(b, t, rounds, mb, table);
            if (pair_trace(ca, u1, v1).back() == pair_trace(cb, u2, v2).back()) continue;
            if (brute_force_tuples_isomorphic_until(a, {u1, v1}, b, {u2, v2}, t).isomorphic) continue;
            w = {true, a, b, u1, v1, u2, v2, t, w.tried};
          }
        }
      }
    }
  }
  return w;
}

PropertyResult named(std::string id, std::string name) {
  PropertyResult p;
  p.id = std::move(id);
  p.name = std::move(name);
  return p;
}

}  // namespace

bool SuiteReport::passed() const {
  for (const auto& p : properties) {
    if (!p.passed) return false;
  }
  return true;
}

const PropertyResult& SuiteReport::property(const std::string& id) const {
  for (const auto& p : properties) {
    if (p.id == id) return p;
  }
  throw std::out_of_range("no property " + id);
}

std::string edge_list_text(const DynamicGraph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

SuiteReport expressiveness_suite(const SuiteConfig& cfg) {
  if (cfg.max_nodes > kDefaultOracleNodeBound) throw std::invalid_argument("suite sizes exceed the oracle bound");
  SuiteReport report;
  report.config = cfg;
  PropertyResult a = named("a", "1-DWL refutations are 2-DWL refutations");
  PropertyResult b = named("b", "no DWL refutation of oracle-isomorphic pairs");
  PropertyResult c = named("c", "1-DWL partition refines the DyGNN simulator partition");
  PropertyResult d = named("d", "global symbolic HopeDGN partition equals 2-DWL partition");
  PropertyResult e = named("e", "six-node construction separates 1-DWL from 2-DWL and MITE");
  PropertyResult f = named("f", "searched MITE counterexample");

  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution relabel(1.0 / 3.0);
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const DynamicGraph ga = small_random_graph(rng, cfg.max_nodes, cfg.max_events, cfg.time_grid);
    const DynamicGraph gb = relabel(rng) ? permute_graph(ga, random_permutation(ga.node_count(), rng))
                                         : small_random_graph(rng, cfg.max_nodes, cfg.max_events, cfg.time_grid);
    std::uniform_int_distribution<std::size_t> tick(1, cfg.time_grid + 1);
    const double t = static_cast<double>(tick(rng));

    DwlOptions k1;
    DwlOptions k2;
    k2.k = 2;
    const Verdict v1 = dwl_distinguish(ga, gb, t, k1);
    const Verdict v2 = dwl_distinguish(ga, gb, t, k2);
    record(a, !v1.non_isomorphic() || v2.non_isomorphic(), ga, gb, t, "1-DWL refutes, 2-DWL does not");

    if (ga.node_count() == gb.node_count()) {
      const bool iso = brute_force_isomorphic_until(ga, gb, t).isomorphic;
      record(b, !iso || (!v1.non_isomorphic() && !v2.non_isomorphic()), ga, gb, t,
             "oracle isomorphic but a DWL test refuted");
    }

    const std::size_t node_rounds = std::max(ga.node_count(), gb.node_count());
    {
      ColorTable table;
      const auto dwl = fixed_rounds(ga, gb, t, 1, node_rounds, false, table);
      for (MessageFormat fmt : {MessageFormat::interval, MessageFormat::sequence}) {
        SimOptions so;
        so.format = fmt;
        const Coloring sa = dygnn_sim(ga, t, node_rounds, so, table);
        const Coloring sb = dygnn_sim(gb, t, node_rounds, so, table);
        bool ok = true;
        std::size_t bad_round = 0;
        for (std::size_t r = 0; r <= node_rounds && ok; ++r) {
          ok = refines(joined(dwl[0], dwl[1], r), joined(sa, sb, r));
          bad_round = r;
        }
        record(c, ok, ga, gb, t,
               std::string(fmt == MessageFormat::interval ? "interval" : "sequence") +
                   " format, round " + std::to_string(bad_round));
      }
    }
    {
      const std::size_t pair_rounds = node_rounds * node_rounds;
      ColorTable table;
      const auto dwl = fixed_rounds(ga, gb, t, 2, pair_rounds, cfg.drop_histories, table);
      const Coloring ha = hopedgn_symbolic(ga, t, pair_rounds, HopeMode::global, table);
      const Coloring hb = hopedgn_symbolic(gb, t, pair_rounds, HopeMode::global, table);
      bool ok = true;
      std::size_t bad_round = 0;
      for (std::size_t r = 0; r <= pair_rounds && ok; ++r) {
        ok = same_partition(joined(dwl[0], dwl[1], r), joined(ha, hb, r));
        bad_round = r;
      }
      record(d, ok, ga, gb, t, "partitions differ at round " + std::to_string(bad_round));
    }
  }

  {
    using namespace six_node;
    const DynamicGraph g = six_node_graph();
    const std::size_t rounds = g.node_count();
    ColorTable table;
    DwlOptions k1;
    k1.max_rounds = rounds;
    k1.stop_when_stable = false;
    const Coloring one = dwl_refine(g, t4, k1, table);
    bool cd_equal = true;
    for (std::size_t r = 0; r <= one.rounds_run(); ++r) cd_equal = cd_equal && one.node(C, r) == one.node(D, r);
    record(e, cd_equal, g, g, t4, "1-DWL separates C and D");

    DwlOptions k2;
    k2.k = 2;
    const Coloring two = dwl_refine(g, t4, k2, table);
    record(e, two.rounds_run() >= 1 && two.pair(A, C, 1) != two.pair(A, D, 1), g, g, t4,
           "2-DWL does not separate (A,C) and (A,D) at round 1");
    record(e, !brute_force_tuples_isomorphic_until(g, {A, C}, g, {A, D}, t4).isomorphic, g, g, t4,
           "oracle finds (A,C) and (A,D) isomorphic");

    const Coloring vanilla = dygnn_sim(g, t4, rounds, {}, table);
    record(e, pair_trace(vanilla, A, C) == pair_trace(vanilla, A, D), g, g, t4,
           "vanilla simulator separates (A,C) and (A,D)");
    const Coloring mite_ac = dygnn_sim(g, t4, rounds, {true, A, C, MessageFormat::interval}, table);
    const Coloring mite_ad = dygnn_sim(g, t4, rounds, {true, A, D, MessageFormat::interval}, table);
    record(e, pair_trace(mite_ac, A, C).back() != pair_trace(mite_ad, A, D).back(), g, g, t4,
           "MITE simulator does not separate (A,C) and (A,D)");
  }

  {
    const MiteWitness w = search_mite_counterexample(cfg, rng);
    f.checked = w.tried;
    f.passed = w.found;
    if (w.found) {
      f.counterexamples.push_back({edge_list_text(w.a), edge_list_text(w.b), w.t,
                                   "pairs (" + std::to_string(w.ua) + "," + std::to_string(w.va) + ") and (" +
                                       std::to_string(w.ub) + "," + std::to_string(w.vb) + ")"});
    } else {
      f.violations = 1;
    }
  }

  report.properties = {a, b, c, d, e, f};
  return report;
}

nlohmann::json to_json(const SuiteReport& r) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& p : r.properties) {
    nlohmann::json ces = nlohmann::json::array();
    for (const auto& ce : p.counterexamples) {
      ces.push_back({{"graph_a", ce.graph_a}, {"graph_b", ce.graph_b}, {"t", ce.t}, {"detail", ce.detail}});
    }
    props.push_back({{"id", p.id},
                     {"name", p.name},
                     {"passed", p.passed},
                     {"checked", p.checked},
                     {"violations", p.violations},
                     {"counterexamples", ces}});
  }
  const auto& c = r.config;
  return {{"passed", r.passed()},
          {"config",
           {{"trials", c.trials},
            {"max_nodes", c.max_nodes},
            {"max_events", c.max_events},
            {"time_grid", c.time_grid},
            {"seed", c.seed},
            {"search_budget", c.search_budget},
            {"drop_histories", c.drop_histories}}},
          {"properties", props}};
}

}  // namespace dwlkit
