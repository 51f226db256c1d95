#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include "dwlkit/dwl.hpp"
#include "dwlkit/encodings.hpp"
#include "dwlkit/metrics.hpp"
#include "dwlkit/param_io.hpp"
#include "dwlkit/split.hpp"
#include "dwlkit/suite.hpp"
#include "dwlkit/train.hpp"

using namespace dwlkit;
using nlohmann::json;

namespace {

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(std::stod(tok));
  return out;
}

json split_json(const SplitSpec& s) {
  return {{"total_time", s.total_time},
          {"val_start", s.val_start},
          {"test_start", s.test_start},
          {"train", {0, s.train_end}},
          {"val", {s.train_end, s.val_end}},
          {"test", {s.val_end, s.event_count}},
          {"masked", std::vector<NodeId>(s.masked.begin(), s.masked.end())},
          {"seed", s.seed}};
}

json metrics_json(const MetricsReport& m) {
  return {{"ap", m.ap}, {"auc", m.auc}, {"positives", m.positives}, {"negatives", m.negatives},
          {"setting", to_string(m.setting)}};
}

std::pair<NodeId, NodeId> parse_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--pair expects u,v");
  return {static_cast<NodeId>(std::stoul(s.substr(0, comma))), static_cast<NodeId>(std::stoul(s.substr(comma + 1)))};
}

SplitSpec make_split(const DynamicGraph& g, double mask_fraction, std::uint64_t seed) {
  SplitSpec s = chronological_split(g);
  s.seed = seed;
  return mask_fraction > 0.0 ? inductive_mask(s, g, mask_fraction, seed) : s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic Weisfeiler-Lehman tests, temporal encodings and HopeDGN-lite"};
  app.require_subcommand(1);
  std::cout << std::setprecision(17);

  std::string format = "edge_list";

  // dwl
  auto* dwl = app.add_subcommand("dwl", "Run k-DWL on one graph or distinguish two");
  int k = 1;
  double t = 0.0;
  std::size_t rounds = 0;
  std::string graph_a, graph_b;
  dwl->add_option("--k", k, "1 or 2")->check(CLI::IsMember({1, 2}));
  dwl->add_option("--t", t, "query time")->required();
  dwl->add_option("--rounds", rounds, "maximum rounds (0 = entity count)");
  dwl->add_option("--format", format, "edge_list or jodie_csv");
  dwl->add_option("graphA", graph_a)->required();
  dwl->add_option("graphB", graph_b);

  // encode mite
  auto* encode = app.add_subcommand("encode", "Temporal encodings");
  encode->require_subcommand(1);
  auto* mite = encode->add_subcommand("mite", "Raw MITE rows of every joint-neighborhood node");
  std::string pair;
  std::size_t mite_k = 32;
  std::string graph;
  mite->add_option("--pair", pair, "u,v")->required();
  mite->add_option("--t", t, "query time")->required();
  mite->add_option("--k", mite_k, "preserved timestamps per side");
  mite->add_option("--format", format);
  mite->add_option("graph", graph)->required();

  // train
  auto* tr = app.add_subcommand("train", "Train HopeDGN-lite from a key=value config");
  std::string config_path;
  tr->add_option("--config", config_path)->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate saved parameters");
  std::string params_path, section = "test";
  double mask_fraction = 0.0;
  std::uint64_t seed = 0;
  ev->add_option("--params", params_path)->required();
  ev->add_option("--graph", graph)->required();
  ev->add_option("--format", format);
  ev->add_option("--section", section, "val, test or inductive");
  ev->add_option("--mask-fraction", mask_fraction);
  ev->add_option("--seed", seed);

  // split
  auto* sp = app.add_subcommand("split", "Chronological split as JSON");
  sp->add_option("graph", graph)->required();
  sp->add_option("--format", format);
  sp->add_option("--mask-fraction", mask_fraction);
  sp->add_option("--seed", seed);

  // suite
  auto* su = app.add_subcommand("suite", "Expressiveness property suite");
  SuiteConfig suite_cfg;
  std::string out_dir;
  su->add_option("--trials", suite_cfg.trials);
  su->add_option("--seed", suite_cfg.seed);
  su->add_option("--max-nodes", suite_cfg.max_nodes);
  su->add_option("--max-events", suite_cfg.max_events);
  su->add_option("--out-dir", out_dir, "directory for counterexample edge lists");
  su->add_flag("--mutate-drop-histories", suite_cfg.drop_histories, "break 2-DWL on purpose");

  // metrics
  auto* me = app.add_subcommand("metrics", "AP and AUC of a score file");
  std::string scores_path, labels_path;
  me->add_option("--scores", scores_path)->required();
  me->add_option("--labels", labels_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dwl->parsed()) {
      const EventFormat fmt = parse_event_format(format);
      const DynamicGraph a = load_events_file(graph_a, fmt);
      DwlOptions opt;
      opt.k = k;
      if (rounds > 0) opt.max_rounds = rounds;
      if (!graph_b.empty()) {
        const DynamicGraph b = load_events_file(graph_b, fmt);
        const Verdict v = dwl_distinguish(a, b, t, opt);
        std::cout << json{{"verdict", v.non_isomorphic() ? "non_isomorphic" : "possibly_isomorphic"},
                          {"round", v.round}}.dump(2) << '\n';
      } else {
        ColorTable table;
        const Coloring c = dwl_refine(a, t, opt, table);
        std::vector<std::size_t> classes;
        for (const auto& r : c.rounds) classes.push_back(class_count(r));
        std::cout << json{{"rounds", c.rounds_run()}, {"stable", c.stable}, {"classes_per_round", classes}}.dump(2)
                  << '\n';
      }
    } else if (mite->parsed()) {
      const DynamicGraph g = load_events_file(graph, parse_event_format(format));
      const auto [u, v] = parse_pair(pair);
      if (u >= g.node_count() || v >= g.node_count()) throw std::out_of_range("pair node out of range");
      const Dat dat(g);
      std::set<NodeId> candidates;
      for (NodeId root : {u, v}) {
        for (const auto& e : historical_neighbors(g, root, t, g.events().size() + 1).entries) candidates.insert(e.neighbor);
      }
      std::cout << "w";
      for (std::size_t i = 0; i < mite_k; ++i) std::cout << ",u" << i;
      for (std::size_t i = 0; i < mite_k; ++i) std::cout << ",v" << i;
      std::cout << '\n';
      for (NodeId w : candidates) {
        std::cout << w;
        for (double x : mite_raw(dat, u, v, w, t, mite_k).values) std::cout << ',' << x;
        std::cout << '\n';
      }
    } else if (tr->parsed()) {
      const auto kv = parse_key_values_file(config_path);
      const std::set<std::string> extra{"graph", "format", "params_out", "mask_fraction", "split_seed"};
      const TrainConfig cfg = train_config_from(kv, extra);
      if (!kv.contains("graph")) throw std::invalid_argument("config needs graph=<path>");
      const DynamicGraph g =
          load_events_file(kv.at("graph"), parse_event_format(kv.contains("format") ? kv.at("format") : "edge_list"));
      const double frac = kv.contains("mask_fraction") ? std::stod(kv.at("mask_fraction")) : 0.0;
      const std::uint64_t split_seed = kv.contains("split_seed") ? std::stoull(kv.at("split_seed")) : cfg.seed;
      const SplitSpec split = make_split(g, frac, split_seed);
      TrainResult res;
      try {
        res = train(g, split, cfg);
      } catch (const TrainingDiverged& ex) {
        save_params("diverged.bin", ex.state);
        std::cerr << ex.what() << "; state written to diverged.bin\n";
        return 2;
      }
      const std::string out = kv.contains("params_out") ? kv.at("params_out") : "params.bin";
      save_params(out, res.params);
      json hist = json::array();
      for (const auto& h : res.history) {
        hist.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_ap", h.val_ap}, {"val_auc", h.val_auc}});
      }
      json report{{"params", out},
                  {"best_epoch", res.best_epoch},
                  {"initial_val_ap", res.initial_val_ap},
                  {"history", hist},
                  {"test", metrics_json(evaluate(res.params, g, split, Section::test, split.seed))}};
      if (!split.masked.empty()) {
        report["inductive_test"] = metrics_json(evaluate(res.params, g, split, Section::inductive_test, split.seed));
      }
      std::cout << report.dump(2) << '\n';
    } else if (ev->parsed()) {
      const ModelParams params = load_params(params_path);
      const DynamicGraph g = load_events_file(graph, parse_event_format(format));
      const SplitSpec split = make_split(g, mask_fraction, seed);
      std::cout << metrics_json(evaluate(params, g, split, parse_section(section), split.seed)).dump(2) << '\n';
    } else if (sp->parsed()) {
      const DynamicGraph g = load_events_file(graph, parse_event_format(format));
      std::cout << split_json(make_split(g, mask_fraction, seed)).dump(2) << '\n';
    } else if (su->parsed()) {
      const SuiteReport report = expressiveness_suite(suite_cfg);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (const auto& p : report.properties) {
          for (std::size_t i = 0; i < p.counterexamples.size(); ++i) {
            const std::string stem = out_dir + "/" + p.id + "_" + std::to_string(i);
            std::ofstream(stem + "_a.txt") << p.counterexamples[i].graph_a;
            std::ofstream(stem + "_b.txt") << p.counterexamples[i].graph_b;
          }
        }
      }
      std::cout << to_json(report).dump(2) << '\n';
      return report.passed() ? 0 : 1;
    } else if (me->parsed()) {
      const auto scores = read_numbers(scores_path);
      const auto labels = read_numbers(labels_path);
      std::cout << metrics_json(compute_metrics(scores, labels)).dump(2) << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
