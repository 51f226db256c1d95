#include "dwlkit/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

namespace dwlkit {
namespace {

constexpr std::uint64_t kSectionSalt = 0x9e3779b97f4a7c15ULL;

NodeId random_other(NodeId u, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 2));
  const NodeId v = pick(rng);
  return v >= u ? v + 1 : v;
}

EncodingBundle encode(const DynamicGraph& g, const Dat& dat, const ModelConfig& mc, const TimeEncoding& enc,
                      NodeId u, NodeId v, double t) {
  return build_encoding_bundle(g, dat, u, v, t, mc.neighbor_limit, mc.mite_k, enc);
}

ModelConfig with_graph_dims(ModelConfig mc, const DynamicGraph& g) {
  mc.node_dim = g.node_feature_dim();
  mc.edge_dim = g.edge_feature_dim();
  return mc;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

std::vector<Query> evaluation_queries(const SplitSpec& split, const DynamicGraph& g, Section section,
                                      std::uint64_t seed) {
  const auto idx = section_events(split, g, section);
  if (idx.empty()) throw std::invalid_argument("evaluation section is empty");
  if (g.node_count() < 2) throw std::invalid_argument("negative sampling needs two nodes");
  std::mt19937_64 rng(seed ^ (kSectionSalt * (static_cast<std::uint64_t>(section) + 1)));
  std::vector<Query> out;
  out.reserve(2 * idx.size());
  for (std::size_t i : idx) {
    const Event& e = g.events()[i];
    out.push_back({e.src, e.dst, e.time, 1.0});
    out.push_back({e.src, random_other(e.src, g.node_count(), rng), e.time, 0.0});
  }
  return out;
}

std::vector<double> score_queries(const ModelParams& params, const DynamicGraph& g, const Dat& dat,
                                  const std::vector<Query>& queries) {
  const TimeEncoding enc = TimeEncoding::decade_grid(params.config.time_dim);
  std::vector<double> scores;
  scores.reserve(queries.size());
  for (const Query& q : queries) scores.push_back(forward(params, encode(g, dat, params.config, enc, q.u, q.v, q.t)).score);
  return scores;
}

MetricsReport evaluate(const ModelParams& params, const DynamicGraph& g, const SplitSpec& split, Section section,
                       std::uint64_t seed) {
  const auto queries = evaluation_queries(split, g, section, seed);
  const Dat dat(g);
  const auto scores = score_queries(params, g, dat, queries);
  std::vector<double> labels;
  labels.reserve(queries.size());
  for (const Query& q : queries) labels.push_back(q.label);
  return compute_metrics(scores, labels, section == Section::inductive_test ? Setting::inductive : Setting::transductive);
}

TrainResult train(const DynamicGraph& g, const SplitSpec& split, const TrainConfig& config) {
  TrainConfig cfg = config;
  cfg.model = with_graph_dims(cfg.model, g);
  cfg.validate();
  TrainResult result;
  result.params = ModelParams::init(cfg.model, cfg.seed);
  if (cfg.epochs == 0) return result;

  const DynamicGraph train_g = training_graph(split, g);
  const Dat train_dat(train_g);
  const Dat full_dat(g);
  const TimeEncoding enc = TimeEncoding::decade_grid(cfg.model.time_dim);

  std::vector<Example> positives;
  for (const Event& e : train_g.events()) {
    positives.push_back({encode(train_g, train_dat, cfg.model, enc, e.src, e.dst, e.time), 1.0});
  }
  if (positives.empty()) throw std::invalid_argument("training section is empty");

  const auto val_queries = evaluation_queries(split, g, Section::val, split.seed);
  std::vector<double> val_labels;
  for (const Query& q : val_queries) val_labels.push_back(q.label);
  const auto val_metrics = [&](const ModelParams& p) {
    return compute_metrics(score_queries(p, g, full_dat, val_queries), val_labels);
  };

  ModelParams params = result.params;
  double best_ap = val_metrics(params).ap;
  result.initial_val_ap = best_ap;
  Adam adam(params, cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed);
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
      std::vector<Example> batch;
      batch.reserve(2 * (end - start));
      for (std::size_t i = start; i < end; ++i) {
        const EncodingBundle& pos = positives[i].bundle;
        batch.push_back(positives[i]);
        const NodeId neg = random_other(pos.u, g.node_count(), rng);
        batch.push_back({encode(train_g, train_dat, cfg.model, enc, pos.u, neg, pos.t), 0.0});
      }
      LossAndGrad lg;
      try {
        lg = loss_and_grad(params, batch);
      } catch (const NonFiniteActivation& ex) {
        throw TrainingDiverged(epoch, batches, ex.what(), params);
      }
      if (!std::isfinite(lg.loss)) throw TrainingDiverged(epoch, batches, "non-finite loss", params);
      adam.step(params, lg.grad);
      loss_sum += lg.loss;
      ++batches;
    }
    const MetricsReport m = val_metrics(params);
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches), m.ap, m.auc});
    if (m.ap > best_ap) {
      best_ap = m.ap;
      result.params = params;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return result;
}

double time_training_batch(const DynamicGraph& g, const SplitSpec& split, const TrainConfig& config,
                           std::size_t repeats) {
  TrainConfig cfg = config;
  cfg.model = with_graph_dims(cfg.model, g);
  cfg.validate();
  if (repeats == 0) throw std::invalid_argument("repeats must be positive");
  const DynamicGraph train_g = training_graph(split, g);
  const Dat dat(train_g);
  const TimeEncoding enc = TimeEncoding::decade_grid(cfg.model.time_dim);
  std::mt19937_64 rng(cfg.seed);
  const auto events = train_g.events();
  if (events.empty()) throw std::invalid_argument("training section is empty");
  // latest events have the fullest neighborhoods
  const std::size_t take = std::min(cfg.batch_size, events.size());
  std::vector<Example> batch;
  for (std::size_t i = events.size() - take; i < events.size(); ++i) {
    const Event& e = events[i];
    batch.push_back({encode(train_g, dat, cfg.model, enc, e.src, e.dst, e.time), 1.0});
    batch.push_back({encode(train_g, dat, cfg.model, enc, e.src, random_other(e.src, g.node_count(), rng), e.time), 0.0});
  }
  ModelParams params = ModelParams::init(cfg.model, cfg.seed);
  Adam adam(params, cfg.learning_rate);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < repeats; ++r) adam.step(params, loss_and_grad(params, batch).grad);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  return dt.count() / static_cast<double>(repeats);
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> parse_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_key_values(in);
}

TrainConfig train_config_from(const std::map<std::string, std::string>& kv, const std::set<std::string>& passthrough) {
  TrainConfig c;
  const auto size = [](const std::string& k, const std::string& v) {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size() || v.starts_with('-')) throw std::invalid_argument("bad integer for " + k + ": " + v);
    return static_cast<std::size_t>(x);
  };
  for (const auto& [k, v] : kv) {
    if (k == "learning_rate" || k == "lr") c.learning_rate = std::stod(v);
    else if (k == "batch_size") c.batch_size = size(k, v);
    else if (k == "epochs") c.epochs = size(k, v);
    else if (k == "patience") c.patience = size(k, v);
    else if (k == "seed") c.seed = size(k, v);
    else if (k == "neighbor_limit") c.model.neighbor_limit = size(k, v);
    else if (k == "patch_size") c.model.patch_size = size(k, v);
    else if (k == "time_dim") c.model.time_dim = size(k, v);
    else if (k == "mite_k") c.model.mite_k = size(k, v);
    else if (k == "mite_dim") c.model.mite_dim = size(k, v);
    else if (k == "align_dim") c.model.align_dim = size(k, v);
    else if (k == "layers") c.model.layers = size(k, v);
    else if (k == "heads") c.model.heads = size(k, v);
    else if (k == "ffn_dim") c.model.ffn_dim = size(k, v);
    else if (k == "out_dim") c.model.out_dim = size(k, v);
    else if (k == "use_mite") {
      if (v != "true" && v != "false" && v != "1" && v != "0") throw std::invalid_argument("use_mite must be a boolean");
      c.model.use_mite = v == "true" || v == "1";
    } else if (!passthrough.contains(k)) {
      throw std::invalid_argument("unknown config key: " + k);
    }
  }
  return c;
}

}  // namespace dwlkit
