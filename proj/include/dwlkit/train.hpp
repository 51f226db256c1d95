#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwlkit/metrics.hpp"
#include "dwlkit/model.hpp"
#include "dwlkit/split.hpp"

namespace dwlkit {

struct TrainConfig {
  ModelConfig model;  // neighbor limit and patch size live here
  double learning_rate = 1e-4;
  std::size_t batch_size = 200;
  std::size_t epochs = 50;
  std::size_t patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_ap = 0.0;
  double val_auc = 0.0;
};

struct TrainResult {
  ModelParams params;  // best validation AP
  std::vector<EpochRecord> history;
  double initial_val_ap = 0.0;
  std::size_t best_epoch = 0;  // 0 when the initial parameters were never beaten
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& why, ModelParams state)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch) + ": " + why),
        epoch(epoch),
        batch(batch),
        state(std::move(state)) {}
  std::size_t epoch;
  std::size_t batch;
  ModelParams state;  // parameters before the offending update
};

// Labelled pair queries of one section: each positive event plus one
// negative sharing its source and time.
struct Query {
  NodeId u, v;
  double t;
  double label;
};

// Negatives are drawn from a generator seeded by (seed, section), so they
// are fixed for a given split seed.
std::vector<Query> evaluation_queries(const SplitSpec& split, const DynamicGraph& g, Section section,
                                      std::uint64_t seed);

std::vector<double> score_queries(const ModelParams& params, const DynamicGraph& g, const Dat& dat,
                                  const std::vector<Query>& queries);

TrainResult train(const DynamicGraph& g, const SplitSpec& split, const TrainConfig& config);

MetricsReport evaluate(const ModelParams& params, const DynamicGraph& g, const SplitSpec& split,
                       Section section, std::uint64_t seed);

// Mean wall-clock seconds of one forward/backward pass plus update over a
// batch drawn from the training section.
double time_training_batch(const DynamicGraph& g, const SplitSpec& split, const TrainConfig& config,
                           std::size_t repeats);

// key=value lines, '#' comments.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> parse_key_values_file(const std::string& path);

// Reads the training and model keys; any other key must be listed in
// `passthrough` or the call throws.
TrainConfig train_config_from(const std::map<std::string, std::string>& kv,
                              const std::set<std::string>& passthrough = {});

}  // namespace dwlkit
