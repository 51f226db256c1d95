#include "dwlkit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dwlkit {
namespace {

void check_inputs(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("labels must be 0 or 1");
  }
}

std::size_t count_positive(std::span<const double> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
}

}  // namespace

std::string to_string(Setting s) { return s == Setting::transductive ? "transductive" : "inductive"; }

double average_precision(std::span<const double> scores, std::span<const double> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_positive(labels);
  if (pos == 0) throw std::invalid_argument("average precision needs at least one positive");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1.0) continue;
    ++hits;
    // recall steps by 1/pos exactly where a positive is ranked
    ap += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(pos);
}

double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_positive(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("AUC needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // midranks over tie groups
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

MetricsReport compute_metrics(std::span<const double> scores, std::span<const double> labels, Setting setting) {
  MetricsReport r;
  r.ap = average_precision(scores, labels);
  r.auc = roc_auc(scores, labels);
  r.positives = count_positive(labels);
  r.negatives = labels.size() - r.positives;
  r.setting = setting;
  return r;
}

}  // namespace dwlkit
