#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace dwlkit {

enum class Setting { transductive, inductive };

std::string to_string(Setting s);

struct MetricsReport {
  double ap = 0.0;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  Setting setting = Setting::transductive;
};

// Step-sum area under the precision-recall curve. Ranking is by descending
// score with ties broken by input index.
double average_precision(std::span<const double> scores, std::span<const double> labels);

// Rank-sum AUC; tied positive/negative pairs earn half credit.
double roc_auc(std::span<const double> scores, std::span<const double> labels);

MetricsReport compute_metrics(std::span<const double> scores, std::span<const double> labels,
                              Setting setting = Setting::transductive);

}  // namespace dwlkit
