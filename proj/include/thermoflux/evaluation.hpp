#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermoflux {

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

/// rmse = sqrt(mean((p-y)^2)), mae = mean(|p-y|). Physical units of the
/// inputs. Throws std::invalid_argument on empty or mismatched series.
RegressionMetrics regression_metrics(std::span<const double> pred,
                                     std::span<const double> truth);

/// Symmetric Pearson correlation matrix; diagonal exactly 1.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<double> r;  // row-major n x n

  double at(std::size_t i, std::size_t j) const { return r[i * names.size() + j]; }
};

/// Throws ConfigError naming any constant column; needs >= 2 samples.
CorrelationMatrix pearson_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns);

/// Either a fixed threshold or a quantile resolved from the series it is
/// applied to (midpoint convention at exact integer positions, so the median
/// of [1,2,3,4] is 2.5).
struct BinarizeRule {
  enum class Kind { kThreshold, kQuantile } kind = Kind::kThreshold;
  double value = 0.0;

  static BinarizeRule threshold(double v) { return {Kind::kThreshold, v}; }
  static BinarizeRule quantile(double q) { return {Kind::kQuantile, q}; }
};

double resolve_threshold(std::span<const double> series, const BinarizeRule& rule);

/// label = value >= threshold.
std::vector<char> binarize(std::span<const double> series, const BinarizeRule& rule);

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// Confusion at the operating threshold plus a ROC sweep over distinct score
/// thresholds (descending, ties grouped, trapezoid AUC over integer counts).
/// With a single-class truth the confusion side is still filled in; roc_valid
/// is false and auc/points are absent.
struct ClassificationReport {
  ConfusionCounts counts;
  double acc = 0.0;
  double tpr = 0.0, fpr = 0.0, ppv = 0.0, tnr = 0.0;
  std::optional<double> auc;
  std::vector<RocPoint> roc;
  bool roc_valid = false;
  std::string roc_error;
};

ClassificationReport confusion_and_roc(std::span<const double> scores,
                                       std::span<const char> truth_labels,
                                       double operating_threshold);

/// Coefficient of determination of pred against truth.
double r_squared(std::span<const double> pred, std::span<const double> truth);

}  // namespace thermoflux
