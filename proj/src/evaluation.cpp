#include "thermoflux/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "thermoflux/errors.hpp"

namespace thermoflux {

RegressionMetrics regression_metrics(std::span<const double> pred,
                                     std::span<const double> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::invalid_argument("regression_metrics: need equal non-empty series");
  double sq = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sq += d * d;
    abs_sum += std::abs(d);
  }
  const double n = static_cast<double>(pred.size());
  return {std::sqrt(sq / n), abs_sum / n};
}

CorrelationMatrix pearson_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  if (columns.empty())
    throw std::invalid_argument("pearson_matrix: no columns");
  const std::size_t n_samples = columns.front().second.size();
  if (n_samples < 2)
    throw std::invalid_argument("pearson_matrix: need >= 2 samples");
  for (const auto& [name, col] : columns)
    if (col.size() != n_samples)
      throw std::invalid_argument("pearson_matrix: column '" + name +
                                  "' length mismatch");

  const std::size_t k = columns.size();
  std::vector<double> means(k, 0.0), sds(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& col = columns[c].second;
    means[c] = std::accumulate(col.begin(), col.end(), 0.0) / n_samples;
    double ss = 0.0;
    for (double v : col) ss += (v - means[c]) * (v - means[c]);
    sds[c] = std::sqrt(ss);
    if (!(sds[c] > 0.0))
      throw ConfigError("pearson_matrix: column '" + columns[c].first +
                        "' is constant");
  }

  CorrelationMatrix m;
  for (const auto& [name, col] : columns) m.names.push_back(name);
  m.r.assign(k * k, 1.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double cov = 0.0;
      for (std::size_t i = 0; i < n_samples; ++i)
        cov += (columns[a].second[i] - means[a]) * (columns[b].second[i] - means[b]);
      const double r = cov / (sds[a] * sds[b]);
      m.r[a * k + b] = r;
      m.r[b * k + a] = r;
    }
  }
  return m;
}

double resolve_threshold(std::span<const double> series, const BinarizeRule& rule) {
  if (rule.kind == BinarizeRule::Kind::kThreshold) return rule.value;
  if (series.empty())
    throw std::invalid_argument("resolve_threshold: empty series");
  if (!(rule.value >= 0.0 && rule.value <= 1.0))
    throw std::invalid_argument("resolve_threshold: quantile outside [0, 1]");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double pos = rule.value * n;
  const auto idx = static_cast<std::size_t>(std::floor(pos));
  if (idx == 0) return sorted.front();
  if (idx >= n) return sorted.back();
  if (pos == static_cast<double>(idx))  // cut between samples: midpoint
    return 0.5 * (sorted[idx - 1] + sorted[idx]);
  return sorted[idx];
}

std::vector<char> binarize(std::span<const double> series, const BinarizeRule& rule) {
  const double threshold = resolve_threshold(series, rule);
  std::vector<char> labels(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    labels[i] = series[i] >= threshold ? 1 : 0;
  return labels;
}

ClassificationReport confusion_and_roc(std::span<const double> scores,
                                       std::span<const char> truth_labels,
                                       double operating_threshold) {
  if (scores.empty() || scores.size() != truth_labels.size())
    throw std::invalid_argument("confusion_and_roc: need equal non-empty inputs");

  ClassificationReport report;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= operating_threshold;
    const bool actual = truth_labels[i] != 0;
    if (predicted && actual)
      ++report.counts.tp;
    else if (predicted && !actual)
      ++report.counts.fp;
    else if (!predicted && !actual)
      ++report.counts.tn;
    else
      ++report.counts.fn;
  }
  const auto& c = report.counts;
  const double total = static_cast<double>(scores.size());
  report.acc = (c.tp + c.tn) / total;
  report.tpr = c.tp + c.fn > 0 ? double(c.tp) / (c.tp + c.fn)
                               : std::numeric_limits<double>::quiet_NaN();
  report.fpr = c.fp + c.tn > 0 ? double(c.fp) / (c.fp + c.tn)
                               : std::numeric_limits<double>::quiet_NaN();
  report.ppv = c.tp + c.fp > 0 ? double(c.tp) / (c.tp + c.fp)
                               : std::numeric_limits<double>::quiet_NaN();
  report.tnr = c.tn + c.fp > 0 ? double(c.tn) / (c.tn + c.fp)
                               : std::numeric_limits<double>::quiet_NaN();

  const long positives = c.tp + c.fn;
  const long negatives = c.fp + c.tn;
  if (positives == 0 || negatives == 0) {
    report.roc_valid = false;
    report.roc_error = "ROC needs at least one positive and one negative label";
    return report;
  }

  // Descending score sweep with tied scores grouped; counts stay integral so
  // the trapezoid AUC equals the pairwise win/tie statistic exactly.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  report.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long tp = 0, fp = 0;
  double area2 = 0.0;  // twice the unnormalized area
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    long d_tp = 0, d_fp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      if (truth_labels[order[i]] != 0)
        ++d_tp;
      else
        ++d_fp;
      ++i;
    }
    area2 += static_cast<double>(d_fp) * static_cast<double>(2 * tp + d_tp);
    tp += d_tp;
    fp += d_fp;
    report.roc.push_back({s, double(fp) / negatives, double(tp) / positives});
  }
  report.auc = area2 / (2.0 * static_cast<double>(positives) *
                        static_cast<double>(negatives));
  report.roc_valid = true;
  return report;
}

double r_squared(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::invalid_argument("r_squared: need equal non-empty series");
  const double mean =
      std::accumulate(truth.begin(), truth.end(), 0.0) / truth.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(ss_tot > 0.0))
    throw std::invalid_argument("r_squared: constant truth series");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace thermoflux
