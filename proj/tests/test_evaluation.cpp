#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "thermoflux/errors.hpp"
#include "thermoflux/evaluation.hpp"

using namespace thermoflux;

namespace {

// Brute-force pairwise AUC: fraction of (positive, negative) pairs ranked
// correctly, counting ties as half.
double auc_pair_oracle(const std::vector<double>& scores,
                       const std::vector<char>& labels) {
  double wins = 0.0, ties = 0.0;
  long positives = 0, negatives = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (!labels[p]) continue;
    ++positives;
    for (std::size_t n = 0; n < scores.size(); ++n) {
      if (labels[n]) continue;
      if (scores[p] > scores[n])
        wins += 1.0;
      else if (scores[p] == scores[n])
        ties += 1.0;
    }
  }
  for (char l : labels) negatives += l ? 0 : 1;
  return (wins + 0.5 * ties) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

}  // namespace

TEST_CASE("regression_metrics: identical, offset, and hand-computed cases") {
  std::vector<double> truth{1.0, 2.0, 3.0};
  CHECK(regression_metrics(truth, truth).rmse == 0.0);
  CHECK(regression_metrics(truth, truth).mae == 0.0);

  std::vector<double> offset{2.0, 3.0, 4.0};
  const auto m = regression_metrics(offset, truth);
  CHECK(m.rmse == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.mae == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<double> pred{0.0, 0.0}, target{3.0, 4.0};
  const auto h = regression_metrics(pred, target);
  CHECK(h.rmse == doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));
  CHECK(h.mae == doctest::Approx(3.5).epsilon(1e-14));

  std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(regression_metrics(shorter, truth), std::invalid_argument);
  std::vector<double> empty;
  CHECK_THROWS_AS(regression_metrics(empty, empty), std::invalid_argument);
}

TEST_CASE("pearson_matrix: self, negation, hand value, constant column") {
  std::vector<double> x{1.0, 2.0, 3.0};
  std::vector<double> neg{-1.0, -2.0, -3.0};
  std::vector<double> y{1.0, 2.0, 4.0};

  const auto m = pearson_matrix({{"x", x}, {"neg", neg}, {"y", y}});
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 1) == 1.0);
  CHECK(m.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  // 9/sqrt(84) = 0.98198...
  CHECK(m.at(0, 2) == doctest::Approx(9.0 / std::sqrt(84.0)).epsilon(1e-13));
  CHECK(m.at(0, 2) == doctest::Approx(0.982).epsilon(1e-3));
  CHECK(m.at(2, 0) == m.at(0, 2));

  std::vector<double> constant{5.0, 5.0, 5.0};
  CHECK_THROWS_WITH_AS(pearson_matrix({{"x", x}, {"flat", constant}}),
                       doctest::Contains("flat"), ConfigError);
}

TEST_CASE("pearson: affine invariance and sign flip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(50), y(50), y_affine(50), y_neg(50);
  for (int i = 0; i < 50; ++i) {
    x[i] = dist(rng);
    y[i] = dist(rng);
    y_affine[i] = 2.5 * y[i] + 7.0;
    y_neg[i] = -y[i];
  }
  const auto base = pearson_matrix({{"x", x}, {"y", y}}).at(0, 1);
  const auto affine = pearson_matrix({{"x", x}, {"y", y_affine}}).at(0, 1);
  const auto flipped = pearson_matrix({{"x", x}, {"y", y_neg}}).at(0, 1);
  CHECK(std::abs(base - affine) < 1e-12);
  CHECK(std::abs(base + flipped) < 1e-12);
}

TEST_CASE("binarize: threshold placement and the median convention") {
  std::vector<double> series{1.0, 2.0, 3.0, 4.0};

  auto all_true = binarize(series, BinarizeRule::threshold(0.0));
  for (char l : all_true) CHECK(l == 1);

  auto median = binarize(series, BinarizeRule::quantile(0.5));
  CHECK(resolve_threshold(series, BinarizeRule::quantile(0.5)) == 2.5);
  CHECK(median == std::vector<char>{0, 0, 1, 1});

  auto none = binarize(series, BinarizeRule::threshold(5.0));
  for (char l : none) CHECK(l == 0);
}

TEST_CASE("confusion_and_roc: separated and mixed hand fixtures") {
  {
    std::vector<double> scores{0.9, 0.8, 0.4, 0.3};
    std::vector<char> labels{1, 1, 0, 0};
    const auto r = confusion_and_roc(scores, labels, 0.5);
    CHECK(r.counts.tp == 2);
    CHECK(r.counts.tn == 2);
    CHECK(r.counts.fp == 0);
    CHECK(r.counts.fn == 0);
    CHECK(r.acc == 1.0);
    REQUIRE(r.auc.has_value());
    CHECK(*r.auc == 1.0);
  }
  {
    std::vector<double> scores{0.9, 0.4, 0.8, 0.3};
    std::vector<char> labels{1, 0, 0, 1};
    const auto r = confusion_and_roc(scores, labels, 0.5);
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fp == 1);
    CHECK(r.counts.tn == 1);
    CHECK(r.counts.fn == 1);
    CHECK(r.acc == 0.5);
    REQUIRE(r.auc.has_value());
    CHECK(*r.auc == 0.5);
  }
}

TEST_CASE("confusion_and_roc: single-class truth keeps confusion, flags ROC") {
  std::vector<double> scores{0.9, 0.4, 0.8};
  std::vector<char> labels{1, 1, 1};
  const auto r = confusion_and_roc(scores, labels, 0.5);
  CHECK(r.counts.tp == 2);
  CHECK(r.counts.fn == 1);
  CHECK(!r.roc_valid);
  CHECK(!r.auc.has_value());
  CHECK(!r.roc_error.empty());
}

TEST_CASE("property: AUC equals the brute-force pair statistic exactly") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> size_dist(5, 100);
    const int n = size_dist(rng);
    std::vector<double> scores(n);
    std::vector<char> labels(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Coarse score grid so tied scores actually occur.
      scores[i] = std::uniform_int_distribution<int>(0, 9)(rng) / 10.0;
      labels[i] = std::uniform_int_distribution<int>(0, 1)(rng);
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    const auto r = confusion_and_roc(scores, labels, 0.5);
    REQUIRE(r.auc.has_value());
    CHECK(*r.auc == auc_pair_oracle(scores, labels));  // bitwise
  }
}

TEST_CASE("property: ROC sweep is monotone and counts always sum to n") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 40;
    std::vector<double> scores(n);
    std::vector<char> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      labels[i] = std::uniform_int_distribution<int>(0, 1)(rng);
    }
    labels[0] = 1;
    labels[1] = 0;
    const auto r = confusion_and_roc(scores, labels, 0.5);
    CHECK(r.counts.tp + r.counts.fp + r.counts.tn + r.counts.fn == n);
    // Points are emitted in descending threshold order, so both rates grow
    // along the list (equivalently: non-increasing in the threshold).
    for (std::size_t i = 1; i < r.roc.size(); ++i) {
      CHECK(r.roc[i].tpr >= r.roc[i - 1].tpr);
      CHECK(r.roc[i].fpr >= r.roc[i - 1].fpr);
      CHECK(r.roc[i].threshold <= r.roc[i - 1].threshold);
    }
    CHECK(r.roc.back().tpr == 1.0);
    CHECK(r.roc.back().fpr == 1.0);
  }
}

TEST_CASE("r_squared: perfect fit and obvious misfit") {
  std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
  CHECK(r_squared(truth, truth) == 1.0);
  std::vector<double> mean_only{2.5, 2.5, 2.5, 2.5};
  CHECK(r_squared(mean_only, truth) == doctest::Approx(0.0).epsilon(1e-14));
}
