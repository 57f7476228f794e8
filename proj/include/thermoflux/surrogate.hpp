#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "thermoflux/csv.hpp"

namespace thermoflux {

/// Gate weights over the concatenated [h_{t-1}, x_t] (hidden entries first),
/// row-major hidden x (hidden+input); output head w_y is output x hidden.
struct LstmParams {
  int input_size = 0;
  int hidden_size = 0;
  int output_size = 0;
  std::vector<double> w_f, w_i, w_c, w_o;
  std::vector<double> b_f, b_i, b_c, b_o;
  std::vector<double> w_y, b_y;

  /// Uniform init in [-0.1, 0.1], reproducible for a fixed seed on any
  /// platform (raw mt19937_64 bits, no distribution adapters).
  static LstmParams seeded(int input_size, int hidden_size, int output_size,
                           std::uint64_t seed);

  std::size_t parameter_count() const;
  void check_shapes() const;  // throws std::invalid_argument
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zero(int hidden_size) {
    return {std::vector<double>(hidden_size, 0.0),
            std::vector<double>(hidden_size, 0.0)};
  }
};

/// One cell update:
///   f = sigmoid(W_f [h,x] + b_f), i = sigmoid(W_i [h,x] + b_i)
///   c_hat = tanh(W_c [h,x] + b_c), C' = f*C + i*c_hat
///   o = sigmoid(W_o [h,x] + b_o), h' = o * tanh(C')
LstmState lstm_cell(const LstmParams& params, const LstmState& state,
                    std::span<const double> x);

/// y_t = W_y h_t + b_y for every step, starting from the zero state.
std::vector<std::vector<double>> forward_sequence(
    const LstmParams& params, const std::vector<std::vector<double>>& inputs);

struct Sequence {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
};

/// Mean squared error over all steps and output components (the reported
/// metric).
double sequence_mse(const LstmParams& params, const Sequence& seq);

/// Per-sequence training objective: squared error summed over steps and
/// averaged over output components. Same minimizer as the MSE; keeps the
/// gradient scale independent of the window length.
double sequence_objective(const LstmParams& params, const Sequence& seq);

struct LstmGradients {
  std::vector<double> w_f, w_i, w_c, w_o;
  std::vector<double> b_f, b_i, b_c, b_o;
  std::vector<double> w_y, b_y;
};

/// Full-sequence backpropagation through time of sequence_objective.
LstmGradients bptt_gradients(const LstmParams& params, const Sequence& seq,
                             double* objective_out = nullptr);

struct TrainHyper {
  double lr = 0.01;
  int epochs = 100;
  std::uint64_t seed = 42;
  double clip_norm = 5.0;
  int hidden_size = 32;
};

struct LossPoint {
  int epoch;
  double train_mse;
  double test_mse;
};

struct TrainResult {
  LstmParams params;
  std::vector<LossPoint> loss_curve;
};

/// Plain SGD over the training sequences in fixed order, gradient-norm
/// clipping at clip_norm, seeded init. Deterministic for a fixed seed.
/// Throws TrainingError when the loss stops being finite.
TrainResult train_bptt(const std::vector<Sequence>& train,
                       const std::vector<Sequence>& test,
                       const TrainHyper& hyper);

/// Per-feature z-scoring with the population standard deviation.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> mean, std::vector<double> stddev);

  /// Throws ConfigError naming any zero-variance feature; needs >= 2 rows.
  static Normalizer fit(const std::vector<std::vector<double>>& rows,
                        const std::vector<std::string>& names = {});

  std::vector<double> apply(std::span<const double> row) const;
  std::vector<double> invert(std::span<const double> row) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  std::size_t size() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Greedy tau-separation pass in row order: a row is dropped when its
/// Mahalanobis distance to an already-retained row is < tau. The metric uses
/// the full-dataset covariance (sample convention), regularized by +eps*I
/// when not positive definite.
std::vector<std::size_t> mahalanobis_reduce(
    const std::vector<std::vector<double>>& rows, double tau);

/// Same pass under an explicit covariance (row-major d x d).
std::vector<std::size_t> mahalanobis_reduce(
    const std::vector<std::vector<double>>& rows, double tau,
    const std::vector<double>& covariance);

// ---------------------------------------------------------------------------
// Table pipeline: solver dataset rows -> per-node time-series windows.

struct TableDataset {
  std::vector<double> run_id;  // zeros when the CSV has no run_id column
  std::vector<double> t, x, temperature, q_rad, q_cond;

  std::size_t size() const { return t.size(); }
};

/// Accepts both the plain dataset schema and the run_id-prefixed one.
TableDataset dataset_from_table(const CsvTable& table);

struct PipelineHyper {
  TrainHyper train;
  int window = 16;
  int stride = 8;
  double train_fraction = 0.8;  // chronological split over distinct times
  double reduce_tau = 0.0;      // > 0: Mahalanobis reduction of train windows
};

struct SurrogateModel {
  LstmParams params;
  Normalizer features;  // over (t, x)
  Normalizer targets;   // over (T, q_r, q_c)
  std::vector<std::string> feature_names{"time_s", "x_m"};
  std::vector<std::string> target_names{"temperature_K", "q_rad_W_m2",
                                        "q_cond_W_m2"};
};

struct PipelineResult {
  SurrogateModel model;
  std::vector<LossPoint> loss_curve;
  double split_time = 0.0;  // last time that counts as training data
};

PipelineResult train_surrogate(const TableDataset& dataset,
                               const PipelineHyper& hyper);

/// Full-series forward pass per (run, node) group; physical units, aligned
/// with the dataset rows.
struct SurrogatePredictions {
  std::vector<double> temperature, q_rad, q_cond;
};

SurrogatePredictions predict_rows(const SurrogateModel& model,
                                  const TableDataset& dataset);

/// Checkpoint JSON, format_version 1. Loading any other version is an error.
void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);

/// Per-row comparison of a numeric temperature profile against any predictor
/// (the CLI binds the LSTM; tests may bind an identity stub).
struct ComparisonRow {
  double t, x;
  double numeric;    // K
  double predicted;  // K
  double abs_err;    // K
};

using RowPredictor = std::function<SurrogatePredictions(const TableDataset&)>;

std::vector<ComparisonRow> compare_rows(const TableDataset& profile,
                                        const RowPredictor& predictor);

}  // namespace thermoflux
