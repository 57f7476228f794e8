#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thermoflux/config.hpp"
#include "thermoflux/csv.hpp"
#include "thermoflux/errors.hpp"
#include "thermoflux/evaluation.hpp"
#include "thermoflux/simulation.hpp"
#include "thermoflux/surrogate.hpp"

namespace fs = std::filesystem;
using namespace thermoflux;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SimulationConfig resolve_config(const std::string& config_path,
                                const std::string& radiation_flag,
                                bool for_dataset) {
  SimulationConfig config =
      config_path.empty()
          ? (for_dataset ? dataset_default_config() : default_config())
          : load_config(config_path);
  if (radiation_flag == "on") config.radiation_enabled = true;
  if (radiation_flag == "off") config.radiation_enabled = false;
  return config;
}

std::vector<std::vector<double>> profile_rows(const SimulationConfig& config,
                                              const SimulationResult& result) {
  std::vector<std::vector<double>> rows;
  rows.reserve(result.snapshots.size() * config.grid.n_nodes());
  for (const auto& snap : result.snapshots)
    for (int i = 0; i < config.grid.n_nodes(); ++i)
      rows.push_back({snap.t, config.grid.x(i), snap.temperature[i],
                      snap.q_cond[i], snap.q_rad[i], snap.q_total[i]});
  return rows;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& radiation_flag) {
  const std::string started = iso_timestamp();
  SimulationConfig config = resolve_config(config_path, radiation_flag, false);
  const SimulationResult result = run_simulation(config);

  fs::create_directories(out_dir);
  const fs::path profile_path = fs::path(out_dir) / "profile.csv";
  write_csv(profile_path,
            {"time_s", "x_m", "temperature_K", "q_cond_W_m2", "q_rad_W_m2",
             "q_total_W_m2"},
            profile_rows(config, result));

  nlohmann::json manifest;
  manifest["config_hash"] = hash_hex(config_hash(config));
  manifest["tool_version"] = kVersion;
  manifest["started_at"] = started;
  manifest["finished_at"] = iso_timestamp();
  manifest["outputs"] = {profile_path.string()};
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  std::ofstream mout(manifest_path, std::ios::binary);
  if (!mout) throw ConfigError("cannot write '" + manifest_path.string() + "'");
  mout << manifest.dump(2) << '\n';

  std::printf("wrote %s (%zu snapshots x %d nodes)\n", profile_path.c_str(),
              result.snapshots.size(), config.grid.n_nodes());
  if (result.steady_state_time)
    std::printf("steady state detected at %g s\n", *result.steady_state_time);
  else
    std::printf("steady state not reached within %g s\n", config.t_end);
  std::printf("max energy residual %.3e, max coupling iters %d\n",
              result.diagnostics.max_energy_residual,
              result.diagnostics.max_coupling_iters);
  return 0;
}

int cmd_dataset(const std::string& config_path, const std::string& sweep_arg,
                const std::string& out_file, const std::string& radiation_flag) {
  SimulationConfig base = resolve_config(config_path, radiation_flag, true);

  SweepSpec sweep;
  if (!sweep_arg.empty()) {
    const auto eq = sweep_arg.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--sweep expects KEY=V1,V2,...");
    sweep.key = sweep_arg.substr(0, eq);
    std::string rest = sweep_arg.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = rest.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.empty()) throw ConfigError("--sweep has an empty value");
      try {
        sweep.values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("--sweep value '" + tok + "' is not a number");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } else if (!config_path.empty()) {
    sweep = sweep_from_file(config_path);
  }

  std::vector<SimulationConfig> configs;
  if (sweep.values.empty()) {
    configs.push_back(base);
  } else {
    for (double v : sweep.values) {
      SimulationConfig c = base;
      apply_override(c, sweep.key, v);
      configs.push_back(std::move(c));
    }
  }

  const int n_runs = static_cast<int>(configs.size());
  std::vector<std::vector<DatasetRow>> per_run(n_runs);
  std::vector<std::string> failures(n_runs);
  bool convergence_failure = false;

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
  if (const char* env = std::getenv("THERMOFLUX_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int r = 0; r < n_runs; ++r) {
    try {
      const SimulationResult result = run_simulation(configs[r]);
      per_run[r] = emit_dataset(result, configs[r].grid);
    } catch (const ConvergenceError& e) {
      failures[r] = e.what();
      convergence_failure = true;
    } catch (const std::exception& e) {
      failures[r] = e.what();
    }
  }
  for (int r = 0; r < n_runs; ++r)
    if (!failures[r].empty()) {
      // No partial output: the file is only written after every run succeeds.
      if (convergence_failure) throw ConvergenceError(failures[r], 0.0);
      throw ConfigError(failures[r]);
    }

  std::vector<std::vector<double>> rows;
  for (int r = 0; r < n_runs; ++r)
    for (const auto& row : per_run[r])
      rows.push_back({static_cast<double>(r), row.t, row.x, row.temperature,
                      row.q_rad, row.q_cond});
  write_csv(out_file,
            {"run_id", "time_s", "x_m", "temperature_K", "q_rad_W_m2",
             "q_cond_W_m2"},
            rows);
  std::printf("wrote %s (%d run%s, %zu rows)\n", out_file.c_str(), n_runs,
              n_runs == 1 ? "" : "s", rows.size());
  return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& out_file,
              const PipelineHyper& hyper) {
  const TableDataset data = dataset_from_table(read_csv(dataset_path));
  const PipelineResult result = train_surrogate(data, hyper);
  save_model(result.model, out_file);

  fs::path loss_path = out_file;
  loss_path.replace_extension();
  loss_path += "_loss.csv";
  std::vector<std::vector<double>> rows;
  for (const auto& p : result.loss_curve)
    rows.push_back({static_cast<double>(p.epoch), p.train_mse, p.test_mse});
  write_csv(loss_path, {"epoch", "train_mse", "test_mse"}, rows);

  std::printf("wrote %s and %s\n", out_file.c_str(), loss_path.c_str());
  if (!result.loss_curve.empty())
    std::printf("final train_mse %.6e, test_mse %.6e (split at t <= %g s)\n",
                result.loss_curve.back().train_mse,
                result.loss_curve.back().test_mse, result.split_time);
  return 0;
}

TableDataset features_only_dataset(const CsvTable& table) {
  TableDataset data;
  const int run_col = table.column("run_id");
  const int t_col = table.require_column("time_s");
  const int x_col = table.require_column("x_m");
  const int temp_col = table.column("temperature_K");
  for (const auto& row : table.rows) {
    data.run_id.push_back(run_col >= 0 ? row[run_col] : 0.0);
    data.t.push_back(row[t_col]);
    data.x.push_back(row[x_col]);
    data.temperature.push_back(temp_col >= 0 ? row[temp_col] : 0.0);
    data.q_rad.push_back(0.0);
    data.q_cond.push_back(0.0);
  }
  return data;
}

void check_feature_compatibility(const SurrogateModel& model,
                                 const CsvTable& table) {
  for (const auto& name : model.feature_names)
    if (table.column(name) < 0)
      throw ConfigError("dataset lacks model feature column '" + name + "'");
}

int cmd_predict(const std::string& model_path, const std::string& dataset_path,
                const std::string& out_file) {
  const SurrogateModel model = load_model(model_path);
  const CsvTable table = read_csv(dataset_path);
  check_feature_compatibility(model, table);
  const TableDataset data = features_only_dataset(table);
  const SurrogatePredictions pred = predict_rows(model, data);
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r)
    rows.push_back({data.t[r], data.x[r], pred.temperature[r], pred.q_rad[r],
                    pred.q_cond[r]});
  write_csv(out_file,
            {"time_s", "x_m", "temperature_K", "q_rad_W_m2", "q_cond_W_m2"},
            rows);
  std::printf("wrote %s (%zu rows)\n", out_file.c_str(), rows.size());
  return 0;
}

nlohmann::json report_to_json(const RegressionMetrics& reg,
                              const ClassificationReport& cls,
                              double threshold) {
  nlohmann::json j;
  j["rmse"] = reg.rmse;
  j["mae"] = reg.mae;
  j["acc"] = cls.acc;
  j["tpr"] = cls.tpr;
  j["fpr"] = cls.fpr;
  j["ppv"] = cls.ppv;
  j["tnr"] = cls.tnr;
  if (cls.auc)
    j["auc"] = *cls.auc;
  else
    j["auc"] = nullptr;
  j["tp"] = cls.counts.tp;
  j["fp"] = cls.counts.fp;
  j["tn"] = cls.counts.tn;
  j["fn"] = cls.counts.fn;
  j["threshold"] = threshold;
  return j;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset_path,
                 const std::string& out_dir) {
  const SurrogateModel model = load_model(model_path);
  const CsvTable table = read_csv(dataset_path);
  check_feature_compatibility(model, table);
  const TableDataset data = dataset_from_table(table);
  const SurrogatePredictions pred = predict_rows(model, data);

  fs::create_directories(out_dir);
  nlohmann::json metrics;

  struct Target {
    const char* name;
    const std::vector<double>* truth;
    const std::vector<double>* pred;
  };
  const Target targets[] = {
      {"temperature_K", &data.temperature, &pred.temperature},
      {"q_rad_W_m2", &data.q_rad, &pred.q_rad},
      {"q_cond_W_m2", &data.q_cond, &pred.q_cond},
  };
  for (const auto& target : targets) {
    const auto reg = regression_metrics(*target.pred, *target.truth);
    const double threshold =
        resolve_threshold(*target.truth, BinarizeRule::quantile(0.5));
    const auto labels = binarize(*target.truth, BinarizeRule::threshold(threshold));
    const auto cls = confusion_and_roc(*target.pred, labels, threshold);
    metrics[target.name] = report_to_json(reg, cls, threshold);

    std::vector<std::vector<double>> roc_rows;
    for (const auto& pt : cls.roc)
      roc_rows.push_back({pt.threshold, pt.fpr, pt.tpr});
    write_csv(fs::path(out_dir) / (std::string("roc_") + target.name + ".csv"),
              {"threshold", "fpr", "tpr"}, roc_rows);
  }

  // Correlation over the predicted fields plus the coordinates.
  const auto corr = pearson_matrix({{"t", data.t},
                                    {"x", data.x},
                                    {"T", pred.temperature},
                                    {"q_r", pred.q_rad},
                                    {"q_c", pred.q_cond}});
  {
    const fs::path corr_path = fs::path(out_dir) / "correlation.csv";
    std::ofstream out(corr_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + corr_path.string() + "'");
    for (const auto& name : corr.names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < corr.names.size(); ++i) {
      out << corr.names[i];
      for (std::size_t j = 0; j < corr.names.size(); ++j)
        out << ',' << format_double(corr.at(i, j));
      out << '\n';
    }
  }

  const fs::path metrics_path = fs::path(out_dir) / "metrics.json";
  std::ofstream mout(metrics_path, std::ios::binary);
  if (!mout) throw ConfigError("cannot write '" + metrics_path.string() + "'");
  mout << metrics.dump(2) << '\n';

  std::printf("wrote %s (rmse_T %.4g K)\n", metrics_path.c_str(),
              metrics["temperature_K"]["rmse"].get<double>());
  return 0;
}

int cmd_compare(const std::string& profile_path, const std::string& model_path,
                const std::string& out_file) {
  const SurrogateModel model = load_model(model_path);
  const CsvTable table = read_csv(profile_path);
  check_feature_compatibility(model, table);
  if (table.column("temperature_K") < 0)
    throw ConfigError("profile lacks column 'temperature_K'");
  const TableDataset profile = features_only_dataset(table);
  const auto rows = compare_rows(profile, [&](const TableDataset& d) {
    return predict_rows(model, d);
  });

  std::vector<std::vector<double>> out_rows;
  double max_err = 0.0, sum_err = 0.0;
  for (const auto& row : rows) {
    out_rows.push_back({row.t, row.x, row.numeric, row.predicted, row.abs_err});
    max_err = std::max(max_err, row.abs_err);
    sum_err += row.abs_err;
  }
  write_csv(out_file, {"time_s", "x_m", "T_numeric_K", "T_lstm_K", "abs_err_K"},
            out_rows);
  std::printf("wrote %s (%zu rows); max abs err %.6g K, mean abs err %.6g K\n",
              out_file.c_str(), out_rows.size(), max_err,
              rows.empty() ? 0.0 : sum_err / rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoflux: coupled conduction-radiation slab solver with an "
               "LSTM surrogate"};
  app.require_subcommand(1);

  std::string config_path, out_path, radiation_flag;
  std::string dataset_path, model_path, profile_path, sweep_arg;
  PipelineHyper hyper;

  auto add_radiation = [&](CLI::App* cmd) {
    cmd->add_option("--radiation", radiation_flag, "override radiation (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run the coupled solver");
  simulate->add_option("--config", config_path, "JSON config file");
  simulate->add_option("--out", out_path, "output directory")->default_val(".");
  add_radiation(simulate);

  CLI::App* dataset = app.add_subcommand("dataset", "emit training data");
  dataset->add_option("--config", config_path, "JSON config file");
  dataset->add_option("--sweep", sweep_arg, "parameter sweep KEY=V1,V2,...");
  dataset->add_option("--out", out_path, "output CSV")->default_val("dataset.csv");
  add_radiation(dataset);

  CLI::App* train = app.add_subcommand("train", "train the LSTM surrogate");
  train->add_option("--dataset", dataset_path, "dataset CSV")->required();
  train->add_option("--out", out_path, "checkpoint path")->default_val("model.json");
  train->add_option("--lr", hyper.train.lr, "learning rate")->default_val(0.01);
  train->add_option("--epochs", hyper.train.epochs, "training epochs")
      ->default_val(30);
  train->add_option("--seed", hyper.train.seed, "RNG seed")->default_val(42);
  train->add_option("--clip-norm", hyper.train.clip_norm, "gradient norm cap")
      ->default_val(5.0);
  train->add_option("--hidden", hyper.train.hidden_size, "hidden units")
      ->default_val(32);
  train->add_option("--window", hyper.window, "sequence window length")
      ->default_val(16);
  train->add_option("--stride", hyper.stride, "window stride")->default_val(8);
  train->add_option("--split", hyper.train_fraction, "train fraction (chronological)")
      ->default_val(0.8);
  train->add_option("--reduce-tau", hyper.reduce_tau,
                    "Mahalanobis reduction threshold (0 = off)")
      ->default_val(0.0);

  CLI::App* predict = app.add_subcommand("predict", "predict with a checkpoint");
  predict->add_option("--model", model_path, "checkpoint path")->required();
  predict->add_option("--dataset", dataset_path, "input CSV with time_s,x_m")
      ->required();
  predict->add_option("--out", out_path, "output CSV")->default_val("predictions.csv");

  CLI::App* evaluate = app.add_subcommand("evaluate", "metrics vs ground truth");
  evaluate->add_option("--model", model_path, "checkpoint path")->required();
  evaluate->add_option("--dataset", dataset_path, "dataset CSV")->required();
  evaluate->add_option("--out", out_path, "output directory")->default_val(".");

  CLI::App* compare = app.add_subcommand("compare", "profile vs surrogate");
  compare->add_option("--profile", profile_path, "profile CSV")->required();
  compare->add_option("--model", model_path, "checkpoint path")->required();
  compare->add_option("--out", out_path, "output CSV")->default_val("compare.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, out_path, radiation_flag);
    if (dataset->parsed())
      return cmd_dataset(config_path, sweep_arg, out_path, radiation_flag);
    if (train->parsed()) return cmd_train(dataset_path, out_path, hyper);
    if (predict->parsed()) return cmd_predict(model_path, dataset_path, out_path);
    if (evaluate->parsed()) return cmd_evaluate(model_path, dataset_path, out_path);
    if (compare->parsed()) return cmd_compare(profile_path, model_path, out_path);
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
