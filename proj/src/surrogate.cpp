#include "thermoflux/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "thermoflux/errors.hpp"

namespace thermoflux {

using nlohmann::json;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// y += M x for a row-major (rows x cols) matrix.
void matvec_add(const std::vector<double>& m, int rows, int cols,
                const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m.data() + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T x.
void matvec_transpose_add(const std::vector<double>& m, int rows, int cols,
                          const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) y[c] += row[c] * x[r];
  }
}

// M += a * x^T (outer product accumulate).
void outer_add(std::vector<double>& m, int rows, int cols, const double* a,
               const double* x) {
  for (int r = 0; r < rows; ++r) {
    double* row = m.data() + static_cast<std::size_t>(r) * cols;
    const double ar = a[r];
    for (int c = 0; c < cols; ++c) row[c] += ar * x[c];
  }
}

struct ForwardCache {
  // Per step, flattened: z (H+I), gates f/i/g/o (H each), c, tanh_c, h (H), y (O).
  int steps = 0, h = 0, z = 0, o = 0;
  std::vector<double> zs, fs, is, gs, os, cs, tanh_cs, hs, ys;

  void resize(int steps_, int hidden, int z_size, int out) {
    steps = steps_;
    h = hidden;
    z = z_size;
    o = out;
    zs.assign(static_cast<std::size_t>(steps) * z, 0.0);
    fs.assign(static_cast<std::size_t>(steps) * h, 0.0);
    is.assign(static_cast<std::size_t>(steps) * h, 0.0);
    gs.assign(static_cast<std::size_t>(steps) * h, 0.0);
    os.assign(static_cast<std::size_t>(steps) * h, 0.0);
    cs.assign(static_cast<std::size_t>(steps) * h, 0.0);
    tanh_cs.assign(static_cast<std::size_t>(steps) * h, 0.0);
    hs.assign(static_cast<std::size_t>(steps) * h, 0.0);
    ys.assign(static_cast<std::size_t>(steps) * o, 0.0);
  }
};

void forward_with_cache(const LstmParams& p, const Sequence& seq,
                        ForwardCache& cache) {
  const int hidden = p.hidden_size, input = p.input_size, out = p.output_size;
  const int z_size = hidden + input;
  const int steps = static_cast<int>(seq.inputs.size());
  cache.resize(steps, hidden, z_size, out);

  std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
  for (int t = 0; t < steps; ++t) {
    if (static_cast<int>(seq.inputs[t].size()) != input)
      throw std::invalid_argument("lstm forward: input width mismatch");
    double* z = &cache.zs[static_cast<std::size_t>(t) * z_size];
    std::copy(h.begin(), h.end(), z);
    std::copy(seq.inputs[t].begin(), seq.inputs[t].end(), z + hidden);

    double* f = &cache.fs[static_cast<std::size_t>(t) * hidden];
    double* i = &cache.is[static_cast<std::size_t>(t) * hidden];
    double* g = &cache.gs[static_cast<std::size_t>(t) * hidden];
    double* o = &cache.os[static_cast<std::size_t>(t) * hidden];
    std::copy(p.b_f.begin(), p.b_f.end(), f);
    std::copy(p.b_i.begin(), p.b_i.end(), i);
    std::copy(p.b_c.begin(), p.b_c.end(), g);
    std::copy(p.b_o.begin(), p.b_o.end(), o);
    matvec_add(p.w_f, hidden, z_size, z, f);
    matvec_add(p.w_i, hidden, z_size, z, i);
    matvec_add(p.w_c, hidden, z_size, z, g);
    matvec_add(p.w_o, hidden, z_size, z, o);
    for (int k = 0; k < hidden; ++k) {
      f[k] = sigmoid(f[k]);
      i[k] = sigmoid(i[k]);
      g[k] = std::tanh(g[k]);
      o[k] = sigmoid(o[k]);
      c[k] = f[k] * c[k] + i[k] * g[k];
      cache.cs[static_cast<std::size_t>(t) * hidden + k] = c[k];
      const double tc = std::tanh(c[k]);
      cache.tanh_cs[static_cast<std::size_t>(t) * hidden + k] = tc;
      h[k] = o[k] * tc;
      cache.hs[static_cast<std::size_t>(t) * hidden + k] = h[k];
    }
    double* y = &cache.ys[static_cast<std::size_t>(t) * out];
    std::copy(p.b_y.begin(), p.b_y.end(), y);
    matvec_add(p.w_y, out, hidden, h.data(), y);
  }
}

void zero_like(const LstmParams& p, LstmGradients& g) {
  g.w_f.assign(p.w_f.size(), 0.0);
  g.w_i.assign(p.w_i.size(), 0.0);
  g.w_c.assign(p.w_c.size(), 0.0);
  g.w_o.assign(p.w_o.size(), 0.0);
  g.b_f.assign(p.b_f.size(), 0.0);
  g.b_i.assign(p.b_i.size(), 0.0);
  g.b_c.assign(p.b_c.size(), 0.0);
  g.b_o.assign(p.b_o.size(), 0.0);
  g.w_y.assign(p.w_y.size(), 0.0);
  g.b_y.assign(p.b_y.size(), 0.0);
}

void accumulate(LstmGradients& into, const LstmGradients& from) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(into.w_f, from.w_f);
  add(into.w_i, from.w_i);
  add(into.w_c, from.w_c);
  add(into.w_o, from.w_o);
  add(into.b_f, from.b_f);
  add(into.b_i, from.b_i);
  add(into.b_c, from.b_c);
  add(into.b_o, from.b_o);
  add(into.w_y, from.w_y);
  add(into.b_y, from.b_y);
}

double gradient_norm(const LstmGradients& g) {
  double sq = 0.0;
  for (const auto* v :
       {&g.w_f, &g.w_i, &g.w_c, &g.w_o, &g.b_f, &g.b_i, &g.b_c, &g.b_o, &g.w_y,
        &g.b_y})
    for (double x : *v) sq += x * x;
  return std::sqrt(sq);
}

void scale_gradients(LstmGradients& g, double s) {
  for (auto* v : {&g.w_f, &g.w_i, &g.w_c, &g.w_o, &g.b_f, &g.b_i, &g.b_c,
                  &g.b_o, &g.w_y, &g.b_y})
    for (double& x : *v) x *= s;
}

void apply_update(LstmParams& p, const LstmGradients& g, double lr) {
  auto upd = [lr](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= lr * b[i];
  };
  upd(p.w_f, g.w_f);
  upd(p.w_i, g.w_i);
  upd(p.w_c, g.w_c);
  upd(p.w_o, g.w_o);
  upd(p.b_f, g.b_f);
  upd(p.b_i, g.b_i);
  upd(p.b_c, g.b_c);
  upd(p.b_o, g.b_o);
  upd(p.w_y, g.w_y);
  upd(p.b_y, g.b_y);
}

// Aggregate MSE over a sequence set (total squared error / total elements).
double dataset_mse(const LstmParams& p, const std::vector<Sequence>& seqs) {
  if (seqs.empty()) return 0.0;
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& seq : seqs) {
    auto ys = forward_sequence(p, seq.inputs);
    for (std::size_t t = 0; t < ys.size(); ++t)
      for (std::size_t k = 0; k < ys[t].size(); ++k) {
        const double d = ys[t][k] - seq.targets[t][k];
        sq += d * d;
        ++count;
      }
  }
  return count ? sq / count : 0.0;
}

// Cholesky factorization in place; returns false if not positive definite.
bool cholesky(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
  return true;
}

// dist^2 = d^T Sigma^{-1} d given the Cholesky factor L of Sigma.
double mahalanobis_sq(const std::vector<double>& chol, int n,
                      const std::vector<double>& d) {
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double s = d[i];
    for (int k = 0; k < i; ++k) s -= chol[i * n + k] * y[k];
    y[i] = s / chol[i * n + i];
  }
  double sq = 0.0;
  for (int i = 0; i < n; ++i) sq += y[i] * y[i];
  return sq;
}

}  // namespace

LstmParams LstmParams::seeded(int input_size, int hidden_size, int output_size,
                              std::uint64_t seed) {
  if (input_size < 1 || hidden_size < 1 || output_size < 1)
    throw std::invalid_argument("LstmParams: sizes must be >= 1");
  LstmParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.output_size = output_size;
  const std::size_t gate = static_cast<std::size_t>(hidden_size) *
                           (hidden_size + input_size);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
    return 0.2 * u - 0.1;
  };
  auto fill = [&uniform](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = uniform();
  };
  fill(p.w_f, gate);
  fill(p.w_i, gate);
  fill(p.w_c, gate);
  fill(p.w_o, gate);
  fill(p.b_f, hidden_size);
  fill(p.b_i, hidden_size);
  fill(p.b_c, hidden_size);
  fill(p.b_o, hidden_size);
  fill(p.w_y, static_cast<std::size_t>(output_size) * hidden_size);
  fill(p.b_y, output_size);
  return p;
}

std::size_t LstmParams::parameter_count() const {
  return w_f.size() + w_i.size() + w_c.size() + w_o.size() + b_f.size() +
         b_i.size() + b_c.size() + b_o.size() + w_y.size() + b_y.size();
}

void LstmParams::check_shapes() const {
  const std::size_t gate = static_cast<std::size_t>(hidden_size) *
                           (hidden_size + input_size);
  const bool ok = w_f.size() == gate && w_i.size() == gate &&
                  w_c.size() == gate && w_o.size() == gate &&
                  b_f.size() == static_cast<std::size_t>(hidden_size) &&
                  b_i.size() == static_cast<std::size_t>(hidden_size) &&
                  b_c.size() == static_cast<std::size_t>(hidden_size) &&
                  b_o.size() == static_cast<std::size_t>(hidden_size) &&
                  w_y.size() == static_cast<std::size_t>(output_size) * hidden_size &&
                  b_y.size() == static_cast<std::size_t>(output_size);
  if (!ok) throw std::invalid_argument("LstmParams: inconsistent shapes");
  for (const auto* v : {&w_f, &w_i, &w_c, &w_o, &b_f, &b_i, &b_c, &b_o, &w_y, &b_y})
    for (double x : *v)
      if (!std::isfinite(x))
        throw std::invalid_argument("LstmParams: non-finite value");
}

LstmState lstm_cell(const LstmParams& p, const LstmState& state,
                    std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.input_size)
    throw std::invalid_argument("lstm_cell: input width mismatch");
  if (static_cast<int>(state.h.size()) != p.hidden_size ||
      static_cast<int>(state.c.size()) != p.hidden_size)
    throw std::invalid_argument("lstm_cell: state size mismatch");

  const int hidden = p.hidden_size;
  const int z_size = hidden + p.input_size;
  std::vector<double> z(z_size);
  std::copy(state.h.begin(), state.h.end(), z.begin());
  std::copy(x.begin(), x.end(), z.begin() + hidden);

  std::vector<double> f = p.b_f, i = p.b_i, g = p.b_c, o = p.b_o;
  matvec_add(p.w_f, hidden, z_size, z.data(), f.data());
  matvec_add(p.w_i, hidden, z_size, z.data(), i.data());
  matvec_add(p.w_c, hidden, z_size, z.data(), g.data());
  matvec_add(p.w_o, hidden, z_size, z.data(), o.data());

  LstmState next = LstmState::zero(hidden);
  for (int k = 0; k < hidden; ++k) {
    const double fk = sigmoid(f[k]);
    const double ik = sigmoid(i[k]);
    const double gk = std::tanh(g[k]);
    const double ok = sigmoid(o[k]);
    next.c[k] = fk * state.c[k] + ik * gk;
    next.h[k] = ok * std::tanh(next.c[k]);
  }
  return next;
}

std::vector<std::vector<double>> forward_sequence(
    const LstmParams& p, const std::vector<std::vector<double>>& inputs) {
  if (inputs.empty())
    throw std::invalid_argument("forward_sequence: empty sequence");
  LstmState state = LstmState::zero(p.hidden_size);
  std::vector<std::vector<double>> ys;
  ys.reserve(inputs.size());
  for (const auto& x : inputs) {
    state = lstm_cell(p, state, x);
    std::vector<double> y = p.b_y;
    matvec_add(p.w_y, p.output_size, p.hidden_size, state.h.data(), y.data());
    ys.push_back(std::move(y));
  }
  return ys;
}

namespace {

double squared_error_sum(const LstmParams& p, const Sequence& seq) {
  ForwardCache cache;
  forward_with_cache(p, seq, cache);
  const int steps = cache.steps, out = cache.o;
  double sq = 0.0;
  for (int t = 0; t < steps; ++t)
    for (int k = 0; k < out; ++k) {
      const double d = cache.ys[static_cast<std::size_t>(t) * out + k] -
                       seq.targets[t][k];
      sq += d * d;
    }
  return sq;
}

}  // namespace

double sequence_mse(const LstmParams& p, const Sequence& seq) {
  return squared_error_sum(p, seq) /
         (static_cast<double>(seq.inputs.size()) * p.output_size);
}

double sequence_objective(const LstmParams& p, const Sequence& seq) {
  return squared_error_sum(p, seq) / p.output_size;
}

LstmGradients bptt_gradients(const LstmParams& p, const Sequence& seq,
                             double* objective_out) {
  if (seq.inputs.empty() || seq.inputs.size() != seq.targets.size())
    throw std::invalid_argument("bptt_gradients: malformed sequence");
  const int hidden = p.hidden_size, out = p.output_size;
  const int z_size = hidden + p.input_size;

  ForwardCache cache;
  forward_with_cache(p, seq, cache);
  const int steps = cache.steps;

  LstmGradients grads;
  zero_like(p, grads);

  const double scale = 2.0 / out;
  double sq = 0.0;

  std::vector<double> dh(hidden, 0.0), dc(hidden, 0.0);
  std::vector<double> dy(out), da_f(hidden), da_i(hidden), da_c(hidden),
      da_o(hidden), dz(z_size);

  for (int t = steps - 1; t >= 0; --t) {
    const double* y = &cache.ys[static_cast<std::size_t>(t) * out];
    const double* h = &cache.hs[static_cast<std::size_t>(t) * hidden];
    for (int k = 0; k < out; ++k) {
      const double d = y[k] - seq.targets[t][k];
      sq += d * d;
      dy[k] = scale * d;
    }
    outer_add(grads.w_y, out, hidden, dy.data(), h);
    for (int k = 0; k < out; ++k) grads.b_y[k] += dy[k];
    matvec_transpose_add(p.w_y, out, hidden, dy.data(), dh.data());

    const double* f = &cache.fs[static_cast<std::size_t>(t) * hidden];
    const double* i = &cache.is[static_cast<std::size_t>(t) * hidden];
    const double* g = &cache.gs[static_cast<std::size_t>(t) * hidden];
    const double* o = &cache.os[static_cast<std::size_t>(t) * hidden];
    const double* tc = &cache.tanh_cs[static_cast<std::size_t>(t) * hidden];
    const double* c_prev =
        t > 0 ? &cache.cs[static_cast<std::size_t>(t - 1) * hidden] : nullptr;

    for (int k = 0; k < hidden; ++k) {
      const double do_k = dh[k] * tc[k];
      dc[k] += dh[k] * o[k] * (1.0 - tc[k] * tc[k]);
      da_o[k] = do_k * o[k] * (1.0 - o[k]);
      const double cp = c_prev ? c_prev[k] : 0.0;
      const double df = dc[k] * cp;
      const double di = dc[k] * g[k];
      const double dg = dc[k] * i[k];
      da_f[k] = df * f[k] * (1.0 - f[k]);
      da_i[k] = di * i[k] * (1.0 - i[k]);
      da_c[k] = dg * (1.0 - g[k] * g[k]);
      dc[k] *= f[k];  // becomes dC_{t-1}
    }

    const double* z = &cache.zs[static_cast<std::size_t>(t) * z_size];
    outer_add(grads.w_f, hidden, z_size, da_f.data(), z);
    outer_add(grads.w_i, hidden, z_size, da_i.data(), z);
    outer_add(grads.w_c, hidden, z_size, da_c.data(), z);
    outer_add(grads.w_o, hidden, z_size, da_o.data(), z);
    for (int k = 0; k < hidden; ++k) {
      grads.b_f[k] += da_f[k];
      grads.b_i[k] += da_i[k];
      grads.b_c[k] += da_c[k];
      grads.b_o[k] += da_o[k];
    }

    std::fill(dz.begin(), dz.end(), 0.0);
    matvec_transpose_add(p.w_f, hidden, z_size, da_f.data(), dz.data());
    matvec_transpose_add(p.w_i, hidden, z_size, da_i.data(), dz.data());
    matvec_transpose_add(p.w_c, hidden, z_size, da_c.data(), dz.data());
    matvec_transpose_add(p.w_o, hidden, z_size, da_o.data(), dz.data());
    std::copy(dz.begin(), dz.begin() + hidden, dh.begin());
  }

  if (objective_out) *objective_out = sq / out;
  return grads;
}

TrainResult train_bptt(const std::vector<Sequence>& train,
                       const std::vector<Sequence>& test,
                       const TrainHyper& hyper) {
  if (train.empty()) throw ConfigError("train_bptt: no training sequences");
  const int input = static_cast<int>(train.front().inputs.front().size());
  const int output = static_cast<int>(train.front().targets.front().size());

  TrainResult result;
  result.params = LstmParams::seeded(input, hyper.hidden_size, output, hyper.seed);

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (const auto& seq : train) {
      LstmGradients grads = bptt_gradients(result.params, seq);
      if (hyper.clip_norm > 0.0) {
        const double norm = gradient_norm(grads);
        if (norm > hyper.clip_norm) scale_gradients(grads, hyper.clip_norm / norm);
      }
      apply_update(result.params, grads, hyper.lr);
    }
    const double train_mse = dataset_mse(result.params, train);
    const double test_mse = dataset_mse(result.params, test);
    if (!std::isfinite(train_mse))
      throw TrainingError("train_bptt: loss diverged", epoch);
    result.loss_curve.push_back({epoch, train_mse, test_mse});
  }
  return result;
}

Normalizer::Normalizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size())
    throw std::invalid_argument("Normalizer: mean/std size mismatch");
}

Normalizer Normalizer::fit(const std::vector<std::vector<double>>& rows,
                           const std::vector<std::string>& names) {
  if (rows.size() < 2) throw ConfigError("Normalizer: need >= 2 rows");
  const std::size_t d = rows.front().size();
  std::vector<double> mean(d, 0.0), stddev(d, 0.0);
  for (const auto& row : rows) {
    if (row.size() != d) throw std::invalid_argument("Normalizer: ragged rows");
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= rows.size();
  for (const auto& row : rows)
    for (std::size_t k = 0; k < d; ++k)
      stddev[k] += (row[k] - mean[k]) * (row[k] - mean[k]);
  for (std::size_t k = 0; k < d; ++k) {
    stddev[k] = std::sqrt(stddev[k] / rows.size());  // population convention
    if (!(stddev[k] > 0.0)) {
      std::ostringstream msg;
      msg << "Normalizer: feature "
          << (k < names.size() ? "'" + names[k] + "'" : std::to_string(k))
          << " has zero variance";
      throw ConfigError(msg.str());
    }
  }
  return Normalizer(std::move(mean), std::move(stddev));
}

std::vector<double> Normalizer::apply(std::span<const double> row) const {
  if (row.size() != mean_.size())
    throw std::invalid_argument("Normalizer::apply: width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k)
    out[k] = (row[k] - mean_[k]) / stddev_[k];
  return out;
}

std::vector<double> Normalizer::invert(std::span<const double> row) const {
  if (row.size() != mean_.size())
    throw std::invalid_argument("Normalizer::invert: width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k)
    out[k] = row[k] * stddev_[k] + mean_[k];
  return out;
}

std::vector<std::size_t> mahalanobis_reduce(
    const std::vector<std::vector<double>>& rows, double tau) {
  if (rows.size() < 2) throw std::invalid_argument("mahalanobis_reduce: need >= 2 rows");
  const int d = static_cast<int>(rows.front().size());
  std::vector<double> mean(d, 0.0);
  for (const auto& row : rows)
    for (int k = 0; k < d; ++k) mean[k] += row[k];
  for (double& m : mean) m /= rows.size();
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  for (const auto& row : rows)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        cov[a * d + b] += (row[a] - mean[a]) * (row[b] - mean[b]);
  for (double& v : cov) v /= (rows.size() - 1);
  return mahalanobis_reduce(rows, tau, cov);
}

std::vector<std::size_t> mahalanobis_reduce(
    const std::vector<std::vector<double>>& rows, double tau,
    const std::vector<double>& covariance) {
  if (rows.size() < 2) throw std::invalid_argument("mahalanobis_reduce: need >= 2 rows");
  const int d = static_cast<int>(rows.front().size());
  if (covariance.size() != static_cast<std::size_t>(d) * d)
    throw std::invalid_argument("mahalanobis_reduce: covariance shape mismatch");

  std::vector<double> chol = covariance;
  double eps = 1e-8;
  while (!cholesky(chol, d)) {
    chol = covariance;
    for (int k = 0; k < d; ++k) chol[k * d + k] += eps;
    eps *= 10.0;
    if (eps > 1e2)
      throw std::invalid_argument("mahalanobis_reduce: covariance not invertible");
  }

  std::vector<std::size_t> retained;
  std::vector<double> diff(d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool keep = true;
    for (std::size_t s : retained) {
      for (int k = 0; k < d; ++k) diff[k] = rows[r][k] - rows[s][k];
      if (std::sqrt(mahalanobis_sq(chol, d, diff)) < tau) {
        keep = false;
        break;
      }
    }
    if (keep) retained.push_back(r);
  }
  return retained;
}

TableDataset dataset_from_table(const CsvTable& table) {
  TableDataset data;
  const int run_col = table.column("run_id");
  const int t_col = table.require_column("time_s");
  const int x_col = table.require_column("x_m");
  const int temp_col = table.require_column("temperature_K");
  const int qr_col = table.require_column("q_rad_W_m2");
  const int qc_col = table.require_column("q_cond_W_m2");
  for (const auto& row : table.rows) {
    data.run_id.push_back(run_col >= 0 ? row[run_col] : 0.0);
    data.t.push_back(row[t_col]);
    data.x.push_back(row[x_col]);
    data.temperature.push_back(row[temp_col]);
    data.q_rad.push_back(row[qr_col]);
    data.q_cond.push_back(row[qc_col]);
  }
  return data;
}

namespace {

// Row indices per (run, node) series, each sorted by time.
std::map<std::pair<double, double>, std::vector<std::size_t>> group_series(
    const TableDataset& data) {
  std::map<std::pair<double, double>, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < data.size(); ++r)
    groups[{data.run_id[r], data.x[r]}].push_back(r);
  for (auto& [key, rows] : groups)
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return data.t[a] < data.t[b];
    });
  return groups;
}

}  // namespace

PipelineResult train_surrogate(const TableDataset& data,
                               const PipelineHyper& hyper) {
  if (data.size() < 2) throw ConfigError("train_surrogate: dataset too small");
  if (hyper.window < 2) throw ConfigError("train_surrogate: window must be >= 2");
  if (hyper.stride < 1) throw ConfigError("train_surrogate: stride must be >= 1");
  if (!(hyper.train_fraction > 0.0 && hyper.train_fraction <= 1.0))
    throw ConfigError("train_surrogate: train_fraction must be in (0, 1]");

  // Chronological split over the distinct times in the dataset.
  std::vector<double> times(data.t.begin(), data.t.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::size_t n_train_times = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(hyper.train_fraction * times.size())));
  const double split_time = times[n_train_times - 1];

  std::vector<std::vector<double>> train_feat_rows, train_target_rows;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (data.t[r] <= split_time) {
      train_feat_rows.push_back({data.t[r], data.x[r]});
      train_target_rows.push_back(
          {data.temperature[r], data.q_rad[r], data.q_cond[r]});
    }
  }
  SurrogateModel model;
  model.features = Normalizer::fit(train_feat_rows, {"time_s", "x_m"});
  model.targets = Normalizer::fit(
      train_target_rows, {"temperature_K", "q_rad_W_m2", "q_cond_W_m2"});

  // Windowed sequences per (run, node) series.
  std::vector<Sequence> train_seqs, test_seqs;
  std::vector<std::vector<double>> train_summary;  // for optional reduction
  const auto groups = group_series(data);
  for (const auto& [key, rows] : groups) {
    const int len = static_cast<int>(rows.size());
    const int window = std::min(hyper.window, len);
    if (window < 2) continue;
    for (int start = 0;; start += hyper.stride) {
      if (start + window > len) break;
      Sequence seq;
      std::vector<double> summary(5, 0.0);
      for (int j = start; j < start + window; ++j) {
        const std::size_t r = rows[j];
        seq.inputs.push_back(model.features.apply(
            std::vector<double>{data.t[r], data.x[r]}));
        seq.targets.push_back(model.targets.apply(std::vector<double>{
            data.temperature[r], data.q_rad[r], data.q_cond[r]}));
        for (int k = 0; k < 2; ++k) summary[k] += seq.inputs.back()[k];
        for (int k = 0; k < 3; ++k) summary[2 + k] += seq.targets.back()[k];
      }
      for (double& v : summary) v /= window;
      const double last_t = data.t[rows[start + window - 1]];
      if (last_t <= split_time) {
        train_seqs.push_back(std::move(seq));
        train_summary.push_back(std::move(summary));
      } else {
        test_seqs.push_back(std::move(seq));
      }
      if (start + window == len) break;
    }
  }
  if (train_seqs.empty())
    throw ConfigError("train_surrogate: no training windows (series shorter than the window?)");

  if (hyper.reduce_tau > 0.0 && train_seqs.size() >= 2) {
    const auto keep = mahalanobis_reduce(train_summary, hyper.reduce_tau);
    std::vector<Sequence> reduced;
    reduced.reserve(keep.size());
    for (std::size_t idx : keep) reduced.push_back(std::move(train_seqs[idx]));
    train_seqs = std::move(reduced);
  }

  TrainResult trained = train_bptt(train_seqs, test_seqs, hyper.train);
  model.params = std::move(trained.params);

  PipelineResult result;
  result.model = std::move(model);
  result.loss_curve = std::move(trained.loss_curve);
  result.split_time = split_time;
  return result;
}

SurrogatePredictions predict_rows(const SurrogateModel& model,
                                  const TableDataset& data) {
  SurrogatePredictions pred;
  pred.temperature.assign(data.size(), 0.0);
  pred.q_rad.assign(data.size(), 0.0);
  pred.q_cond.assign(data.size(), 0.0);
  const auto groups = group_series(data);
  for (const auto& [key, rows] : groups) {
    std::vector<std::vector<double>> inputs;
    inputs.reserve(rows.size());
    for (std::size_t r : rows)
      inputs.push_back(model.features.apply(std::vector<double>{data.t[r], data.x[r]}));
    const auto ys = forward_sequence(model.params, inputs);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto physical = model.targets.invert(ys[j]);
      pred.temperature[rows[j]] = physical[0];
      pred.q_rad[rows[j]] = physical[1];
      pred.q_cond[rows[j]] = physical[2];
    }
  }
  return pred;
}

void save_model(const SurrogateModel& model, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = 1;
  doc["input_size"] = model.params.input_size;
  doc["hidden_size"] = model.params.hidden_size;
  doc["output_size"] = model.params.output_size;
  doc["w_f"] = model.params.w_f;
  doc["w_i"] = model.params.w_i;
  doc["w_c"] = model.params.w_c;
  doc["w_o"] = model.params.w_o;
  doc["b_f"] = model.params.b_f;
  doc["b_i"] = model.params.b_i;
  doc["b_c"] = model.params.b_c;
  doc["b_o"] = model.params.b_o;
  doc["w_y"] = model.params.w_y;
  doc["b_y"] = model.params.b_y;
  doc["feature_names"] = model.feature_names;
  doc["target_names"] = model.target_names;
  doc["normalizer"]["feature_mean"] = model.features.mean();
  doc["normalizer"]["feature_std"] = model.features.stddev();
  doc["normalizer"]["target_mean"] = model.targets.mean();
  doc["normalizer"]["target_std"] = model.targets.stddev();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model to '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

std::vector<ComparisonRow> compare_rows(const TableDataset& profile,
                                        const RowPredictor& predictor) {
  const SurrogatePredictions pred = predictor(profile);
  if (pred.temperature.size() != profile.size())
    throw std::invalid_argument("compare_rows: predictor row count mismatch");
  std::vector<ComparisonRow> rows;
  rows.reserve(profile.size());
  for (std::size_t r = 0; r < profile.size(); ++r) {
    const double numeric = profile.temperature[r];
    const double predicted = pred.temperature[r];
    rows.push_back({profile.t[r], profile.x[r], numeric, predicted,
                    std::abs(predicted - numeric)});
  }
  return rows;
}

SurrogateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != 1)
    throw ConfigError("model checkpoint has an unsupported format_version");

  SurrogateModel model;
  model.params.input_size = doc.at("input_size").get<int>();
  model.params.hidden_size = doc.at("hidden_size").get<int>();
  model.params.output_size = doc.at("output_size").get<int>();
  model.params.w_f = doc.at("w_f").get<std::vector<double>>();
  model.params.w_i = doc.at("w_i").get<std::vector<double>>();
  model.params.w_c = doc.at("w_c").get<std::vector<double>>();
  model.params.w_o = doc.at("w_o").get<std::vector<double>>();
  model.params.b_f = doc.at("b_f").get<std::vector<double>>();
  model.params.b_i = doc.at("b_i").get<std::vector<double>>();
  model.params.b_c = doc.at("b_c").get<std::vector<double>>();
  model.params.b_o = doc.at("b_o").get<std::vector<double>>();
  model.params.w_y = doc.at("w_y").get<std::vector<double>>();
  model.params.b_y = doc.at("b_y").get<std::vector<double>>();
  model.params.check_shapes();
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.target_names = doc.at("target_names").get<std::vector<std::string>>();
  model.features = Normalizer(
      doc.at("normalizer").at("feature_mean").get<std::vector<double>>(),
      doc.at("normalizer").at("feature_std").get<std::vector<double>>());
  model.targets = Normalizer(
      doc.at("normalizer").at("target_mean").get<std::vector<double>>(),
      doc.at("normalizer").at("target_std").get<std::vector<double>>());
  return model;
}

}  // namespace thermoflux
