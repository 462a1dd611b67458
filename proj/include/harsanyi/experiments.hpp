#pragma once

// Desk-scale experiment runners. Each returns plain result structs; the
// writers at the bottom turn them into CSV files plus a JSON manifest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"
#include "harsanyi/metrics.hpp"
#include "harsanyi/mlp.hpp"
#include "harsanyi/parallel.hpp"
#include "harsanyi/salience.hpp"
#include "harsanyi/table_io.hpp"
#include "harsanyi/taylor.hpp"

namespace harsanyi {

inline constexpr int kCsvSchemaVersion = 1;

// splitmix64 of (base, stream): independent seeds for data, init, shuffling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kDataStream = 1, kInitStream, kShuffleStream, kNoiseStream, kTargetStream, kEvalStream, kPerturbStream };

// Spearman rank correlation; tied values share their average rank.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DimensionError("spearman needs two equal-length series of length >= 2");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// --- model value tables -----------------------------------------------------

// All 2^n masked copies of `sample`, one per column, column index == mask.
inline Eigen::MatrixXd masked_inputs(std::span<const double> sample,
                                     std::span<const double> baseline) {
  if (sample.size() != baseline.size()) throw DimensionError("sample and baseline differ in length");
  const int n = static_cast<int>(sample.size());
  check_variable_count(n);
  const auto size = static_cast<Eigen::Index>(table_size(n));
  Eigen::MatrixXd x(n, size);
  for (Eigen::Index m = 0; m < size; ++m) {
    for (int i = 0; i < n; ++i) x(i, m) = ((m >> i) & 1) ? sample[i] : baseline[i];
  }
  return x;
}

// v(x_T) for every T: the logit value of class `truth`, or output 0 when
// truth < 0.
inline ValueTable model_value_table(const MlpModel& model, std::span<const double> sample,
                                    std::span<const double> baseline, int truth) {
  const Eigen::MatrixXd out = model.forward_batch(masked_inputs(sample, baseline));
  std::vector<double> v(static_cast<std::size_t>(out.cols()));
  for (Eigen::Index m = 0; m < out.cols(); ++m) {
    v[m] = truth < 0 ? out(0, m) : logit_value(out.col(m), truth);
    if (!std::isfinite(v[m])) {
      throw EvaluationError(static_cast<Mask>(m), "model produced a non-finite value");
    }
  }
  return ValueTable(static_cast<int>(sample.size()), std::move(v));
}

inline std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

// --- synthetic classification task ------------------------------------------

inline constexpr int kSyntheticClasses = 4;

struct SyntheticTaskConfig {
  int n = 10;
  int train_size = 400;
  int test_size = 400;
  // Features are feature_scale * N(0, 1); the rule reads x_i / feature_scale.
  double feature_scale = 0.5;
  std::uint64_t seed = 0;
};

inline constexpr double kRuleThreshold = 0.5;

// Planted rule on the first four features; the rest are distractors. With
// A_i = [x_i > 0.5]: class = 2 (A0 or A1) + (A2 or A3). The mean baseline
// (about 0) reads as every A_i off.
inline int synthetic_rule(std::span<const double> x, double feature_scale = 1.0) {
  auto on = [&](int i) { return x[i] > kRuleThreshold * feature_scale; };
  return 2 * ((on(0) || on(1)) ? 1 : 0) + ((on(2) || on(3)) ? 1 : 0);
}

struct SyntheticTask {
  Dataset train;
  Dataset test;
  std::vector<double> mean;  // per-feature mean of the training inputs
};

inline SyntheticTask make_synthetic_task(const SyntheticTaskConfig& config) {
  if (config.n < 4) throw DimensionError("synthetic task needs n >= 4");
  check_variable_count(config.n);
  if (config.train_size < 1 || config.test_size < 1) {
    throw DimensionError("synthetic task needs nonempty splits");
  }
  if (!(config.feature_scale > 0.0)) throw DimensionError("feature_scale must be > 0");
  std::mt19937_64 rng(derive_seed(config.seed, kDataStream));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](int rows) {
    Dataset d;
    d.classes = kSyntheticClasses;
    d.inputs.resize(config.n, rows);
    d.labels.resize(static_cast<std::size_t>(rows));
    std::vector<double> x(static_cast<std::size_t>(config.n));
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < config.n; ++i) {
        x[i] = config.feature_scale * gauss(rng);
        d.inputs(i, r) = x[i];
      }
      d.labels[r] = synthetic_rule(x, config.feature_scale);
    }
    return d;
  };
  SyntheticTask t;
  t.train = draw(config.train_size);
  t.test = draw(config.test_size);
  const Eigen::VectorXd mean = t.train.inputs.rowwise().mean();
  t.mean.assign(mean.data(), mean.data() + mean.size());
  return t;
}

struct ClassifierConfig {
  std::vector<int> hidden = {64, 64, 64};
  double init_scale = 1.0;
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 32;
};

inline TrainConfig classifier_train_config(const ClassifierConfig& c, std::uint64_t seed,
                                           double rho, std::vector<int> snapshots) {
  TrainConfig t;
  t.learning_rate = c.learning_rate;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.loss = Loss::kCrossEntropy;
  t.snapshot_epochs = std::move(snapshots);
  t.label_noise = rho;
  t.noise_seed = derive_seed(seed, kNoiseStream);
  t.shuffle_seed = derive_seed(seed, kShuffleStream);
  return t;
}

inline MlpModel init_classifier(const ClassifierConfig& c, int n, std::uint64_t seed) {
  std::vector<int> widths{n};
  widths.insert(widths.end(), c.hidden.begin(), c.hidden.end());
  widths.push_back(kSyntheticClasses);
  return init_model({widths, derive_seed(seed, kInitStream), c.init_scale});
}

inline double accuracy(const MlpModel& model, const Dataset& d, std::span<const int> labels) {
  const Eigen::MatrixXd out = model.forward_batch(d.inputs);
  int hits = 0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    Eigen::Index best = 0;
    out.col(c).maxCoeff(&best);
    if (best == labels[c]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(out.cols());
}

// --- learning dynamics on the boolean cube ----------------------------------

// 0, 1, 2, ... growing by ~25% per step with at most epochs/40 between
// snapshots; always ends at `epochs`.
inline std::vector<int> snapshot_grid(int epochs) {
  std::vector<int> grid;
  const int cap = std::max(1, epochs / 40);
  for (int e = 0; e < epochs; e = std::max(e + 1, std::min(e * 5 / 4, e + cap))) {
    grid.push_back(e);
  }
  grid.push_back(epochs);
  return grid;
}

struct DynamicsConfig {
  int n = 10;
  int order = 2;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {32, 32, 32, 32};
  double init_scale = 1.0;
  double learning_rate = 0.05;
  int epochs = 2000;
  int batch_size = 32;
  // 0 evaluates every cube point; otherwise a seeded subset of this size.
  int eval_points = 0;
  // Snapshot epochs; empty means snapshot_grid(epochs).
  std::vector<int> snapshots;
};

struct DynamicsResult {
  Mask target = 0;
  std::vector<Mask> eval_points;
  std::vector<int> epochs;
  // strength[k][m] = E_x sum_{|S|=m} |I(S|x)| at epochs[k]
  std::vector<std::vector<double>> strength;
  std::vector<double> loss;  // training loss per epoch, epoch 1 first
};

// A seeded target S* of the requested order.
inline Mask random_target(int n, int order, std::uint64_t seed) {
  check_variable_count(n);
  if (order < 1 || order > n) throw DimensionError("target order outside [1, n]");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, kTargetStream));
  std::shuffle(idx.begin(), idx.end(), rng);
  Mask t = 0;
  for (int k = 0; k < order; ++k) t |= Mask{1} << idx[k];
  return t;
}

// Per-order strengths on cube points with baseline 0. For a cube point x,
// x_T is the cube point x & T, so one forward pass over the cube supplies
// every value table.
inline std::vector<double> cube_order_strength(std::span<const double> cube_outputs, int n,
                                               std::span<const Mask> points) {
  std::vector<double> strength(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> f(table_size(n));
  for (Mask x : points) {
    for (Mask t = 0; t < f.size(); ++t) f[t] = cube_outputs[x & t];
    mobius_in_place(f, n);
    for (Mask s = 0; s < f.size(); ++s) strength[popcount(s)] += std::abs(f[s]);
  }
  for (double& s : strength) s /= static_cast<double>(points.size());
  return strength;
}

inline DynamicsResult run_learning_dynamics(const DynamicsConfig& c) {
  check_variable_count(c.n);
  DynamicsResult r;
  r.target = random_target(c.n, c.order, c.seed);
  const Dataset cube = make_boolean_cube(c.n, and_concept_target(VariableSet(r.target, c.n)));

  const auto size = static_cast<Mask>(table_size(c.n));
  if (c.eval_points <= 0 || static_cast<Mask>(c.eval_points) >= size) {
    r.eval_points.resize(size);
    std::iota(r.eval_points.begin(), r.eval_points.end(), Mask{0});
  } else {
    std::vector<Mask> all(size);
    std::iota(all.begin(), all.end(), Mask{0});
    std::mt19937_64 rng(derive_seed(c.seed, kEvalStream));
    std::shuffle(all.begin(), all.end(), rng);
    r.eval_points.assign(all.begin(), all.begin() + c.eval_points);
    std::sort(r.eval_points.begin(), r.eval_points.end());
  }

  std::vector<int> widths{c.n};
  widths.insert(widths.end(), c.hidden.begin(), c.hidden.end());
  widths.push_back(1);
  TrainConfig t;
  t.learning_rate = c.learning_rate;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.loss = Loss::kMse;
  t.snapshot_epochs = c.snapshots.empty() ? snapshot_grid(c.epochs) : c.snapshots;
  t.shuffle_seed = derive_seed(c.seed, kShuffleStream);
  auto trained = train(init_model({widths, derive_seed(c.seed, kInitStream), c.init_scale}), cube, t);

  for (const auto& snap : trained.snapshots) {
    const Eigen::MatrixXd out = snap.model().forward_batch(cube.inputs);
    const std::vector<double> v(out.data(), out.data() + out.size());
    r.epochs.push_back(snap.epoch());
    r.strength.push_back(cube_order_strength(v, c.n, r.eval_points));
  }
  r.loss = std::move(trained.epoch_loss);
  return r;
}

// --- label noise and over-fitting -------------------------------------------

struct NoiseOverfitConfig {
  SyntheticTaskConfig task;
  ClassifierConfig model;
  std::vector<double> rhos = {0.0, 0.1, 0.3};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int eval_samples = 32;  // first rows of the training split
  std::vector<int> sim_orders = {1, 2, 3};
  int snapshot_every = 10;
  // Extra snapshot epochs on top of the uniform grid.
  std::vector<int> snapshots;
  int threads = 1;
};

struct NoiseCell {
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> strength;  // normalized strength, orders 0..n
  std::vector<int> epochs;
  std::vector<std::vector<double>> progress;  // [sim order index][epoch index]
  double train_accuracy = 0.0;  // against the labels trained on
  double test_accuracy = 0.0;
};

struct NoiseOverfitResult {
  std::vector<NoiseCell> cells;  // rho-major, then seed
};

inline std::vector<int> uniform_grid(int epochs, int every, std::vector<int> extra = {}) {
  if (every < 1) throw DimensionError("snapshot spacing must be >= 1");
  std::vector<int> grid = std::move(extra);
  for (int e = 0; e < epochs; e += every) grid.push_back(e);
  grid.push_back(epochs);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// The epoch at 25% of training; always on the noise-overfit grid.
inline int quarter_epoch(int epochs) { return static_cast<int>(std::lround(0.25 * epochs)); }

inline std::vector<InteractionTable> model_tables(const MlpModel& model, const Dataset& d,
                                                  std::span<const int> labels, int count,
                                                  std::span<const double> baseline) {
  std::vector<InteractionTable> out;
  for (int k = 0; k < count; ++k) {
    const auto x = column(d.inputs, k);
    out.push_back(mobius_transform(model_value_table(model, x, baseline, labels[k])));
  }
  return out;
}

inline NoiseOverfitResult run_noise_overfit(const NoiseOverfitConfig& c) {
  for (double rho : c.rhos) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DimensionError("rho outside [0, 1]");
  }
  if (c.eval_samples < 1 || c.eval_samples > c.task.train_size) {
    throw DimensionError("eval_samples must lie in [1, train_size]");
  }
  for (int m : c.sim_orders) check_order(c.task.n, m);

  NoiseOverfitResult result;
  result.cells.resize(c.rhos.size() * c.seeds.size());
  parallel_for(result.cells.size(), c.threads, [&](std::size_t cell) {
    const double rho = c.rhos[cell / c.seeds.size()];
    const std::uint64_t seed = c.seeds[cell % c.seeds.size()];
    auto task_cfg = c.task;
    task_cfg.seed = seed;
    const SyntheticTask task = make_synthetic_task(task_cfg);
    std::vector<int> extra = c.snapshots;
    extra.push_back(quarter_epoch(c.model.epochs));
    const auto grid = uniform_grid(c.model.epochs, c.snapshot_every, extra);
    auto trained = train(init_classifier(c.model, c.task.n, seed), task.train,
                         classifier_train_config(c.model, seed, rho, grid));

    NoiseCell out;
    out.rho = rho;
    out.seed = seed;
    out.train_accuracy = accuracy(trained.model, task.train, trained.labels);
    out.test_accuracy = accuracy(trained.model, task.test, task.test.labels);

    std::vector<ValueTable> values;
    std::vector<InteractionTable> finals;
    for (int k = 0; k < c.eval_samples; ++k) {
      const auto x = column(task.train.inputs, k);
      values.push_back(model_value_table(trained.model, x, task.mean, trained.labels[k]));
      finals.push_back(mobius_transform(values.back()));
    }
    for (int m = 0; m <= c.task.n; ++m) {
      out.strength.push_back(normalized_order_strength(finals, values, m));
    }

    out.progress.assign(c.sim_orders.size(), {});
    for (const auto& snap : trained.snapshots) {
      out.epochs.push_back(snap.epoch());
      const auto tables = model_tables(snap.model(), task.train, trained.labels,
                                       c.eval_samples, task.mean);
      for (std::size_t j = 0; j < c.sim_orders.size(); ++j) {
        out.progress[j].push_back(learning_progress(tables, finals, c.sim_orders[j]));
      }
    }
    result.cells[cell] = std::move(out);
  });
  return result;
}

// --- perturbation variance --------------------------------------------------

// Seven-layer, 100 units per hidden layer.
inline ClassifierConfig deep_classifier() {
  ClassifierConfig c;
  c.hidden.assign(6, 100);
  return c;
}

struct VarianceExperimentConfig {
  SyntheticTaskConfig task;
  ClassifierConfig model = deep_classifier();
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  int samples = 8;  // first rows of the training split
  double delta = 0.05;
  double tau_shift = 0.5;
  int trials = 20;
  BaselineRule rule = BaselineRule::kShifted;
  std::vector<int> orders = {1, 2, 3, 4, 5, 6};
  int threads = 1;
};

struct VarianceRow {
  std::uint64_t seed = 0;
  std::vector<int> orders;
  std::vector<double> variance;
  double spearman_log = 0.0;  // rank correlation of (s, log V^(s))
};

// V^(s) for one model; value = logit of the sample's label.
inline VarianceScanResult model_variance_scan(const MlpModel& model, const Dataset& d,
                                              std::span<const int> labels, int samples,
                                              std::span<const double> mu,
                                              const VarianceExperimentConfig& c,
                                              std::uint64_t perturb_seed) {
  if (samples < 1 || samples > d.rows()) throw DimensionError("sample count out of range");
  // Label lookup by sample index keeps the evaluator a plain function of x.
  VarianceScanResult total{c.orders, std::vector<double>(c.orders.size(), 0.0)};
  for (int k = 0; k < samples; ++k) {
    const int truth = labels[k];
    VarianceScanConfig vc;
    vc.perturbation = {c.delta, c.trials, derive_seed(perturb_seed, static_cast<std::uint64_t>(k))};
    vc.rule = c.rule;
    vc.tau_shift = c.tau_shift;
    vc.mu.assign(mu.begin(), mu.end());
    vc.orders = c.orders;
    vc.threads = 1;
    const auto one = effect_variance_scan(
        [&](std::span<const double> x) { return logit_value(model.forward(x), truth); },
        {column(d.inputs, k)}, vc);
    for (std::size_t j = 0; j < c.orders.size(); ++j) total.variance[j] += one.variance[j];
  }
  for (double& v : total.variance) v /= samples;
  return total;
}

inline std::vector<VarianceRow> run_variance_scan(const VarianceExperimentConfig& c) {
  if (c.trials < 2) throw DimensionError("variance scan needs at least two trials");
  std::vector<VarianceRow> rows(c.seeds.size());
  parallel_for(rows.size(), c.threads, [&](std::size_t i) {
    const std::uint64_t seed = c.seeds[i];
    auto task_cfg = c.task;
    task_cfg.seed = seed;
    const SyntheticTask task = make_synthetic_task(task_cfg);
    auto trained = train(init_classifier(c.model, c.task.n, seed), task.train,
                         classifier_train_config(c.model, seed, 0.0, {}));
    const auto scan = model_variance_scan(trained.model, task.train, trained.labels, c.samples,
                                          task.mean, c, derive_seed(seed, kPerturbStream));
    VarianceRow row{seed, scan.orders, scan.variance, 0.0};
    std::vector<double> s(row.orders.begin(), row.orders.end());
    std::vector<double> logv;
    for (double v : row.variance) logv.push_back(std::log(v));
    row.spearman_log = spearman(s, logv);
    rows[i] = std::move(row);
  });
  return rows;
}

// --- generalization similarity ----------------------------------------------

struct GeneralizationConfig {
  SyntheticTaskConfig task;
  ClassifierConfig model;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int per_category = 16;  // samples per category and split
  int threads = 1;
};

struct GeneralizationRow {
  std::uint64_t seed = 0;
  std::vector<double> similarity;  // orders 0..n
};

// Up to `per_category` interaction tables per true category, logit of that
// category as value.
inline CategorizedTables categorized_tables(const MlpModel& model, const Dataset& d,
                                            int per_category, std::span<const double> baseline) {
  CategorizedTables out;
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    auto& bucket = out[d.labels[r]];
    if (static_cast<int>(bucket.size()) >= per_category) continue;
    bucket.push_back(mobius_transform(model_value_table(model, column(d.inputs, r), baseline,
                                                        d.labels[r])));
  }
  return out;
}

inline std::vector<GeneralizationRow> run_generalization_similarity(const GeneralizationConfig& c) {
  if (c.per_category < 1) throw DimensionError("per_category must be >= 1");
  std::vector<GeneralizationRow> rows(c.seeds.size());
  parallel_for(rows.size(), c.threads, [&](std::size_t i) {
    const std::uint64_t seed = c.seeds[i];
    auto task_cfg = c.task;
    task_cfg.seed = seed;
    const SyntheticTask task = make_synthetic_task(task_cfg);
    auto trained = train(init_classifier(c.model, c.task.n, seed), task.train,
                         classifier_train_config(c.model, seed, 0.0, {}));
    const auto train_tables = categorized_tables(trained.model, task.train, c.per_category, task.mean);
    const auto test_tables = categorized_tables(trained.model, task.test, c.per_category, task.mean);
    GeneralizationRow row{seed, {}};
    for (int m = 0; m <= c.task.n; ++m) {
      row.similarity.push_back(generalization_similarity(train_tables, test_tables, m));
    }
    rows[i] = std::move(row);
  });
  return rows;
}

// --- sparsity ---------------------------------------------------------------

inline SyntheticTaskConfig large_task() {
  SyntheticTaskConfig c;
  c.train_size = 2000;
  return c;
}

inline ClassifierConfig small_classifier() {
  ClassifierConfig c;
  c.hidden = {32, 32};
  c.epochs = 100;
  return c;
}

struct SparsityConfig {
  SyntheticTaskConfig task = large_task();
  ClassifierConfig model = small_classifier();
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int samples = 8;  // first rows of the test split
  double ratio = kDefaultSalienceRatio;
  int threads = 1;
};

struct SparsitySample {
  std::uint64_t seed = 0;
  int sample = 0;
  SparsityCurve curve;
  OrderHistogram histogram;
  double near_zero = 0.0;
  double max_residual = 0.0;  // max_T |epsilon_T|
  double residual_bound = 0.0;
};

inline SparsitySample sparsity_of(const ValueTable& values, double ratio) {
  const auto table = mobius_transform(values);
  const auto salient = extract_salient(table, relative_threshold(table, ratio));
  SparsitySample s;
  s.curve = sparsity_curve(table);
  s.histogram = order_histogram(salient, table.n());
  s.near_zero = near_zero_fraction(table, ratio);
  for (double e : residual_table(values, salient)) s.max_residual = std::max(s.max_residual, std::abs(e));
  s.residual_bound = residual_bound(table, salient);
  return s;
}

inline std::vector<SparsitySample> model_sparsity(const MlpModel& model, const Dataset& d,
                                                  int samples, std::span<const double> baseline,
                                                  double ratio, std::uint64_t seed) {
  if (samples < 1 || samples > d.rows()) throw DimensionError("sample count out of range");
  std::vector<SparsitySample> out;
  for (int k = 0; k < samples; ++k) {
    auto s = sparsity_of(model_value_table(model, column(d.inputs, k), baseline, d.labels[k]), ratio);
    s.seed = seed;
    s.sample = k;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<SparsitySample> run_sparsity_report(const SparsityConfig& c) {
  std::vector<std::vector<SparsitySample>> per_seed(c.seeds.size());
  parallel_for(per_seed.size(), c.threads, [&](std::size_t i) {
    const std::uint64_t seed = c.seeds[i];
    auto task_cfg = c.task;
    task_cfg.seed = seed;
    const SyntheticTask task = make_synthetic_task(task_cfg);
    auto trained = train(init_classifier(c.model, c.task.n, seed), task.train,
                         classifier_train_config(c.model, seed, 0.0, {}));
    per_seed[i] = model_sparsity(trained.model, task.test, c.samples, task.mean, c.ratio, seed);
  });
  std::vector<SparsitySample> out;
  for (auto& v : per_seed) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// --- output files -----------------------------------------------------------

inline nlohmann::json to_json(const SyntheticTaskConfig& c) {
  return {{"n", c.n}, {"train_size", c.train_size}, {"test_size", c.test_size}, {"feature_scale", c.feature_scale},
          {"classes", kSyntheticClasses}, {"rule", "2 (x0>0.5 or x1>0.5) + (x2>0.5 or x3>0.5)"}};
}

inline nlohmann::json to_json(const ClassifierConfig& c) {
  return {{"hidden", c.hidden}, {"init_scale", c.init_scale},
          {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"optimizer", "sgd"}, {"activation", "relu"}};
}

inline nlohmann::json to_json(const DynamicsConfig& c) {
  return {{"n", c.n}, {"order", c.order}, {"seed", c.seed}, {"hidden", c.hidden},
          {"init_scale", c.init_scale}, {"learning_rate", c.learning_rate},
          {"epochs", c.epochs}, {"batch_size", c.batch_size}, {"eval_points", c.eval_points},
          {"baseline", "zero"}, {"loss", "mse"}, {"strength", "mean over x of sum over |S|=m"}};
}

inline nlohmann::json to_json(const NoiseOverfitConfig& c) {
  return {{"task", to_json(c.task)}, {"model", to_json(c.model)}, {"rhos", c.rhos},
          {"eval_samples", c.eval_samples}, {"sim_orders", c.sim_orders},
          {"snapshot_every", c.snapshot_every}, {"baseline", "train mean"},
          {"value", "logit of the trained label"}};
}

inline nlohmann::json to_json(const VarianceExperimentConfig& c) {
  return {{"task", to_json(c.task)}, {"model", to_json(c.model)}, {"samples", c.samples},
          {"delta", c.delta}, {"tau_shift", c.tau_shift}, {"trials", c.trials},
          {"baseline", c.rule == BaselineRule::kShifted ? "shifted" : "mean"},
          {"orders", c.orders}};
}

inline nlohmann::json to_json(const GeneralizationConfig& c) {
  return {{"task", to_json(c.task)}, {"model", to_json(c.model)},
          {"per_category", c.per_category}, {"baseline", "train mean"}};
}

inline nlohmann::json to_json(const SparsityConfig& c) {
  return {{"task", to_json(c.task)}, {"model", to_json(c.model)}, {"samples", c.samples},
          {"ratio", c.ratio}, {"baseline", "train mean"}};
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path) {
    if (!out_) throw FormatError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  ~CsvWriter() { out_.flush(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename Int>
    requires std::is_integral_v<Int>
  static std::string cell(Int v) { return std::to_string(v); }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_manifest(const std::filesystem::path& path, const std::string& experiment,
                           const nlohmann::json& config, const std::vector<std::uint64_t>& seeds,
                           const std::vector<std::string>& outputs,
                           const std::string& status = "ok") {
  nlohmann::json j;
  j["schema"] = "harsanyi-experiment";
  j["version"] = kCsvSchemaVersion;
  j["experiment"] = experiment;
  j["status"] = status;
  j["config"] = config;
  j["seeds"] = seeds;
  j["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline std::vector<std::string> order_columns(int n, const std::string& prefix = "order_") {
  std::vector<std::string> cols;
  for (int m = 0; m <= n; ++m) cols.push_back(prefix + std::to_string(m));
  return cols;
}

// epoch,loss,order_0..order_n
inline void write_dynamics_csv(const std::filesystem::path& path, const DynamicsResult& r, int n) {
  auto header = order_columns(n);
  header.insert(header.begin(), {"epoch", "loss"});
  CsvWriter csv(path, header);
  for (std::size_t k = 0; k < r.epochs.size(); ++k) {
    std::vector<std::string> cells{std::to_string(r.epochs[k])};
    cells.push_back(r.epochs[k] == 0 ? "" : format_double(r.loss[r.epochs[k] - 1]));
    for (double s : r.strength[k]) cells.push_back(format_double(s));
    csv.row(cells);
  }
}

// strength.csv: rho,seed,order,normalized_strength   (seed "mean" = average)
// progress.csv: rho,seed,epoch,order,similarity
// accuracy.csv: rho,seed,train_accuracy,test_accuracy
inline std::vector<std::string> write_noise_overfit(const std::filesystem::path& dir,
                                                    const NoiseOverfitResult& r,
                                                    const NoiseOverfitConfig& c) {
  {
    CsvWriter csv(dir / "strength.csv", {"rho", "seed", "order", "normalized_strength"});
    for (double rho : c.rhos) {
      std::vector<double> mean;
      int count = 0;
      for (const auto& cell : r.cells) {
        if (cell.rho != rho) continue;
        if (mean.empty()) mean.assign(cell.strength.size(), 0.0);
        for (std::size_t m = 0; m < cell.strength.size(); ++m) {
          csv.row(rho, std::to_string(cell.seed), static_cast<int>(m), cell.strength[m]);
          mean[m] += cell.strength[m];
        }
        ++count;
      }
      for (std::size_t m = 0; m < mean.size(); ++m) {
        csv.row(rho, "mean", static_cast<int>(m), mean[m] / count);
      }
    }
  }
  {
    CsvWriter csv(dir / "progress.csv", {"rho", "seed", "epoch", "order", "similarity"});
    for (const auto& cell : r.cells) {
      for (std::size_t j = 0; j < c.sim_orders.size(); ++j) {
        for (std::size_t k = 0; k < cell.epochs.size(); ++k) {
          csv.row(cell.rho, std::to_string(cell.seed), cell.epochs[k], c.sim_orders[j],
                  cell.progress[j][k]);
        }
      }
    }
  }
  {
    CsvWriter csv(dir / "accuracy.csv", {"rho", "seed", "train_accuracy", "test_accuracy"});
    for (const auto& cell : r.cells) {
      csv.row(cell.rho, std::to_string(cell.seed), cell.train_accuracy, cell.test_accuracy);
    }
  }
  return {"strength.csv", "progress.csv", "accuracy.csv"};
}

// seed,order,variance,log_variance
inline void write_variance_csv(const std::filesystem::path& path,
                               const std::vector<VarianceRow>& rows) {
  CsvWriter csv(path, {"seed", "order", "variance", "log_variance"});
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.orders.size(); ++j) {
      csv.row(row.seed, row.orders[j], row.variance[j], std::log(row.variance[j]));
    }
  }
}

// seed,order,similarity   (seed "mean" = average over seeds)
inline void write_generalization_csv(const std::filesystem::path& path,
                                     const std::vector<GeneralizationRow>& rows) {
  CsvWriter csv(path, {"seed", "order", "similarity"});
  if (rows.empty()) return;
  std::vector<double> mean(rows.front().similarity.size(), 0.0);
  for (const auto& row : rows) {
    for (std::size_t m = 0; m < row.similarity.size(); ++m) {
      csv.row(std::to_string(row.seed), static_cast<int>(m), row.similarity[m]);
      mean[m] += row.similarity[m];
    }
  }
  for (std::size_t m = 0; m < mean.size(); ++m) {
    csv.row("mean", static_cast<int>(m), mean[m] / static_cast<double>(rows.size()));
  }
}

// curve.csv:     seed,sample,rank,strength
// histogram.csv: seed,sample,order,count
// summary.csv:   seed,sample,near_zero_fraction,salient_count,max_residual,residual_bound
inline std::vector<std::string> write_sparsity(const std::filesystem::path& dir,
                                               const std::vector<SparsitySample>& samples) {
  CsvWriter curve(dir / "curve.csv", {"seed", "sample", "rank", "strength"});
  CsvWriter hist(dir / "histogram.csv", {"seed", "sample", "order", "count"});
  CsvWriter summary(dir / "summary.csv", {"seed", "sample", "near_zero_fraction", "salient_count",
                                          "max_residual", "residual_bound"});
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < s.curve.strengths.size(); ++k) {
      curve.row(s.seed, s.sample, static_cast<int>(k), s.curve.strengths[k]);
    }
    for (std::size_t m = 0; m < s.histogram.counts.size(); ++m) {
      hist.row(s.seed, s.sample, static_cast<int>(m), s.histogram.counts[m]);
    }
    summary.row(s.seed, s.sample, s.near_zero, s.histogram.total(), s.max_residual,
                s.residual_bound);
  }
  return {"curve.csv", "histogram.csv", "summary.csv"};
}

}  // namespace harsanyi
