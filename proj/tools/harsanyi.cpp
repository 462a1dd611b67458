// harsanyi: command-line front end for the library.
//
// Exit codes: 0 ok, 1 selfcheck failure, 2 usage or input error,
// 3 evaluator error, 4 numeric degeneracy.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "harsanyi/harsanyi.hpp"

namespace fs = std::filesystem;
using namespace harsanyi;

namespace {

enum Exit { kOk = 0, kSelfcheckFailed = 1, kUsage = 2, kEvaluator = 3, kDegenerate = 4 };

// Shortest round-trip form, always with a decimal point or exponent.
std::string show(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::uint64_t> to_seeds(const std::vector<long long>& raw) {
  std::vector<std::uint64_t> out;
  for (long long s : raw) {
    if (s < 0) throw DimensionError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir + ": " + ec.message());
}

InteractionTable interactions_from_file(const std::string& path) {
  const auto t = read_table_file(path);
  if (t.kind == TableKind::kInteraction) return InteractionTable(t.n, t.values);
  return mobius_transform(ValueTable(t.n, t.values));
}

void print_top(const InteractionTable& table, std::size_t k) {
  const auto salient = extract_salient(table, 0.0);
  std::cout << "max |I| " << show(max_abs_effect(table)) << "\n";
  for (std::size_t i = 0; i < std::min(k, salient.size()); ++i) {
    const auto& c = salient.entries[i];
    std::cout << to_bitstring(c.mask, table.n()) << " " << show(c.effect) << " order "
              << popcount(c.mask) << "\n";
  }
}

// Shared training flags for the classifier experiments.
struct ClassifierFlags {
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::vector<int> hidden;
  std::optional<int> train_size;
  std::optional<double> init_scale;

  void add(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--lr", lr, "SGD learning rate");
    cmd->add_option("--batch-size", batch_size, "Mini-batch size");
    cmd->add_option("--hidden", hidden, "Hidden layer widths, comma separated")->delimiter(',');
    cmd->add_option("--train-size", train_size, "Training rows of the synthetic task");
    cmd->add_option("--init-scale", init_scale, "Multiplier on the fan-in init bound");
  }

  void apply(ClassifierConfig& m, SyntheticTaskConfig& t) const {
    if (epochs) m.epochs = *epochs;
    if (lr) m.learning_rate = *lr;
    if (batch_size) m.batch_size = *batch_size;
    if (!hidden.empty()) m.hidden = hidden;
    if (train_size) t.train_size = *train_size;
    if (init_scale) m.init_scale = *init_scale;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harsanyi interaction concepts: exact tables, metrics and experiments"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: HARSANYI_THREADS, else all cores)");

  // interactions
  auto* inter = app.add_subcommand("interactions", "Compute an interaction table");
  std::string table_in, bridge_cmd, out_path, sample_id = "0";
  std::vector<double> sample, baseline;
  int n_flag = 0;
  std::size_t top_k = 10;
  double timeout = 30.0;
  std::size_t depth = 64;
  auto* in_opt = inter->add_option("--table-in", table_in, "Value table file")->check(CLI::ExistingFile);
  auto* cmd_opt = inter->add_option("--bridge-cmd", bridge_cmd, "Evaluator command (line protocol)");
  in_opt->excludes(cmd_opt);
  inter->add_option("--sample", sample, "Sample values, comma separated")->delimiter(',');
  inter->add_option("--baseline", baseline, "Baseline values, comma separated")->delimiter(',');
  inter->add_option("--n", n_flag, "Number of input variables");
  inter->add_option("--out", out_path, "Interaction table output file");
  inter->add_option("--sample-id", sample_id, "Sample id written to the table header");
  inter->add_option("--top", top_k, "Concepts printed in the summary");
  inter->add_option("--timeout", timeout, "Evaluator timeout in seconds");
  inter->add_option("--pipeline-depth", depth, "Requests in flight to the evaluator");

  // salient
  auto* sal = app.add_subcommand("salient", "List salient concepts of a table");
  std::string sal_in, sal_out;
  double ratio = kDefaultSalienceRatio;
  sal->add_option("--table-in", sal_in, "Value or interaction table file")->required()->check(CLI::ExistingFile);
  sal->add_option("--ratio", ratio, "Threshold as a fraction of max |I|");
  sal->add_option("--out", sal_out, "CSV output (mask,order,effect)");

  // similarity
  auto* sim = app.add_subcommand("similarity", "Jaccard similarity of two interaction tables");
  std::string sim_a, sim_b;
  std::optional<int> sim_order;
  sim->add_option("a", sim_a, "First table file")->required()->check(CLI::ExistingFile);
  sim->add_option("b", sim_b, "Second table file")->required()->check(CLI::ExistingFile);
  sim->add_option("--order", sim_order, "Compare only concepts of this order");

  // dynamics
  auto* dyn = app.add_subcommand("dynamics", "Learning dynamics on the boolean cube");
  DynamicsConfig dcfg;
  std::vector<long long> dyn_seeds{0};
  std::string out_dir = "out";
  int dyn_width = 32;
  dyn->add_option("--target-order", dcfg.order, "Order of the target AND concept")->required();
  dyn->add_option("--n", dcfg.n, "Number of input variables");
  dyn->add_option("--seeds", dyn_seeds, "Seeds, comma separated")->delimiter(',');
  dyn->add_option("--epochs", dcfg.epochs, "Training epochs");
  dyn->add_option("--lr", dcfg.learning_rate, "SGD learning rate");
  dyn->add_option("--batch-size", dcfg.batch_size, "Mini-batch size");
  dyn->add_option("--width", dyn_width, "Width of each of the four hidden layers");
  dyn->add_option("--init-scale", dcfg.init_scale, "Multiplier on the fan-in init bound");
  dyn->add_option("--eval-points", dcfg.eval_points, "Cube points evaluated (0 = all)");
  dyn->add_option("--snapshots", dcfg.snapshots, "Snapshot epochs, comma separated")->delimiter(',');
  dyn->add_option("--out-dir", out_dir, "Output directory");

  // noise-overfit
  auto* noise = app.add_subcommand("noise-overfit", "Label-noise strength and learning progress");
  NoiseOverfitConfig ncfg;
  std::vector<long long> noise_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  ClassifierFlags noise_flags;
  noise->add_option("--rho-list", ncfg.rhos, "Label-noise ratios, comma separated")->delimiter(',');
  noise->add_option("--seeds", noise_seeds, "Seeds, comma separated")->delimiter(',');
  noise->add_option("--eval-samples", ncfg.eval_samples, "Training rows analysed");
  noise->add_option("--orders", ncfg.sim_orders, "Orders tracked by learning progress")->delimiter(',');
  noise->add_option("--snapshot-every", ncfg.snapshot_every, "Epochs between snapshots");
  noise->add_option("--snapshots", ncfg.snapshots, "Extra snapshot epochs, comma separated")->delimiter(',');
  noise->add_option("--out-dir", out_dir, "Output directory");
  noise_flags.add(noise);

  // variance-scan
  auto* var = app.add_subcommand("variance-scan", "Effect variance under input perturbation");
  VarianceExperimentConfig vcfg;
  std::vector<long long> var_seeds{0, 1, 2, 3, 4};
  std::string rule = "shifted", var_model;
  ClassifierFlags var_flags;
  var->add_option("--delta", vcfg.delta, "Perturbation standard deviation");
  var->add_option("--tau-shift", vcfg.tau_shift, "Shift distance of the baseline");
  var->add_option("--trials", vcfg.trials, "Perturbed copies per sample");
  var->add_option("--samples", vcfg.samples, "Training rows analysed");
  var->add_option("--orders", vcfg.orders, "Orders, comma separated")->delimiter(',');
  var->add_option("--baseline-rule", rule, "shifted or mean")->check(CLI::IsMember({"shifted", "mean"}));
  var->add_option("--seeds", var_seeds, "Seeds, comma separated")->delimiter(',');
  var->add_option("--model", var_model, "Use this weight file instead of training")->check(CLI::ExistingFile);
  var->add_option("--out-dir", out_dir, "Output directory");
  var_flags.add(var);

  // sparsity
  auto* spa = app.add_subcommand("sparsity", "Sparsity curves and salient-order histograms");
  SparsityConfig scfg;
  std::vector<long long> spa_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string spa_model, spa_table;
  ClassifierFlags spa_flags;
  spa->add_option("--ratio", scfg.ratio, "Salience ratio");
  spa->add_option("--samples", scfg.samples, "Test rows analysed");
  spa->add_option("--seeds", spa_seeds, "Seeds, comma separated")->delimiter(',');
  spa->add_option("--model", spa_model, "Use this weight file instead of training")->check(CLI::ExistingFile);
  spa->add_option("--table-in", spa_table, "Analyse a single value table file")->check(CLI::ExistingFile);
  spa->add_option("--out-dir", out_dir, "Output directory");
  spa_flags.add(spa);

  // gen-sim
  auto* gen = app.add_subcommand("gen-sim", "Train/test similarity of concepts by order");
  GeneralizationConfig gcfg;
  std::vector<long long> gen_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  ClassifierFlags gen_flags;
  gen->add_option("--per-category", gcfg.per_category, "Samples per category and split");
  gen->add_option("--seeds", gen_seeds, "Seeds, comma separated")->delimiter(',');
  gen->add_option("--out-dir", out_dir, "Output directory");
  gen_flags.add(gen);

  // selfcheck
  auto* self = app.add_subcommand("selfcheck", "Run the fast property suite");
  bool quick = false;
  self->add_flag("--quick", quick, "Skip Monte-Carlo checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  threads = resolve_threads(threads);

  // Experiments write their manifest even when a metric degenerates.
  std::string manifest_path, experiment;
  nlohmann::json manifest_config;
  std::vector<std::uint64_t> manifest_seeds;
  std::vector<std::string> outputs;
  auto fail_manifest = [&](const std::string& status) {
    if (manifest_path.empty()) return;
    try {
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs, status);
    } catch (const std::exception&) {
    }
  };

  try {
    if (*inter) {
      if (table_in.empty() == bridge_cmd.empty()) {
        throw DimensionError("give exactly one of --table-in or --bridge-cmd");
      }
      std::optional<InteractionTable> table;
      if (!table_in.empty()) {
        const auto values = load_value_table(table_in);
        if (n_flag != 0 && n_flag != values.n()) throw DimensionError("--n disagrees with the table file");
        table = mobius_transform(values);
      } else {
        const int n = n_flag != 0 ? n_flag : static_cast<int>(sample.size());
        check_variable_count(n);
        if (sample.size() != static_cast<std::size_t>(n)) throw DimensionError("--sample needs n values");
        if (baseline.empty()) baseline.assign(sample.size(), 0.0);
        if (baseline.size() != sample.size()) throw DimensionError("--baseline needs n values");
        EvaluatorProcess process(bridge_cmd, {timeout, depth});
        table = mobius_transform(bridge_value_table(process, sample, baseline, 0, true));
      }
      if (!out_path.empty()) save_interaction_table(out_path, *table, sample_id);
      print_top(*table, top_k);
      return kOk;
    }

    if (*sal) {
      const auto table = interactions_from_file(sal_in);
      const auto salient = extract_salient(table, relative_threshold(table, ratio));
      std::cout << "threshold " << show(salient.threshold) << " salient " << salient.size() << "\n";
      for (const auto& c : salient.entries) {
        std::cout << to_bitstring(c.mask, table.n()) << " " << show(c.effect) << "\n";
      }
      if (!sal_out.empty()) {
        CsvWriter csv(sal_out, {"mask", "order", "effect"});
        for (const auto& c : salient.entries) {
          csv.row(to_bitstring(c.mask, table.n()), popcount(c.mask), c.effect);
        }
      }
      return kOk;
    }

    if (*sim) {
      const auto a = interactions_from_file(sim_a);
      const auto b = interactions_from_file(sim_b);
      if (a.n() != b.n()) throw DimensionError("tables have different n");
      double s = 0.0;
      if (sim_order) {
        s = jaccard_similarity(nonneg_extend(order_slice(a, *sim_order)),
                               nonneg_extend(order_slice(b, *sim_order)));
      } else {
        s = jaccard_similarity(nonneg_extend(a.entries()), nonneg_extend(b.entries()));
      }
      std::cout << show(s) << "\n";
      return kOk;
    }

    if (*dyn) {
      ensure_dir(out_dir);
      dcfg.hidden.assign(4, dyn_width);
      experiment = "dynamics";
      manifest_path = (fs::path(out_dir) / "manifest.json").string();
      manifest_config = to_json(dcfg);
      manifest_config.erase("seed");
      manifest_seeds = to_seeds(dyn_seeds);
      std::vector<DynamicsResult> results(manifest_seeds.size());
      parallel_for(results.size(), threads, [&](std::size_t i) {
        auto c = dcfg;
        c.seed = manifest_seeds[i];
        results[i] = run_learning_dynamics(c);
      });
      nlohmann::json targets = nlohmann::json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string name = "dynamics_seed" + std::to_string(manifest_seeds[i]) + ".csv";
        write_dynamics_csv(fs::path(out_dir) / name, results[i], dcfg.n);
        outputs.push_back(name);
        targets.push_back(to_bitstring(results[i].target, dcfg.n));
      }
      manifest_config["targets"] = targets;
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs);
      return kOk;
    }

    if (*noise) {
      ensure_dir(out_dir);
      noise_flags.apply(ncfg.model, ncfg.task);
      ncfg.seeds = to_seeds(noise_seeds);
      ncfg.threads = threads;
      experiment = "noise-overfit";
      manifest_path = (fs::path(out_dir) / "manifest.json").string();
      manifest_config = to_json(ncfg);
      manifest_seeds = ncfg.seeds;
      const auto result = run_noise_overfit(ncfg);
      outputs = write_noise_overfit(out_dir, result, ncfg);
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs);
      return kOk;
    }

    if (*var) {
      ensure_dir(out_dir);
      var_flags.apply(vcfg.model, vcfg.task);
      vcfg.rule = rule == "mean" ? BaselineRule::kMean : BaselineRule::kShifted;
      vcfg.seeds = to_seeds(var_seeds);
      vcfg.threads = threads;
      experiment = "variance-scan";
      manifest_path = (fs::path(out_dir) / "manifest.json").string();
      manifest_config = to_json(vcfg);
      manifest_seeds = vcfg.seeds;
      std::vector<VarianceRow> rows;
      if (!var_model.empty()) {
        const auto model = load_model(var_model);
        manifest_config["model_file"] = var_model;
        for (auto seed : vcfg.seeds) {
          auto tc = vcfg.task;
          tc.seed = seed;
          const auto task = make_synthetic_task(tc);
          const auto scan = model_variance_scan(model, task.train, task.train.labels, vcfg.samples,
                                                task.mean, vcfg, derive_seed(seed, kPerturbStream));
          std::vector<double> s(scan.orders.begin(), scan.orders.end()), logv;
          for (double v : scan.variance) logv.push_back(std::log(v));
          rows.push_back({seed, scan.orders, scan.variance,
                          s.size() >= 2 ? spearman(s, logv) : 0.0});
        }
      } else {
        rows = run_variance_scan(vcfg);
      }
      write_variance_csv(fs::path(out_dir) / "variance.csv", rows);
      outputs = {"variance.csv"};
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs);
      for (const auto& r : rows) {
        std::cout << "seed " << r.seed << " spearman(s, log V) " << show(r.spearman_log) << "\n";
      }
      return kOk;
    }

    if (*spa) {
      ensure_dir(out_dir);
      spa_flags.apply(scfg.model, scfg.task);
      scfg.seeds = to_seeds(spa_seeds);
      scfg.threads = threads;
      experiment = "sparsity";
      manifest_path = (fs::path(out_dir) / "manifest.json").string();
      manifest_config = to_json(scfg);
      manifest_seeds = scfg.seeds;
      std::vector<SparsitySample> samples;
      if (!spa_table.empty()) {
        manifest_config["table_file"] = spa_table;
        manifest_seeds.clear();
        samples.push_back(sparsity_of(load_value_table(spa_table), scfg.ratio));
      } else if (!spa_model.empty()) {
        const auto model = load_model(spa_model);
        manifest_config["model_file"] = spa_model;
        for (auto seed : scfg.seeds) {
          auto tc = scfg.task;
          tc.seed = seed;
          const auto task = make_synthetic_task(tc);
          auto part = model_sparsity(model, task.test, scfg.samples, task.mean, scfg.ratio, seed);
          samples.insert(samples.end(), part.begin(), part.end());
        }
      } else {
        samples = run_sparsity_report(scfg);
      }
      outputs = write_sparsity(out_dir, samples);
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs);
      return kOk;
    }

    if (*gen) {
      ensure_dir(out_dir);
      gen_flags.apply(gcfg.model, gcfg.task);
      gcfg.seeds = to_seeds(gen_seeds);
      gcfg.threads = threads;
      experiment = "gen-sim";
      manifest_path = (fs::path(out_dir) / "manifest.json").string();
      manifest_config = to_json(gcfg);
      manifest_seeds = gcfg.seeds;
      const auto rows = run_generalization_similarity(gcfg);
      write_generalization_csv(fs::path(out_dir) / "similarity.csv", rows);
      outputs = {"similarity.csv"};
      write_manifest(manifest_path, experiment, manifest_config, manifest_seeds, outputs);
      return kOk;
    }

    if (*self) {
      SelfcheckOptions opt;
      opt.quick = quick;
      bool ok = true;
      double total = 0.0;
      for (const auto& r : run_selfcheck(opt)) {
        const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
        std::printf("%-4s %-45s %s\n", tag, r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
        total += r.seconds;
      }
      std::printf("%s in %.2f s\n", ok ? "all properties hold" : "property failures", total);
      return ok ? kOk : kSelfcheckFailed;
    }
  } catch (const DegenerateError& e) {
    fail_manifest(std::string("degenerate: ") + e.what());
    std::cerr << "numeric degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const TrainingError& e) {
    fail_manifest(std::string("diverged: ") + e.what());
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDegenerate;
  } catch (const ProtocolError& e) {
    std::cerr << "evaluator error: " << e.what() << "\n";
    return kEvaluator;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kEvaluator;
  } catch (const std::exception& e) {
    fail_manifest(std::string("error: ") + e.what());
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
