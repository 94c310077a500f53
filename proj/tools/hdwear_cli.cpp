// hdwear: train, evaluate, predict, robustness sweep and personalization experiment over CSV
// sensor recordings.
//
// Exit codes: 0 success, 1 usage/configuration, 2 data (CSV, schema, labels, feature arity),
// 3 model file I/O.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hdwear/datapipe.hpp"
#include "hdwear/learning.hpp"
#include "hdwear/model_io.hpp"
#include "hdwear/personalize.hpp"
#include "hdwear/pipeline.hpp"
#include "hdwear/robustness.hpp"
#include "hdwear/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hdwear;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitModel = 3;

struct Failure {
  int code;
  std::string message;
};

template <typename F>
auto guarded(int code, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Failure{code, e.what()};
  }
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  std::string command;
  std::string data;
  std::string schema;
  std::string model;
  std::string report;
  std::string mode = "iterative";
  std::size_t dim = 4096;
  std::size_t levels = 16;
  std::size_t ngram = 3;
  double eta = 0.5;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 42;
  bool shuffle = false;
  std::string split = "random";
  double test_fraction = 0.25;
  std::string holdout;
  std::string subset = "test";
  std::vector<double> rates = default_flip_rates();
  std::size_t trials = 10;
  std::size_t window = 0;
  std::size_t stride = 0;
  std::size_t smooth = 1;
  std::string label_policy = "majority";
  // synth
  std::string out = "synthetic.csv";
  std::size_t subjects = 3;

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const {
    auto num = [](auto v) {
      if constexpr (std::is_floating_point_v<decltype(v)>) {
        return shortest(v);
      } else {
        return std::to_string(v);
      }
    };
    std::string rate_list;
    for (std::size_t i = 0; i < rates.size(); ++i) rate_list += (i ? "," : "") + num(rates[i]);
    const Seeds seeds = Seeds::from(seed);
    return {{"command", command},
            {"data", data},
            {"schema", schema},
            {"model", model},
            {"mode", mode},
            {"dim", num(dim)},
            {"levels", num(levels)},
            {"ngram", num(ngram)},
            {"eta", num(eta)},
            {"max-epochs", num(max_epochs)},
            {"patience", num(patience)},
            {"seed", num(seed)},
            {"shuffle", shuffle ? "true" : "false"},
            {"split", split},
            {"test-fraction", num(test_fraction)},
            {"holdout", holdout},
            {"subset", subset},
            {"rates", rate_list},
            {"trials", num(trials)},
            {"window", num(window)},
            {"stride", num(stride)},
            {"smooth", num(smooth)},
            {"label-policy", label_policy},
            {"item-seed", num(seeds.item)},
            {"level-seed", num(seeds.level)},
            {"sensor-seed", num(seeds.sensor)},
            {"tie-seed", num(seeds.tie)}};
  }

  [[nodiscard]] std::string header() const {
    std::string out;
    for (const auto& [k, v] : entries()) out += "# " + k + "=" + v + "\n";
    return out;
  }

  [[nodiscard]] TrainSettings settings() const {
    TrainSettings s;
    s.dim = dim;
    s.levels = levels;
    s.ngram = ngram;
    s.eta = eta;
    s.max_epochs = max_epochs;
    s.patience = patience;
    s.seed = seed;
    s.shuffle = shuffle;
    s.mode = mode == "online" ? TrainMode::kOnline : TrainMode::kIterative;
    return s;
  }
};

std::string pct(double accuracy) {
  if (std::isnan(accuracy)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * accuracy;
  return s.str();
}

fs::path report_path(const RunConfig& cfg, const std::string& base, const std::string& suffix) {
  if (!cfg.report.empty()) return cfg.report;
  return fs::path(base + suffix);
}

WindowedDataset load_dataset(const RunConfig& cfg, bool require_labels) {
  return guarded(kExitData, [&] {
    if (cfg.data.empty()) throw Error(ErrorKind::kInvalidArgument, "--data is required");
    if (cfg.schema.empty()) throw Error(ErrorKind::kSchema, "--schema is required");
    const auto schema = CsvSchema::load(cfg.schema);
    if (require_labels && schema.label_column.empty()) {
      throw Error(ErrorKind::kSchema, "schema names no label column");
    }
    const auto recordings = load_csv(cfg.data, schema);
    SegmentOptions options;
    options.window_samples = cfg.window != 0 ? cfg.window
                                             : static_cast<std::size_t>(std::max(1.0, std::round(schema.sample_rate_hz)));
    options.stride = cfg.stride != 0 ? cfg.stride : std::max<std::size_t>(1, options.window_samples / 2);
    options.smoothing = cfg.smooth;
    options.policy = cfg.label_policy == "last" ? LabelPolicy::kLastSample : LabelPolicy::kMajority;
    auto ds = featurize(recordings, options);
    if (ds.empty()) throw Error(ErrorKind::kEmptyDataset, "no complete window in the input");
    return ds;
  });
}

SplitIndices split_dataset(const WindowedDataset& ds, const RunConfig& cfg) {
  return guarded(kExitData, [&] {
    SplitStrategy strategy;
    strategy.seed = rng::derive(cfg.seed, 0x5917);
    strategy.test_fraction = cfg.test_fraction;
    strategy.subject = cfg.holdout;
    if (cfg.split == "subject-half") {
      strategy.kind = SplitKind::kSubjectHalf;
    } else if (cfg.split == "loso") {
      strategy.kind = SplitKind::kLeaveOneSubjectOut;
      if (strategy.subject.empty()) throw Error(ErrorKind::kInvalidArgument, "--split loso needs --holdout SUBJECT");
    } else {
      strategy.kind = SplitKind::kRandom;
    }
    return split(ds, strategy);
  });
}

std::vector<std::size_t> chosen_subset(const SplitIndices& s, std::size_t n, const std::string& subset) {
  if (subset == "train") return s.train;
  if (subset == "all") {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  return s.test;
}

Model load_model_file(const RunConfig& cfg, bool dim_given) {
  auto model = guarded(kExitModel, [&] {
    if (cfg.model.empty()) throw Error(ErrorKind::kInvalidArgument, "--model is required");
    return load_model(cfg.model);
  });
  if (dim_given && model.dim() != cfg.dim) {
    throw Failure{kExitData, to_string(ErrorKind::kConfigMismatch).data() + std::string(": --dim ") +
                                 std::to_string(cfg.dim) + " but model has D=" + std::to_string(model.dim())};
  }
  return model;
}

void require_arity(const Model& model, const WindowedDataset& ds) {
  if (ds.feature_names.size() != model.encoder.bounds.size()) {
    throw Failure{kExitData, std::string(to_string(ErrorKind::kConfigMismatch)) + ": data yields " +
                                 std::to_string(ds.feature_names.size()) + " features, model expects " +
                                 std::to_string(model.encoder.bounds.size())};
  }
}

void print_eval(std::ostream& os, const Model& model, const EvalReport& r) {
  os << "accuracy " << pct(r.accuracy) << "% over " << r.n_samples << " windows\n";
  os << std::left << std::setw(16) << "true\\pred";
  for (const auto& c : model.classes) os << std::setw(12) << c;
  os << "recall%\n";
  for (std::size_t k = 0; k < model.class_count(); ++k) {
    os << std::setw(16) << model.classes[k];
    for (auto v : r.confusion[k]) os << std::setw(12) << v;
    os << pct(r.per_class_recall[k]) << "\n";
  }
}

std::string eval_csv(const Model& model, const EvalReport& r) {
  std::string out = "true_label";
  for (const auto& c : model.classes) out += "," + c;
  out += ",recall\n";
  for (std::size_t k = 0; k < model.class_count(); ++k) {
    out += model.classes[k];
    for (auto v : r.confusion[k]) out += "," + std::to_string(v);
    out += "," + shortest(r.per_class_recall[k]) + "\n";
  }
  return out;
}

int cmd_train(RunConfig& cfg) {
  if (cfg.model.empty()) throw Failure{kExitUsage, "--model is required"};
  const auto ds = load_dataset(cfg, true);
  const auto parts = split_dataset(ds, cfg);
  const auto classes = class_labels(ds);
  const auto train = ds.subset(parts.train);
  const auto outcome = guarded(kExitData, [&] { return train_pipeline(train.windows, classes, cfg.settings()); });
  const auto samples = encode_windows(outcome.model, train.windows);
  const double train_acc = evaluate(outcome.model, samples).accuracy;

  guarded(kExitModel, [&] { save_model(outcome.model, cfg.model); });

  const std::size_t retrain_epochs = outcome.iterative.epochs_run;
  std::cout << "trained " << cfg.mode << " model: D=" << cfg.dim << " classes=" << classes.size()
            << " features=" << ds.feature_names.size() << " train windows=" << train.size() << "\n";
  std::cout << "online pass mispredictions " << outcome.online_train_mispredictions << "\n";
  std::cout << "retrain epochs " << retrain_epochs << " (best epoch " << outcome.iterative.best_epoch << ")\n";
  for (std::size_t e = 0; e < outcome.iterative.curve.size(); ++e) {
    const auto& st = outcome.iterative.curve[e];
    std::cout << "  epoch " << e + 1 << ": in-epoch " << st.in_epoch_mispredictions << ", end "
              << st.end_mispredictions << "\n";
  }
  std::cout << "train accuracy " << pct(train_acc) << "%\nmodel written to " << cfg.model << "\n";

  std::string csv = cfg.header();
  csv += "# train_accuracy=" + shortest(train_acc) + "\n";
  csv += "# retrain_epochs=" + std::to_string(retrain_epochs) + "\n";
  csv += "# best_epoch=" + std::to_string(outcome.iterative.best_epoch) + "\n";
  csv += "epoch,in_epoch_mispredictions,end_mispredictions\n";
  csv += "0,," + std::to_string(outcome.online_train_mispredictions) + "\n";
  for (std::size_t e = 0; e < outcome.iterative.curve.size(); ++e) {
    const auto& st = outcome.iterative.curve[e];
    csv += std::to_string(e + 1) + "," + std::to_string(st.in_epoch_mispredictions) + "," +
           std::to_string(st.end_mispredictions) + "\n";
  }
  guarded(kExitModel, [&] { write_text_atomic(report_path(cfg, cfg.model, ".train.csv"), csv); });
  return 0;
}

int cmd_eval(RunConfig& cfg, bool dim_given) {
  const auto model = load_model_file(cfg, dim_given);
  const auto ds = load_dataset(cfg, true);
  require_arity(model, ds);
  const auto parts = split_dataset(ds, cfg);
  const auto chosen = ds.subset(chosen_subset(parts, ds.size(), cfg.subset));
  const auto report = guarded(kExitData, [&] {
    const auto samples = encode_windows(model, chosen.windows);
    return evaluate(model, samples);
  });
  print_eval(std::cout, model, report);
  std::string csv = cfg.header();
  csv += "# accuracy=" + shortest(report.accuracy) + "\n# n_samples=" + std::to_string(report.n_samples) + "\n";
  csv += eval_csv(model, report);
  guarded(kExitModel, [&] { write_text_atomic(report_path(cfg, cfg.model, ".eval.csv"), csv); });
  return 0;
}

int cmd_predict(RunConfig& cfg, bool dim_given) {
  const auto model = load_model_file(cfg, dim_given);
  const auto ds = load_dataset(cfg, false);
  require_arity(model, ds);
  const auto encoder = model.encoder.make_encoder();
  guarded(kExitData, [&] {
    for (const auto& w : ds.windows) std::cout << model.classes[predict(model, encoder.encode(w.features))] << "\n";
  });
  return 0;
}

int cmd_robustness(RunConfig& cfg, bool dim_given) {
  const auto model = load_model_file(cfg, dim_given);
  const auto ds = load_dataset(cfg, true);
  require_arity(model, ds);
  const auto parts = split_dataset(ds, cfg);
  const auto chosen = ds.subset(chosen_subset(parts, ds.size(), cfg.subset));
  const auto report = guarded(kExitData, [&] {
    const auto samples = encode_windows(model, chosen.windows);
    return robustness_sweep(model, samples, cfg.rates, cfg.trials, cfg.seed);
  });
  std::cout << "clean 1-bit accuracy " << pct(report.acc_clean) << "% (" << report.trials << " trials per rate)\n";
  std::cout << std::left << std::setw(10) << "flip%" << std::setw(12) << "mean acc%" << std::setw(10) << "sd"
            << "loss (points)\n";
  for (const auto& r : report.rates) {
    std::cout << std::setw(10) << pct(r.rate) << std::setw(12) << pct(r.mean_acc) << std::setw(10) << pct(r.sd_acc)
              << pct(r.mean_loss) << "\n";
  }
  std::string csv = cfg.header() + "# acc_clean=" + shortest(report.acc_clean) + "\n" + report.to_csv();
  guarded(kExitModel, [&] { write_text_atomic(report_path(cfg, cfg.model, ".robustness.csv"), csv); });
  return 0;
}

int cmd_personalize(RunConfig& cfg) {
  const auto ds = load_dataset(cfg, true);
  const auto report = guarded(kExitData, [&] { return run_personalization(ds, cfg.settings()); });
  std::cout << std::left << std::setw(12) << "subject" << std::setw(16) << "general/online" << std::setw(16)
            << "personal/online" << std::setw(16) << "general/iter" << "personal/iter\n";
  std::string csv = cfg.header() + "subject,general_online,personalized_online,general_iterative,personalized_iterative\n";
  for (const auto& row : report.rows) {
    std::cout << std::setw(12) << row.subject << std::setw(16) << pct(row.general.online) << std::setw(16)
              << pct(row.personalized.online) << std::setw(16) << pct(row.general.iterative)
              << pct(row.personalized.iterative) << "\n";
    csv += row.subject + "," + shortest(row.general.online) + "," + shortest(row.personalized.online) + "," +
           shortest(row.general.iterative) + "," + shortest(row.personalized.iterative) + "\n";
  }
  std::cout << std::setw(12) << "mean" << std::setw(16) << pct(report.mean_general.online) << std::setw(16)
            << pct(report.mean_personalized.online) << std::setw(16) << pct(report.mean_general.iterative)
            << pct(report.mean_personalized.iterative) << "\n";
  std::cout << "improvement (points): online " << pct(report.mean_improvement.online) << ", iterative "
            << pct(report.mean_improvement.iterative) << "\n";
  csv += "mean," + shortest(report.mean_general.online) + "," + shortest(report.mean_personalized.online) + "," +
         shortest(report.mean_general.iterative) + "," + shortest(report.mean_personalized.iterative) + "\n";
  guarded(kExitModel, [&] { write_text_atomic(report_path(cfg, cfg.data, ".personalize.csv"), csv); });
  return 0;
}

int cmd_synth(RunConfig& cfg) {
  synthetic::RecordingSpec spec;
  spec.subjects = cfg.subjects;
  const auto recs = synthetic::recordings(cfg.seed, spec);
  CsvSchema schema;
  schema.channels = recs.front().channel_names;
  schema.label_column = "label";
  schema.subject_column = "subject";
  schema.sample_rate_hz = spec.sample_rate_hz;
  fs::path schema_path = cfg.out;
  schema_path.replace_extension(".schema");
  guarded(kExitData, [&] {
    write_text_atomic(cfg.out, synthetic::to_csv(recs));
    write_text_atomic(schema_path, schema.to_string());
  });
  std::cout << "wrote " << cfg.out << " and " << schema_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdwear: hyperdimensional classification for wearable sensor data"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file; flags override it");

  RunConfig cfg;
  app.add_option("--data", cfg.data, "CSV recordings");
  app.add_option("--schema", cfg.schema, "Schema file (channels, label, subject, delimiter, sample_rate)");
  app.add_option("--model", cfg.model, "Model file");
  app.add_option("--report", cfg.report, "Machine-readable report path (default: beside the model)");
  app.add_option("--mode", cfg.mode, "Training mode")->check(CLI::IsMember({"online", "iterative"}));
  auto* dim_opt = app.add_option("--dim", cfg.dim, "Hypervector dimension")->check(CLI::Range(2, 1 << 24));
  app.add_option("--levels", cfg.levels, "Quantization levels Q")->check(CLI::Range(2, 1 << 16));
  app.add_option("--ngram", cfg.ngram, "n-gram length")->check(CLI::Range(1, 64));
  app.add_option("--eta", cfg.eta, "Learning rate")->check(CLI::PositiveNumber);
  app.add_option("--max-epochs", cfg.max_epochs, "Retraining epoch cap")->check(CLI::Range(1, 100000));
  app.add_option("--patience", cfg.patience, "Non-improving epochs tolerated");
  app.add_option("--seed", cfg.seed, "Master seed")->envname("HDWEAR_SEED");
  app.add_flag("--shuffle", cfg.shuffle, "Reshuffle samples every retraining epoch");
  app.add_option("--split", cfg.split, "Split strategy")->check(CLI::IsMember({"random", "subject-half", "loso"}));
  app.add_option("--test-fraction", cfg.test_fraction, "Test share for --split random")->check(CLI::Range(0.0, 1.0));
  app.add_option("--holdout", cfg.holdout, "Held-out subject for --split loso");
  app.add_option("--subset", cfg.subset, "Split side to evaluate")->check(CLI::IsMember({"train", "test", "all"}));
  app.add_option("--rates", cfg.rates, "Bit-flip fractions")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  app.add_option("--trials", cfg.trials, "Injections per rate")->check(CLI::Range(1, 1000000));
  app.add_option("--window", cfg.window, "Window length in samples (default: one second)");
  app.add_option("--stride", cfg.stride, "Window step in samples (default: half a window)");
  app.add_option("--smooth", cfg.smooth, "Moving-average length (1 = off)")->check(CLI::Range(1, 1 << 20));
  app.add_option("--label-policy", cfg.label_policy, "Window label rule")->check(CLI::IsMember({"majority", "last"}));
  app.add_option("--out", cfg.out, "Output CSV for synth");
  app.add_option("--subjects", cfg.subjects, "Subjects for synth")->check(CLI::Range(1, 1000));

  auto* train = app.add_subcommand("train", "Train a model and write it with a training report");
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a split of a dataset");
  auto* predict_cmd = app.add_subcommand("predict", "Print one predicted label per window");
  auto* robust = app.add_subcommand("robustness", "Bit-flip robustness sweep on the 1-bit model");
  auto* personalize = app.add_subcommand("personalize", "General vs. personalized comparison");
  auto* synth = app.add_subcommand("synth", "Write a synthetic multi-subject CSV and schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const bool dim_given = dim_opt->count() > 0;
    if (train->parsed()) {
      cfg.command = "train";
      return cmd_train(cfg);
    }
    if (eval->parsed()) {
      cfg.command = "eval";
      return cmd_eval(cfg, dim_given);
    }
    if (predict_cmd->parsed()) {
      cfg.command = "predict";
      return cmd_predict(cfg, dim_given);
    }
    if (robust->parsed()) {
      cfg.command = "robustness";
      return cmd_robustness(cfg, dim_given);
    }
    if (personalize->parsed()) {
      cfg.command = "personalize";
      return cmd_personalize(cfg);
    }
    if (synth->parsed()) {
      cfg.command = "synth";
      return cmd_synth(cfg);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
