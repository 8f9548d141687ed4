// lmamotion: synthesize skeletons, extract LMA features, train / evaluate
// logistic-regression tier classifiers and rank features.
//
// Every command writes a JSON config echo next to its main output;
// `lmamotion replay <echo>` re-runs the command with exactly those settings.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <lmamotion/lmamotion.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for bad option values; maps to exit code 2.
struct UsageError : lma::Error {
  using lma::Error::Error;
};

struct SynthConfig {
  std::string out_dir;
  int per_regime = 200;
  double duration = 5.0;
  double fps = 30.0;
  double noise = 0.005;
  double overlap = 0.0;
  std::uint64_t seed = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthConfig, out_dir, per_regime, duration, fps, noise,
                                                overlap, seed)

struct ExtractConfig {
  std::string manifest;
  std::string out;
  std::string error_log;
  double length = 5.0;
  double stride = 5.0;
  int threads = 1;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExtractConfig, manifest, out, error_log, length, stride,
                                                threads)

struct ModelConfig {
  std::string task = "four_way";
  int binary_split = 2;
  double lambda = 1.0;
  int max_iters = 1000;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelConfig, task, binary_split, lambda, max_iters,
                                                grad_tol, seed)

struct TrainCmdConfig {
  std::string features;
  std::string out;
  ModelConfig model;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainCmdConfig, features, out, model)

struct PredictConfig {
  std::string model;
  std::string features;
  std::string out;
  std::string task;  // optional guard
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PredictConfig, model, features, out, task)

struct EvaluateConfig {
  std::string features;
  std::string out;
  std::string confusion_out;
  int k = 5;
  int threads = 1;
  ModelConfig model;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvaluateConfig, features, out, confusion_out, k, threads,
                                                model)

struct RankConfig {
  std::string features;
  std::string out;
  std::string task = "binary";
  int binary_split = 2;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RankConfig, features, out, task, binary_split)

struct BalanceConfig {
  std::string manifest;
  std::string out;
  std::size_t per_class = 1075;
  std::uint64_t seed = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BalanceConfig, manifest, out, per_class, seed)

template <typename Config>
void write_echo(const std::string& command, const Config& config, const fs::path& path) {
  json echo;
  echo["command"] = command;
  echo["feature_schema"] = lma::kFeatureSchema;
  echo["config"] = config;
  std::ofstream out(path);
  if (!out) throw lma::Error("cannot write config echo " + path.string());
  out << echo.dump(2) << '\n';
}

std::string echo_path(const std::string& output) { return output + ".config.json"; }

lma::TaskSpec task_spec(const std::string& name, int binary_split) {
  try {
    return lma::TaskSpec::of(lma::parse_task_kind(name), binary_split);
  } catch (const lma::Error& e) {
    throw UsageError(e.what());
  }
}

lma::TrainConfig train_config(const ModelConfig& m) {
  lma::TrainConfig c;
  c.l2_lambda = m.lambda;
  c.max_iters = m.max_iters;
  c.grad_tol = m.grad_tol;
  c.seed = m.seed;
  try {
    c.validate();
  } catch (const lma::Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------

int run_synth(const SynthConfig& c) {
  if (c.per_regime < 1) throw UsageError("--per-regime must be >= 1");
  fs::create_directories(c.out_dir);
  std::vector<lma::ManifestEntry> entries;
  for (int r = 0; r < lma::kTierCount; ++r) {
    for (int i = 0; i < c.per_regime; ++i) {
      lma::RegimeSpec spec;
      spec.regime = static_cast<lma::Regime>(r);
      spec.duration_s = c.duration;
      spec.fps = c.fps;
      spec.noise_m = c.noise;
      spec.overlap = c.overlap;
      spec.seed = c.seed + static_cast<std::uint64_t>(i);
      lma::SkeletonSequence seq = [&] {
        try {
          return lma::generate(spec);
        } catch (const lma::Error& e) {
          throw UsageError(e.what());
        }
      }();
      char name[64];
      std::snprintf(name, sizeof name, "r%d_%05d.json", r, i);
      const fs::path file = fs::path(c.out_dir) / name;
      lma::save_sequence(seq, file);
      entries.push_back({fs::absolute(file).lexically_normal().string(), seq.source_id(), r});
    }
  }
  const fs::path manifest = fs::path(c.out_dir) / "manifest.jsonl";
  lma::write_manifest(lma::DatasetManifest(std::move(entries)), manifest);
  write_echo("synth", c, fs::path(c.out_dir) / "synth.config.json");
  std::cerr << "wrote " << 4 * c.per_regime << " sequences and " << manifest.string() << '\n';
  return kExitOk;
}

int run_extract(const ExtractConfig& c) {
  if (c.threads < 0) throw UsageError("--threads must be >= 0");
  if (!(c.length >= lma::kMinFragmentSeconds)) throw UsageError("--length must be >= 3 s");
  if (!(c.stride > 0.0)) throw UsageError("--stride must be > 0");
  const lma::DatasetManifest manifest = lma::read_manifest(c.manifest);
  const auto& entries = manifest.entries();

  struct FileResult {
    std::vector<lma::FeatureVector> rows;
    std::vector<std::int64_t> starts;
    std::string source_id;
    std::string error;
  };
  std::vector<FileResult> results(entries.size());
  const auto process = [&](std::size_t i) {
    const auto& e = entries[i];
    try {
      auto seq = std::make_shared<const lma::SkeletonSequence>(lma::load_sequence(e.path));
      if (seq->tier() && *seq->tier() != e.tier) {
        throw lma::Error(e.path + ": file tier " + std::to_string(*seq->tier()) +
                         " disagrees with manifest tier " + std::to_string(e.tier));
      }
      results[i].source_id = seq->source_id().empty() ? e.source_id : seq->source_id();
      for (const auto& f : lma::slice_fragments(seq, c.length, c.stride)) {
        results[i].rows.push_back(lma::fragment_features(f));
        results[i].starts.push_back(static_cast<std::int64_t>(f.start_frame()));
      }
    } catch (const std::exception& ex) {
      results[i].rows.clear();
      results[i].starts.clear();
      results[i].error = ex.what();
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(
      c.threads == 0 ? hw : static_cast<std::size_t>(c.threads), std::max<std::size_t>(1, entries.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < entries.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) process(i);
      });
    }
  }

  // Fixed manifest order regardless of which worker finished first.
  lma::FeatureTable table;
  table.feature_names = lma::fragment_feature_names();
  std::size_t total = 0;
  for (const auto& r : results) total += r.rows.size();
  table.values = lma::Matrix(total, lma::kFragmentFeatureCount);
  std::vector<std::string> errors;
  std::size_t row = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) errors.push_back(r.error);
    for (std::size_t k = 0; k < r.rows.size(); ++k, ++row) {
      std::copy(r.rows[k].begin(), r.rows[k].end(), table.values.row(row).begin());
      table.tiers.emplace_back(entries[i].tier);
      table.source_ids.push_back(r.source_id);
      table.start_frames.push_back(r.starts[k]);
    }
  }
  lma::write_feature_csv(c.out, table);
  write_echo("extract", c, echo_path(c.out));

  if (entries.empty()) std::cerr << "warning: manifest " << c.manifest << " is empty\n";
  std::cerr << "extracted " << total << " fragments from " << entries.size() - errors.size() << " of "
            << entries.size() << " files\n";
  if (!errors.empty()) {
    const std::string log_path = c.error_log.empty() ? c.out + ".errors.log" : c.error_log;
    std::ofstream log(log_path);
    for (const auto& e : errors) {
      log << e << '\n';
      std::cerr << "error: " << e << '\n';
    }
    std::cerr << errors.size() << " file(s) failed; see " << log_path << '\n';
    return kExitDataFailure;
  }
  return kExitOk;
}

// Feature table with canonical columns, restricted to labelled rows.
struct LabelledFeatures {
  lma::Matrix X;
  std::vector<int> tiers;
};

LabelledFeatures load_labelled(const std::string& path) {
  const auto table = lma::read_feature_csv(path);
  return {lma::aligned_features(table, lma::fragment_feature_names()), lma::required_tiers(table)};
}

int run_train(const TrainCmdConfig& c) {
  const auto task = task_spec(c.model.task, c.model.binary_split);
  const auto config = train_config(c.model);
  const auto data = load_labelled(c.features);
  const auto mapped = lma::remap_task(data.tiers, task);
  lma::OptimizeResult fit;
  lma::LinearModel model =
      lma::train(data.X.select_rows(mapped.kept_rows), mapped.labels, task.class_count(), config, &fit);
  model.feature_names = lma::fragment_feature_names();
  model.class_names = task.class_names;
  model.task = task.kind;
  lma::save_model(model, c.out);
  write_echo("train", c, echo_path(c.out));
  std::cerr << "trained on " << mapped.labels.size() << " rows: objective " << fit.value << ", "
            << fit.iterations << " iterations, |grad|inf " << fit.grad_inf
            << (fit.converged ? "" : " (not converged)") << '\n';
  return kExitOk;
}

int run_predict(const PredictConfig& c) {
  const lma::LinearModel model = lma::load_model(c.model);
  if (!c.task.empty()) {
    const auto requested = task_spec(c.task, 2).kind;
    if (requested != model.task) {
      throw UsageError("model was trained for task " + std::string(lma::to_string(model.task)) +
                       ", but --task " + c.task + " was requested");
    }
  }
  const auto table = lma::read_feature_csv(c.features);
  const lma::Matrix X = lma::aligned_features(table, model.feature_names);

  std::ofstream out(c.out, std::ios::binary);
  if (!out) throw lma::Error("cannot write " + c.out);
  out << lma::kSourceColumn << ',' << lma::kStartColumn << ',' << lma::kTierColumn << ",predicted";
  for (const auto& n : model.class_names) out << ",p_" << lma::csv::quote(n);
  out << '\n';
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto p = lma::predict_proba(model, X.row(r));
    out << lma::csv::quote(table.source_ids[r]) << ',' << table.start_frames[r] << ',';
    if (table.tiers[r]) out << *table.tiers[r];
    out << ',' << lma::argmax(p);
    for (double v : p) out << ',' << lma::csv::number(v);
    out << '\n';
  }
  write_echo("predict", c, echo_path(c.out));
  return kExitOk;
}

int run_evaluate(const EvaluateConfig& c) {
  if (c.k < 2) throw UsageError("--k must be >= 2");
  const auto task = task_spec(c.model.task, c.model.binary_split);
  const auto config = train_config(c.model);
  const auto data = load_labelled(c.features);
  const auto mapped = lma::remap_task(data.tiers, task);
  std::vector<std::size_t> per_class(static_cast<std::size_t>(task.class_count()), 0);
  for (int label : mapped.labels) ++per_class[static_cast<std::size_t>(label)];
  for (std::size_t cls = 0; cls < per_class.size(); ++cls) {
    if (per_class[cls] < static_cast<std::size_t>(c.k)) {
      throw UsageError("class " + task.class_names[cls] + " has " + std::to_string(per_class[cls]) +
                       " rows, fewer than --k " + std::to_string(c.k));
    }
  }
  const auto report = lma::cross_validate(data.X, data.tiers, task, c.k, config, c.model.seed,
                                          std::max(1, c.threads));
  json j = lma::report_to_json(report);
  j["l2_lambda"] = config.l2_lambda;
  j["seed"] = c.model.seed;
  {
    std::ofstream out(c.out);
    if (!out) throw lma::Error("cannot write " + c.out);
    out << j.dump(2) << '\n';
  }
  const std::string text = lma::render_confusion(report);
  const std::string text_path = c.confusion_out.empty() ? c.out + ".confusion.txt" : c.confusion_out;
  {
    std::ofstream out(text_path);
    if (!out) throw lma::Error("cannot write " + text_path);
    out << text;
  }
  write_echo("evaluate", c, echo_path(c.out));
  std::cout << text;
  return kExitOk;
}

int run_rank(const RankConfig& c) {
  const auto task = task_spec(c.task, c.binary_split);
  const auto data = load_labelled(c.features);
  const auto mapped = lma::remap_task(data.tiers, task);
  const auto ranking =
      lma::rank_features(data.X.select_rows(mapped.kept_rows), mapped.labels, lma::fragment_feature_names());
  std::ofstream out(c.out);
  if (!out) throw lma::Error("cannot write " + c.out);
  out << "rank,feature,H\n";
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    out << i + 1 << ',' << ranking.entries[i].name << ',' << lma::csv::number(ranking.entries[i].h) << '\n';
  }
  write_echo("rank-features", c, echo_path(c.out));
  return kExitOk;
}

int run_balance(const BalanceConfig& c) {
  const auto manifest = lma::read_manifest(c.manifest);
  const auto balanced = lma::balance_dataset(manifest, c.per_class, c.seed);
  lma::write_manifest(balanced, c.out);
  write_echo("balance", c, echo_path(c.out));
  return kExitOk;
}

int run_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config echo " + path);
  json echo;
  try {
    echo = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
  const std::string command = echo.value("command", "");
  const json& cfg = echo.at("config");
  if (command == "synth") return run_synth(cfg.get<SynthConfig>());
  if (command == "extract") return run_extract(cfg.get<ExtractConfig>());
  if (command == "train") return run_train(cfg.get<TrainCmdConfig>());
  if (command == "predict") return run_predict(cfg.get<PredictConfig>());
  if (command == "evaluate") return run_evaluate(cfg.get<EvaluateConfig>());
  if (command == "rank-features") return run_rank(cfg.get<RankConfig>());
  if (command == "balance") return run_balance(cfg.get<BalanceConfig>());
  throw UsageError(path + ": unknown command '" + command + "'");
}

void add_model_options(CLI::App* cmd, ModelConfig& m) {
  cmd->add_option("--task", m.task, "four_way | three_way | binary")->capture_default_str();
  cmd->add_option("--binary-split", m.binary_split, "first tier counted as NSFW in the binary task")
      ->capture_default_str();
  cmd->add_option("--lambda", m.lambda, "L2 penalty on weights")->capture_default_str();
  cmd->add_option("--max-iters", m.max_iters)->capture_default_str();
  cmd->add_option("--grad-tol", m.grad_tol, "stop when the gradient infinity norm is below this")
      ->capture_default_str();
  cmd->add_option("--seed", m.seed)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LMA motion features and tier classification"};
  app.require_subcommand(1);

  SynthConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic regime skeletons and a manifest");
  synth_cmd->add_option("--out-dir", synth.out_dir)->required();
  synth_cmd->add_option("--per-regime", synth.per_regime)->capture_default_str();
  synth_cmd->add_option("--duration", synth.duration, "seconds")->capture_default_str();
  synth_cmd->add_option("--fps", synth.fps)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "jitter std in meters")->capture_default_str();
  synth_cmd->add_option("--overlap", synth.overlap, "max share of an adjacent regime")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  ExtractConfig extract;
  auto* extract_cmd = app.add_subcommand("extract", "skeleton files -> 110-dim fragment feature CSV");
  extract_cmd->add_option("--manifest", extract.manifest)->required();
  extract_cmd->add_option("--out", extract.out)->required();
  extract_cmd->add_option("--error-log", extract.error_log, "default: <out>.errors.log");
  extract_cmd->add_option("--length", extract.length, "fragment length, seconds")->capture_default_str();
  extract_cmd->add_option("--stride", extract.stride, "fragment stride, seconds")->capture_default_str();
  extract_cmd->add_option("--threads", extract.threads, "0 = all cores")->capture_default_str();

  TrainCmdConfig train;
  auto* train_cmd = app.add_subcommand("train", "fit a logistic-regression model");
  train_cmd->add_option("--features", train.features)->required();
  train_cmd->add_option("--out", train.out)->required();
  add_model_options(train_cmd, train.model);

  PredictConfig predict;
  auto* predict_cmd = app.add_subcommand("predict", "per-row class and probabilities");
  predict_cmd->add_option("--model", predict.model)->required();
  predict_cmd->add_option("--features", predict.features)->required();
  predict_cmd->add_option("--out", predict.out)->required();
  predict_cmd->add_option("--task", predict.task, "fail unless the model was trained for this task");

  EvaluateConfig evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "stratified k-fold cross-validation report");
  evaluate_cmd->add_option("--features", evaluate.features)->required();
  evaluate_cmd->add_option("--out", evaluate.out, "report JSON")->required();
  evaluate_cmd->add_option("--confusion-out", evaluate.confusion_out, "default: <out>.confusion.txt");
  evaluate_cmd->add_option("--k", evaluate.k)->capture_default_str();
  evaluate_cmd->add_option("--threads", evaluate.threads, "folds trained in parallel")->capture_default_str();
  add_model_options(evaluate_cmd, evaluate.model);

  RankConfig rank;
  auto* rank_cmd = app.add_subcommand("rank-features", "Kruskal-Wallis H per feature");
  rank_cmd->add_option("--features", rank.features)->required();
  rank_cmd->add_option("--out", rank.out)->required();
  rank_cmd->add_option("--task", rank.task)->capture_default_str();
  rank_cmd->add_option("--binary-split", rank.binary_split)->capture_default_str();

  BalanceConfig balance;
  auto* balance_cmd = app.add_subcommand("balance", "seeded per-tier subsample of a manifest");
  balance_cmd->add_option("--manifest", balance.manifest)->required();
  balance_cmd->add_option("--out", balance.out)->required();
  balance_cmd->add_option("--per-class", balance.per_class)->capture_default_str();
  balance_cmd->add_option("--seed", balance.seed)->capture_default_str();

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its config echo");
  replay_cmd->add_option("echo", replay_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*extract_cmd) return run_extract(extract);
    if (*train_cmd) return run_train(train);
    if (*predict_cmd) return run_predict(predict);
    if (*evaluate_cmd) return run_evaluate(evaluate);
    if (*rank_cmd) return run_rank(rank);
    if (*balance_cmd) return run_balance(balance);
    if (*replay_cmd) return run_replay(replay_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataFailure;
  }
  return kExitUsage;
}
