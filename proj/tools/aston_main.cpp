#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aston/checkpoint.hpp"
#include "aston/decode.hpp"
#include "aston/eventlog.hpp"
#include "aston/experiment.hpp"
#include "aston/features.hpp"
#include "aston/metrics.hpp"
#include "aston/model.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string log_path;
  std::string out_dir;
  aston::CsvColumns columns;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_out = true) {
  cmd->add_option("--log", o.log_path, "event log CSV")->required();
  if (need_out) cmd->add_option("--out", o.out_dir, "output directory")->required();
  cmd->add_option("--col-case", o.columns.case_id, "case id column name");
  cmd->add_option("--col-activity", o.columns.activity, "activity column name");
  cmd->add_option("--col-timestamp", o.columns.timestamp, "timestamp column name");
  cmd->add_option("--col-resource", o.columns.resource, "resource column name (optional in the file)");
  cmd->add_option("--ts-format", o.columns.ts_format,
                  "timestamp pattern (tokens yyyy MM dd HH mm ss); default ISO 8601 or dd-MM-yyyy HH:mm:ss");
}

struct HyperOpts {
  aston::AstonConfig model;
  double val_fraction = 0.2;
  int folds = 5;
};

void add_hyper(CLI::App* cmd, HyperOpts& h, bool with_folds) {
  cmd->add_option("--epochs", h.model.epochs, "training epochs");
  cmd->add_option("--batch-size", h.model.batch_size, "mini-batch size");
  cmd->add_option("--hidden", h.model.hidden_dim, "GRU hidden dimension");
  cmd->add_option("--embedding", h.model.embedding_dim, "embedding dimension");
  cmd->add_option("--dropout", h.model.dropout, "dropout probability");
  cmd->add_option("--lr", h.model.learning_rate, "Adam learning rate");
  cmd->add_option("--encoder-layers", h.model.encoder_layers, "encoder GRU layers");
  cmd->add_option("--decoder-layers", h.model.decoder_layers, "decoder GRU layers");
  cmd->add_option("--grad-clip", h.model.grad_clip, "global gradient norm clip (0 = off)");
  cmd->add_option("--seed", h.model.seed, "random seed");
  cmd->add_option("--min-prefix-len", h.model.min_prefix_len, "shortest prefix to slice");
  cmd->add_option("--val-fraction", h.val_fraction, "validation share of the training split");
  if (with_folds) cmd->add_option("--folds", h.folds, "cross-validation fold count");
}

struct DecodeOpts {
  std::string strategy = "beam_norm";
  int beam_width = 5;
  double alpha = 0.65;
  int max_len = 0;
};

void add_decode(CLI::App* cmd, DecodeOpts& d, bool with_strategy) {
  if (with_strategy)
    cmd->add_option("--strategy", d.strategy, "argmax | random | beam | beam_norm");
  cmd->add_option("--beam-width", d.beam_width, "beam width");
  cmd->add_option("--alpha", d.alpha, "length-normalization exponent");
  cmd->add_option("--max-len", d.max_len, "suffix length cap (0 = training max trace length)");
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw aston::ConfigError("output directory must not be empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw aston::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aston::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string describe_columns(const aston::CsvColumns& c) {
  std::ostringstream out;
  out << "col_case=" << c.case_id << "\ncol_activity=" << c.activity
      << "\ncol_timestamp=" << c.timestamp << "\ncol_resource=" << c.resource
      << "\nts_format=" << c.ts_format << "\n";
  return out.str();
}

std::string describe_decode(const aston::DecodeConfig& d) {
  std::ostringstream out;
  out << "strategy=" << aston::strategy_name(d.strategy) << "\nbeam_width=" << d.beam_width
      << "\nalpha=" << d.alpha << "\nmax_len=" << d.max_len << "\nseed=" << d.seed << "\n";
  return out.str();
}

int cmd_prepare(const CommonOpts& common, int folds, std::uint64_t seed) {
  const aston::EventLog log = aston::parse_csv(common.log_path, common.columns);
  const aston::LogStats stats = aston::compute_stats(log);
  ensure_out_dir(common.out_dir);
  aston::save_fold_plan(aston::make_fold_plan(log, folds, seed), (fs::path(common.out_dir) / "fold_plan.json").string());
  write_text_file(fs::path(common.out_dir) / "prepare_config.txt",
                  "log=" + common.log_path + "\nfolds=" + std::to_string(folds) + "\nseed=" +
                      std::to_string(seed) + "\n" + describe_columns(common.columns));

  std::printf("%zu traces, %zu activities, %zu events\n", stats.traces, stats.activities, stats.events);
  std::printf("avg case length %.2f, max case length %zu, variants %zu\n", stats.avg_case_length,
              stats.max_case_length, stats.variants);
  std::printf("avg event duration %.2f days (max %.2f), avg case duration %.2f days (max %.2f)\n",
              stats.avg_event_duration, stats.max_event_duration, stats.avg_case_duration,
              stats.max_case_duration);
  std::printf("fold plan written to %s\n", (fs::path(common.out_dir) / "fold_plan.json").c_str());
  return 0;
}

int cmd_train(const CommonOpts& common, const HyperOpts& hyper, const std::string& checkpoint_path,
              const std::string& fold_plan_path, int fold_index) {
  const aston::EventLog log = aston::parse_csv(common.log_path, common.columns);
  aston::EventLog train_log, val_log;
  if (!fold_plan_path.empty()) {
    const aston::FoldPlan plan = aston::load_fold_plan(fold_plan_path);
    if (fold_index < 0 || fold_index >= plan.fold_count)
      throw aston::ConfigError("--fold must be in [0, " + std::to_string(plan.fold_count) + ")");
    auto splits = aston::split_by_plan(log, plan, hyper.val_fraction);
    train_log = std::move(splits[static_cast<std::size_t>(fold_index)].train);
    val_log = std::move(splits[static_cast<std::size_t>(fold_index)].val);
  } else {
    auto [train, val] = aston::split_train_val(log, hyper.val_fraction, hyper.model.seed);
    train_log = std::move(train);
    val_log = std::move(val);
  }

  const aston::FittedFeatures fitted = aston::fit_features(train_log);
  aston::AstonModel model(hyper.model, fitted.activity_vocab, fitted.resource_vocab, fitted.stats,
                          static_cast<int>(train_log.max_trace_length()));
  const auto train_ex = aston::make_examples(train_log, hyper.model.min_prefix_len);
  const auto val_ex = aston::make_examples(val_log, hyper.model.min_prefix_len);
  std::cerr << "training on " << train_ex.size() << " examples (" << train_log.num_traces()
            << " traces), validating on " << val_ex.size() << "\n";

  const aston::TrainResult result =
      aston::train_model<float>(model, train_ex, val_ex, [](const aston::EpochStats& s) {
        std::cerr << "epoch " << s.epoch << " train " << s.train_loss << " val " << s.val_loss
                  << "\n";
      });

  ensure_out_dir(common.out_dir);
  const fs::path out_dir(common.out_dir);
  const fs::path ckpt = checkpoint_path.empty() ? out_dir / "model.ckpt" : fs::path(checkpoint_path);
  aston::save_checkpoint(model, ckpt.string(),
                         {result.best_val_loss, result.best_epoch});

  std::ostringstream history;
  history << "epoch,train_loss,val_loss\n";
  for (const aston::EpochStats& s : result.history) {
    char line[96];
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", s.epoch, s.train_loss, s.val_loss);
    history << line;
  }
  write_text_file(out_dir / "loss_history.csv", history.str());

  std::ostringstream cfg;
  cfg << "log=" << common.log_path << "\n"
      << describe_columns(common.columns) << "epochs=" << hyper.model.epochs
      << "\nbatch_size=" << hyper.model.batch_size << "\nhidden=" << hyper.model.hidden_dim
      << "\nembedding=" << hyper.model.embedding_dim << "\ndropout=" << hyper.model.dropout
      << "\nlr=" << hyper.model.learning_rate << "\nseed=" << hyper.model.seed
      << "\nval_fraction=" << hyper.val_fraction << "\nmin_prefix_len=" << hyper.model.min_prefix_len
      << "\ncheckpoint=" << ckpt.string() << "\n";
  write_text_file(out_dir / "train_config.txt", cfg.str());

  std::cerr << "best epoch " << result.best_epoch << " (val loss " << result.best_val_loss
            << "); checkpoint written to " << ckpt << "\n";
  return 0;
}

int cmd_predict(const CommonOpts& common, const std::string& checkpoint_path,
                const DecodeOpts& decode, std::uint64_t seed, int min_prefix_len,
                bool prefix_file) {
  aston::AstonModel model = aston::load_checkpoint(checkpoint_path);
  const aston::EventLog log = aston::parse_csv(common.log_path, common.columns);

  std::vector<aston::Example> examples;
  if (prefix_file) {
    // Whole traces act as prefixes; there is no gold suffix.
    for (const aston::Trace& t : log.traces) {
      aston::Example ex;
      ex.prefix = std::span<const aston::Event>(t.events.data(), t.events.size());
      ex.suffix_activities = {std::string(aston::kEocToken)};
      examples.push_back(std::move(ex));
    }
  } else {
    examples = aston::make_examples(log, min_prefix_len);
  }

  aston::DecodeConfig cfg;
  cfg.strategy = aston::parse_strategy(decode.strategy);
  cfg.beam_width = decode.beam_width;
  cfg.alpha = decode.alpha;
  cfg.max_len = decode.max_len;
  cfg.seed = seed;

  const auto rows = aston::predict_examples(model, examples, cfg);
  ensure_out_dir(common.out_dir);
  std::ofstream out(fs::path(common.out_dir) / "predictions.csv", std::ios::binary);
  aston::write_predictions_csv(rows, out);
  write_text_file(fs::path(common.out_dir) / "predict_config.txt",
                  "log=" + common.log_path + "\ncheckpoint=" + checkpoint_path + "\n" +
                      describe_decode(cfg) + "min_prefix_len=" + std::to_string(min_prefix_len) +
                      "\n" + describe_columns(common.columns));
  std::cerr << rows.size() << " predictions written\n";
  return 0;
}

int run_folds(const CommonOpts& common, const HyperOpts& hyper,
              const std::vector<aston::DecodeConfig>& decodes, std::uint64_t decode_seed) {
  const aston::EventLog log = aston::parse_csv(common.log_path, common.columns);
  const aston::FoldPlan plan = aston::make_fold_plan(log, hyper.folds, hyper.model.seed);

  aston::ExperimentConfig config;
  config.model = hyper.model;
  config.decodes = decodes;
  for (aston::DecodeConfig& d : config.decodes) d.seed = decode_seed;
  config.fold_count = hyper.folds;
  config.val_fraction = hyper.val_fraction;

  const aston::ExperimentReport report = aston::run_experiment(log, plan, config, &std::cerr);

  ensure_out_dir(common.out_dir);
  const fs::path out_dir(common.out_dir);
  aston::save_fold_plan(plan, (out_dir / "fold_plan.json").string());
  {
    std::ofstream out(out_dir / "report.csv", std::ios::binary);
    aston::write_report_csv(report, out);
  }
  const std::string table = aston::format_report_table(report);
  write_text_file(out_dir / "report.txt", table);
  write_text_file(out_dir / "run_config.txt",
                  "log=" + common.log_path + "\n" + describe_columns(common.columns) +
                      config.describe());
  std::fputs(table.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"encoder-decoder activity suffix prediction for process event logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags override");

  // prepare
  CommonOpts prep_common;
  int prep_folds = 5;
  std::uint64_t prep_seed = 1;
  CLI::App* prepare = app.add_subcommand("prepare", "parse a log, print statistics, write a fold plan");
  add_common(prepare, prep_common);
  prepare->add_option("--folds", prep_folds, "cross-validation fold count");
  prepare->add_option("--seed", prep_seed, "fold assignment seed");

  // train
  CommonOpts train_common;
  HyperOpts train_hyper;
  std::string train_ckpt, train_plan;
  int train_fold = 0;
  CLI::App* train = app.add_subcommand("train", "train a model on a train/validation split");
  add_common(train, train_common);
  add_hyper(train, train_hyper, false);
  train->add_option("--checkpoint", train_ckpt, "checkpoint output path (default <out>/model.ckpt)");
  train->add_option("--fold-plan", train_plan, "fold plan JSON; train one fold instead of a plain split");
  train->add_option("--fold", train_fold, "fold index to train when --fold-plan is given");

  // predict
  CommonOpts pred_common;
  DecodeOpts pred_decode;
  std::string pred_ckpt;
  std::uint64_t pred_seed = 1;
  int pred_min_prefix = 1;
  bool pred_prefix_file = false;
  CLI::App* predict = app.add_subcommand("predict", "decode suffixes for prefixes of a log");
  add_common(predict, pred_common);
  predict->add_option("--checkpoint", pred_ckpt, "trained model checkpoint")->required();
  add_decode(predict, pred_decode, true);
  predict->add_option("--seed", pred_seed, "sampling seed (random strategy)");
  predict->add_option("--min-prefix-len", pred_min_prefix, "shortest prefix to slice");
  predict->add_flag("--prefix-file", pred_prefix_file,
                    "treat each trace as a complete prefix (no gold suffixes)");

  // evaluate
  CommonOpts eval_common;
  HyperOpts eval_hyper;
  DecodeOpts eval_decode;
  std::uint64_t eval_decode_seed = 1;
  CLI::App* evaluate = app.add_subcommand("evaluate", "cross-validated evaluation of one strategy");
  add_common(evaluate, eval_common);
  add_hyper(evaluate, eval_hyper, true);
  add_decode(evaluate, eval_decode, true);
  evaluate->add_option("--decode-seed", eval_decode_seed, "sampling seed (random strategy)");

  // compare
  CommonOpts cmp_common;
  HyperOpts cmp_hyper;
  DecodeOpts cmp_decode;
  std::uint64_t cmp_decode_seed = 1;
  CLI::App* compare = app.add_subcommand("compare", "cross-validated comparison of all four strategies");
  add_common(compare, cmp_common);
  add_hyper(compare, cmp_hyper, true);
  add_decode(compare, cmp_decode, false);
  compare->add_option("--decode-seed", cmp_decode_seed, "sampling seed (random strategy)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) return cmd_prepare(prep_common, prep_folds, prep_seed);
    if (train->parsed())
      return cmd_train(train_common, train_hyper, train_ckpt, train_plan, train_fold);
    if (predict->parsed())
      return cmd_predict(pred_common, pred_ckpt, pred_decode, pred_seed, pred_min_prefix,
                         pred_prefix_file);
    if (evaluate->parsed()) {
      aston::DecodeConfig d;
      d.strategy = aston::parse_strategy(eval_decode.strategy);
      d.beam_width = eval_decode.beam_width;
      d.alpha = eval_decode.alpha;
      d.max_len = eval_decode.max_len;
      return run_folds(eval_common, eval_hyper, {d}, eval_decode_seed);
    }
    if (compare->parsed()) {
      std::vector<aston::DecodeConfig> decodes;
      for (auto strategy : {aston::DecodeConfig::Strategy::kArgmax,
                            aston::DecodeConfig::Strategy::kRandom,
                            aston::DecodeConfig::Strategy::kBeam,
                            aston::DecodeConfig::Strategy::kBeamNorm}) {
        aston::DecodeConfig d;
        d.strategy = strategy;
        d.beam_width = cmp_decode.beam_width;
        d.alpha = cmp_decode.alpha;
        d.max_len = cmp_decode.max_len;
        decodes.push_back(d);
      }
      return run_folds(cmp_common, cmp_hyper, decodes, cmp_decode_seed);
    }
  } catch (const aston::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
