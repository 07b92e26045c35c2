#include "aston/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

namespace aston {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int eval_thread_count() {
  if (const char* env = std::getenv("ASTON_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 4;
}

std::string ExperimentConfig::describe() const {
  std::ostringstream out;
  out << "folds=" << fold_count << "\n";
  out << "val_fraction=" << val_fraction << "\n";
  out << "epochs=" << model.epochs << "\n";
  out << "batch_size=" << model.batch_size << "\n";
  out << "embedding_dim=" << model.embedding_dim << "\n";
  out << "hidden_dim=" << model.hidden_dim << "\n";
  out << "encoder_layers=" << model.encoder_layers << "\n";
  out << "decoder_layers=" << model.decoder_layers << "\n";
  out << "dropout=" << model.dropout << "\n";
  out << "learning_rate=" << model.learning_rate << "\n";
  out << "grad_clip=" << model.grad_clip << "\n";
  out << "min_prefix_len=" << model.min_prefix_len << "\n";
  out << "seed=" << model.seed << "\n";
  for (const DecodeConfig& d : decodes) {
    out << "strategy=" << strategy_name(d.strategy) << " beam_width=" << d.beam_width
        << " alpha=" << d.alpha << " max_len=" << d.max_len << " seed=" << d.seed << "\n";
  }
  return out.str();
}

std::vector<ExperimentReport::StrategyMean> ExperimentReport::strategy_means() const {
  std::vector<StrategyMean> means;
  for (const DecodeConfig& d : config.decodes) {
    StrategyMean m;
    m.strategy = d.strategy;
    std::size_t fold_count = 0;
    for (const FoldResult& f : folds) {
      if (f.strategy != d.strategy) continue;
      m.dl_norm += f.dl_norm_mean;
      m.pred_len += f.pred_len_mean;
      m.gold_len += f.gold_len_mean;
      ++fold_count;
    }
    if (fold_count > 0) {
      m.dl_norm /= static_cast<double>(fold_count);
      m.pred_len /= static_cast<double>(fold_count);
      m.gold_len /= static_cast<double>(fold_count);
    }
    means.push_back(m);
  }
  return means;
}

std::vector<FoldResult> evaluate_fold(const AstonModel& model,
                                      const std::vector<Example>& test_examples,
                                      const std::vector<DecodeConfig>& decodes, int fold_index,
                                      const Vocabulary* expected_activity_vocab) {
  if (test_examples.empty()) throw DataError("evaluate_fold: no test examples");
  if (expected_activity_vocab != nullptr && !(*expected_activity_vocab == model.activity_vocab()))
    throw DataError("evaluate_fold: model vocabulary does not match the fold's vocabulary");

  struct Cell {
    double sim = 0.0;
    double pred_len = 0.0;
    double gold_len = 0.0;
  };
  const std::size_t n = test_examples.size();
  std::vector<std::vector<Cell>> cells(decodes.size(), std::vector<Cell>(n));

  parallel_for(n, eval_thread_count(), [&](std::size_t i) {
    const Example& ex = test_examples[i];
    const AstonStepper<float> stepper(model, ex.prefix);
    std::vector<int> gold;
    gold.reserve(ex.gold_suffix().size());
    for (const std::string& label : ex.gold_suffix()) gold.push_back(model.activity_vocab().id(label));
    for (std::size_t d = 0; d < decodes.size(); ++d) {
      const DecodeConfig& cfg = decodes[d];
      const int max_len = cfg.max_len > 0 ? cfg.max_len : model.max_trace_len();
      std::vector<int> pred;
      switch (cfg.strategy) {
        case DecodeConfig::Strategy::kArgmax:
          pred = predict_argmax(stepper, max_len);
          break;
        case DecodeConfig::Strategy::kRandom:
          pred = predict_random(stepper, max_len, mix_seed(cfg.seed, i));
          break;
        case DecodeConfig::Strategy::kBeam:
          pred = predict_beam(stepper, cfg.beam_width, false, cfg.alpha, max_len).activity_ids;
          break;
        case DecodeConfig::Strategy::kBeamNorm:
          pred = predict_beam(stepper, cfg.beam_width, true, cfg.alpha, max_len).activity_ids;
          break;
      }
      Cell& cell = cells[d][i];
      cell.sim = dl_norm(pred, gold);
      cell.pred_len = static_cast<double>(pred.size());
      cell.gold_len = static_cast<double>(gold.size());
    }
  });

  std::vector<FoldResult> results;
  for (std::size_t d = 0; d < decodes.size(); ++d) {
    FoldResult r;
    r.fold = fold_index;
    r.strategy = decodes[d].strategy;
    r.n = n;
    for (const Cell& c : cells[d]) {
      r.dl_norm_mean += c.sim;
      r.pred_len_mean += c.pred_len;
      r.gold_len_mean += c.gold_len;
    }
    r.dl_norm_mean /= static_cast<double>(n);
    r.pred_len_mean /= static_cast<double>(n);
    r.gold_len_mean /= static_cast<double>(n);
    results.push_back(r);
  }
  return results;
}

ExperimentReport run_experiment(const EventLog& log, const FoldPlan& plan,
                                const ExperimentConfig& config, std::ostream* progress) {
  ExperimentReport report;
  report.config = config;
  const std::vector<FoldSplit> splits = split_by_plan(log, plan, config.val_fraction);
  for (std::size_t fold = 0; fold < splits.size(); ++fold) {
    const FoldSplit& split = splits[fold];
    try {
      const FittedFeatures fitted = fit_features(split.train);
      AstonConfig model_cfg = config.model;
      model_cfg.seed = mix_seed(config.model.seed, fold);
      AstonModel model(model_cfg, fitted.activity_vocab, fitted.resource_vocab, fitted.stats,
                       static_cast<int>(split.train.max_trace_length()));
      const auto train_ex = make_examples(split.train, config.model.min_prefix_len);
      const auto val_ex = make_examples(split.val, config.model.min_prefix_len);
      const TrainResult trained = train_model<float>(
          model, train_ex, val_ex, [&](const EpochStats& s) {
            if (progress != nullptr && (s.epoch % 10 == 0 || s.epoch == 1))
              *progress << "fold " << fold << " epoch " << s.epoch << " train " << s.train_loss
                        << " val " << s.val_loss << "\n";
          });
      if (progress != nullptr)
        *progress << "fold " << fold << " best epoch " << trained.best_epoch << " val "
                  << trained.best_val_loss << "\n";

      std::vector<DecodeConfig> decodes = config.decodes;
      for (DecodeConfig& d : decodes) d.seed = mix_seed(d.seed, fold);
      auto fold_results = evaluate_fold(model, make_examples(split.test, config.model.min_prefix_len),
                                        decodes, static_cast<int>(fold), &fitted.activity_vocab);
      report.folds.insert(report.folds.end(), fold_results.begin(), fold_results.end());
    } catch (const Error& e) {
      throw DataError("fold " + std::to_string(fold) + ": " + e.what());
    }
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "fold,strategy,dl_norm_mean,pred_len_mean,gold_len_mean,n\n";
  for (const FoldResult& f : report.folds) {
    out << f.fold << ',' << strategy_name(f.strategy) << ',' << fmt("%.6f", f.dl_norm_mean) << ','
        << fmt("%.4f", f.pred_len_mean) << ',' << fmt("%.4f", f.gold_len_mean) << ',' << f.n
        << "\n";
  }
}

std::string format_report_table(const ExperimentReport& report) {
  std::ostringstream out;
  out << "strategy      dl_norm   pred_len  gold_len\n";
  for (const auto& m : report.strategy_means()) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-12s  %.4f    %-8.2f  %-8.2f\n",
                  strategy_name(m.strategy).c_str(), m.dl_norm, m.pred_len, m.gold_len);
    out << line;
  }
  out << "\nper fold:\n";
  for (const FoldResult& f : report.folds) {
    char line[160];
    std::snprintf(line, sizeof(line), "  fold %-2d %-12s dl_norm %.4f  pred_len %-8.2f gold_len %-8.2f n=%zu\n",
                  f.fold, strategy_name(f.strategy).c_str(), f.dl_norm_mean, f.pred_len_mean,
                  f.gold_len_mean, f.n);
    out << line;
  }
  return out.str();
}

std::vector<PredictionRow> predict_examples(const AstonModel& model,
                                            const std::vector<Example>& examples,
                                            const DecodeConfig& config) {
  config.validate();
  std::vector<PredictionRow> rows(examples.size());
  parallel_for(examples.size(), eval_thread_count(), [&](std::size_t i) {
    const Example& ex = examples[i];
    DecodeConfig cfg = config;
    cfg.seed = mix_seed(config.seed, i);
    const std::vector<int> pred = predict_suffix(model, ex.prefix, cfg);
    PredictionRow& row = rows[i];
    row.case_id = ex.case_id();
    row.prefix_len = ex.prefix_len();
    for (int id : pred) row.predicted.push_back(model.activity_vocab().label(id));
    for (const std::string& label : ex.gold_suffix()) row.gold.push_back(label);
  });
  return rows;
}

namespace {

void write_quoted_field(std::ostream& out, const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) {
    out << value;
    return;
  }
  out << '"';
  for (char c : value) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::string joined;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) joined += '|';
    joined += labels[i];
  }
  return joined;
}

}  // namespace

void write_predictions_csv(const std::vector<PredictionRow>& rows, std::ostream& out) {
  out << "case_id,prefix_len,predicted_suffix,gold_suffix\n";
  for (const PredictionRow& row : rows) {
    write_quoted_field(out, row.case_id);
    out << ',' << row.prefix_len << ',';
    write_quoted_field(out, join_labels(row.predicted));
    out << ',';
    write_quoted_field(out, join_labels(row.gold));
    out << "\n";
  }
}

}  // namespace aston
