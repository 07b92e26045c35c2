#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aston/decode.hpp"
#include "aston/eventlog.hpp"
#include "aston/metrics.hpp"
#include "aston/model.hpp"

namespace aston {

/// Mean scores of one decoding strategy on one cross-validation fold.
struct FoldResult {
  int fold = 0;
  DecodeConfig::Strategy strategy = DecodeConfig::Strategy::kArgmax;
  double dl_norm_mean = 0.0;
  double pred_len_mean = 0.0;
  double gold_len_mean = 0.0;
  std::size_t n = 0;
};

struct ExperimentConfig {
  AstonConfig model;
  std::vector<DecodeConfig> decodes;
  int fold_count = 5;
  double val_fraction = 0.2;

  /// Key-value echo of every field, written next to output artifacts.
  std::string describe() const;
};

struct ExperimentReport {
  std::vector<FoldResult> folds;
  ExperimentConfig config;

  struct StrategyMean {
    DecodeConfig::Strategy strategy;
    double dl_norm = 0.0;
    double pred_len = 0.0;
    double gold_len = 0.0;
  };
  /// Macro average: equal weight per fold.
  std::vector<StrategyMean> strategy_means() const;
};

/// Decode every example under every strategy and score against the gold
/// suffix (end-of-case excluded on both sides) with dl_norm. Per-example
/// work runs on up to ASTON_THREADS threads; results are reduced in example
/// order so the outcome does not depend on the thread count.
/// `expected_activity_vocab`, when given, must equal the model's.
std::vector<FoldResult> evaluate_fold(const AstonModel& model,
                                      const std::vector<Example>& test_examples,
                                      const std::vector<DecodeConfig>& decodes, int fold_index = 0,
                                      const Vocabulary* expected_activity_vocab = nullptr);

/// Full cross-validation experiment: per fold, fit features on the training
/// split, train a model, select it by validation loss and evaluate on the
/// held-out fold. Fully determined by the plan and the configs' seeds.
ExperimentReport run_experiment(const EventLog& log, const FoldPlan& plan,
                                const ExperimentConfig& config, std::ostream* progress = nullptr);

void write_report_csv(const ExperimentReport& report, std::ostream& out);
std::string format_report_table(const ExperimentReport& report);

/// One decoded prefix for the predictions CSV.
struct PredictionRow {
  std::string case_id;
  std::size_t prefix_len = 0;
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
};

std::vector<PredictionRow> predict_examples(const AstonModel& model,
                                            const std::vector<Example>& examples,
                                            const DecodeConfig& config);

/// CSV `case_id,prefix_len,predicted_suffix,gold_suffix`, suffixes joined
/// with '|'.
void write_predictions_csv(const std::vector<PredictionRow>& rows, std::ostream& out);

/// Evaluation thread budget: ASTON_THREADS, default 4, at least 1.
int eval_thread_count();

}  // namespace aston
