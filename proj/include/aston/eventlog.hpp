#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aston/error.hpp"

namespace aston {

// Reserved token labels shared by vocabularies, example suffixes and the
// missing-resource sentinel.
inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kEocToken = "<EOC>";
inline constexpr std::string_view kUnkToken = "<UNK>";

// --------------------------------------------------------------------------
// Timestamps. Values are seconds since epoch of a naive local wall clock;
// no timezone conversion is applied anywhere.
// --------------------------------------------------------------------------

struct CivilTime {
  int year, month, day;      // month 1-12, day 1-31
  int hour, minute, second;  // 24h clock
  int weekday_mon0;          // Monday = 0 ... Sunday = 6
  std::int64_t seconds_since_midnight;
};

/// Parse using a pattern of the tokens yyyy MM dd HH mm ss (other characters
/// are literals). An empty pattern accepts ISO 8601 (space or 'T' separator,
/// optional fractional seconds and UTC offset, both ignored) and the
/// dd-MM-yyyy HH:mm:ss layout.
std::int64_t parse_timestamp(std::string_view text, std::string_view pattern = {});

/// Inverse of parse_timestamp's ISO form: "yyyy-MM-dd HH:mm:ss".
std::string format_timestamp(std::int64_t epoch_seconds);

CivilTime to_civil(std::int64_t epoch_seconds);

// --------------------------------------------------------------------------
// Domain types
// --------------------------------------------------------------------------

struct Event {
  std::string case_id;
  std::string activity;
  std::int64_t timestamp = 0;  // naive local epoch seconds
  std::string resource;        // kUnkToken when the log has no resources

  bool operator==(const Event&) const = default;
};

/// Non-empty, chronologically ordered events of one case. Events with equal
/// timestamps keep their source-file order.
struct Trace {
  std::string case_id;
  std::vector<Event> events;

  std::size_t length() const { return events.size(); }
  bool operator==(const Trace&) const = default;
};

struct EventLog {
  std::vector<Trace> traces;
  std::string source_path;

  std::size_t num_traces() const { return traces.size(); }
  std::size_t num_events() const;
  /// Distinct activities in first-appearance order.
  std::vector<std::string> activities() const;
  std::size_t max_trace_length() const;

  bool operator==(const EventLog& o) const { return traces == o.traces; }
};

/// One prefix/suffix training or evaluation instance. The prefix is a view
/// into the owning log's trace; the suffix holds activity labels and always
/// ends with exactly one kEocToken.
struct Example {
  std::span<const Event> prefix;
  std::vector<std::string> suffix_activities;

  const std::string& case_id() const { return prefix.front().case_id; }
  std::size_t prefix_len() const { return prefix.size(); }
  /// Suffix labels without the end-of-case terminator.
  std::span<const std::string> gold_suffix() const {
    return {suffix_activities.data(), suffix_activities.size() - 1};
  }
};

struct FoldPlan {
  int fold_count = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignments;  // case id -> fold index
};

struct FoldSplit {
  EventLog train;
  EventLog val;
  EventLog test;
};

// --------------------------------------------------------------------------
// Operations
// --------------------------------------------------------------------------

struct CsvColumns {
  std::string case_id = "case";
  std::string activity = "activity";
  std::string timestamp = "timestamp";
  std::string resource = "resource";  // tolerated if absent from the header
  std::string ts_format;              // empty = auto (ISO 8601 / dd-MM-yyyy)
};

EventLog parse_csv(const std::string& path, const CsvColumns& columns = {});
EventLog parse_csv_text(std::string_view text, const CsvColumns& columns = {},
                        std::string source_name = "<string>");

void write_csv(const EventLog& log, std::ostream& out);
void write_csv(const EventLog& log, const std::string& path);

/// For each trace of length n, one example per k in [min_prefix_len, n].
/// The k = n example's suffix is the end-of-case token alone. Views stay
/// valid while `log` is alive.
std::vector<Example> make_examples(const EventLog& log, int min_prefix_len = 1);

/// Deterministic trace->fold assignment; fold sizes differ by at most one.
FoldPlan make_fold_plan(const EventLog& log, int fold_count, std::uint64_t seed);

/// For each fold i: test = fold i; the remaining traces are shuffled by the
/// plan's seed and split (1 - val_fraction) / val_fraction into train / val.
std::vector<FoldSplit> split_by_plan(const EventLog& log, const FoldPlan& plan,
                                     double val_fraction);

std::vector<FoldSplit> kfold_split(const EventLog& log, int fold_count, std::uint64_t seed,
                                   double val_fraction);

/// Plain seeded trace-level train/validation split (no test fold).
std::pair<EventLog, EventLog> split_train_val(const EventLog& log, double val_fraction,
                                              std::uint64_t seed);

void save_fold_plan(const FoldPlan& plan, const std::string& path);
FoldPlan load_fold_plan(const std::string& path);

/// Summary statistics for a log; durations are in days.
struct LogStats {
  std::size_t traces = 0;
  std::size_t activities = 0;
  std::size_t events = 0;
  double avg_case_length = 0.0;
  std::size_t max_case_length = 0;
  std::size_t variants = 0;
  double avg_event_duration = 0.0;
  double max_event_duration = 0.0;
  double avg_case_duration = 0.0;
  double max_case_duration = 0.0;
};

LogStats compute_stats(const EventLog& log);

}  // namespace aston
