#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "aston/eventlog.hpp"

namespace aston {

/// Token ids. 0..2 are reserved for PAD / EOC / UNK; real tokens get dense
/// ids from 3 upward in first-seen order.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kEocId = 1;
  static constexpr int kUnkId = 2;
  static constexpr int kNumReserved = 3;

  Vocabulary();

  /// Registers a token unless it is already known or reserved.
  int add(std::string_view token);

  /// Id for a token; unknown tokens map to UNK.
  int id(std::string_view token) const;

  /// Label for an id; throws on out-of-range ids.
  const std::string& label(int id) const;

  int size() const { return static_cast<int>(labels_.size()); }

  const std::vector<std::string>& labels() const { return labels_; }

  /// Rebuild from a label list (checkpoint loading). The first three labels
  /// must be the reserved tokens.
  static Vocabulary from_labels(const std::vector<std::string>& labels);

  bool operator==(const Vocabulary& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> ids_;
};

/// Normalization statistics for the two duration features, computed over
/// log(1 + seconds) on a training split. Standard deviations are floored
/// to 1e-8.
struct TimeStats {
  double mean_log_since_prev = 0.0;
  double std_log_since_prev = 1.0;
  double mean_log_since_start = 0.0;
  double std_log_since_start = 1.0;

  bool operator==(const TimeStats&) const = default;
};

/// The 8-feature event encoding: two categorical ids and six numeric values.
/// The four clock/calendar features live in [0, 1].
struct EventFeatures {
  int activity_id = 0;
  int resource_id = 0;
  float t_since_start = 0.0f;    // z-scored log(1 + seconds)
  float t_since_prev = 0.0f;     // z-scored log(1 + seconds)
  float t_since_midnight = 0.0f; // seconds since local midnight / 86400
  float day_of_week = 0.0f;      // Monday = 0, scaled by /6
  float month = 0.0f;            // (month - 1) / 11
  float hour = 0.0f;             // hour / 23

  static constexpr int kNumNumeric = 6;
  /// The six numeric features in encoding order.
  void numeric(float out[kNumNumeric]) const {
    out[0] = t_since_start;
    out[1] = t_since_prev;
    out[2] = t_since_midnight;
    out[3] = day_of_week;
    out[4] = month;
    out[5] = hour;
  }
};

struct FittedFeatures {
  Vocabulary activity_vocab;
  Vocabulary resource_vocab;
  TimeStats stats;
};

/// Build vocabularies and duration statistics from a training split only.
FittedFeatures fit_features(const EventLog& train);

/// Encode one event given its trace context. Unseen activities/resources map
/// to UNK; pure function of its inputs.
EventFeatures encode_event(const Event& e, std::int64_t trace_start, std::int64_t prev_time,
                           const Vocabulary& activity_vocab, const Vocabulary& resource_vocab,
                           const TimeStats& stats);

/// Encode a non-empty prefix, one EventFeatures per event in order.
std::vector<EventFeatures> encode_prefix(std::span<const Event> prefix,
                                         const Vocabulary& activity_vocab,
                                         const Vocabulary& resource_vocab,
                                         const TimeStats& stats);

}  // namespace aston
