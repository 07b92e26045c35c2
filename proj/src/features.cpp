#include "aston/features.hpp"

#include <algorithm>
#include <cmath>

namespace aston {

Vocabulary::Vocabulary() {
  labels_ = {std::string(kPadToken), std::string(kEocToken), std::string(kUnkToken)};
  for (int i = 0; i < kNumReserved; ++i) ids_.emplace(labels_[static_cast<std::size_t>(i)], i);
}

int Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const int id = size();
  labels_.emplace_back(token);
  ids_.emplace(labels_.back(), id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::label(int id) const {
  if (id < 0 || id >= size()) throw DataError("vocabulary id out of range: " + std::to_string(id));
  return labels_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::from_labels(const std::vector<std::string>& labels) {
  Vocabulary v;
  if (labels.size() < kNumReserved || labels[0] != kPadToken || labels[1] != kEocToken ||
      labels[2] != kUnkToken) {
    throw DataError("vocabulary label list does not start with the reserved tokens");
  }
  for (std::size_t i = kNumReserved; i < labels.size(); ++i) v.add(labels[i]);
  return v;
}

namespace {

constexpr double kStdFloor = 1e-8;

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  // Sample standard deviation (n - 1 denominator), floored.
  double stddev() const {
    if (n < 2) return kStdFloor;
    return std::max(std::sqrt(m2 / static_cast<double>(n - 1)), kStdFloor);
  }
};

double log1p_seconds(std::int64_t delta) {
  return std::log1p(static_cast<double>(std::max<std::int64_t>(delta, 0)));
}

}  // namespace

FittedFeatures fit_features(const EventLog& train) {
  if (train.traces.empty()) throw DataError("cannot fit features on an empty log");
  FittedFeatures f;
  Welford prev_acc, start_acc;
  for (const Trace& t : train.traces) {
    const std::int64_t start = t.events.front().timestamp;
    std::int64_t prev = start;
    for (const Event& e : t.events) {
      f.activity_vocab.add(e.activity);
      f.resource_vocab.add(e.resource);
      prev_acc.push(log1p_seconds(e.timestamp - prev));
      start_acc.push(log1p_seconds(e.timestamp - start));
      prev = e.timestamp;
    }
  }
  f.stats.mean_log_since_prev = prev_acc.mean;
  f.stats.std_log_since_prev = prev_acc.stddev();
  f.stats.mean_log_since_start = start_acc.mean;
  f.stats.std_log_since_start = start_acc.stddev();
  return f;
}

EventFeatures encode_event(const Event& e, std::int64_t trace_start, std::int64_t prev_time,
                           const Vocabulary& activity_vocab, const Vocabulary& resource_vocab,
                           const TimeStats& stats) {
  EventFeatures out;
  out.activity_id = activity_vocab.id(e.activity);
  out.resource_id = resource_vocab.id(e.resource);
  out.t_since_start = static_cast<float>(
      (log1p_seconds(e.timestamp - trace_start) - stats.mean_log_since_start) /
      stats.std_log_since_start);
  out.t_since_prev = static_cast<float>(
      (log1p_seconds(e.timestamp - prev_time) - stats.mean_log_since_prev) /
      stats.std_log_since_prev);
  const CivilTime c = to_civil(e.timestamp);
  out.t_since_midnight = static_cast<float>(static_cast<double>(c.seconds_since_midnight) / 86400.0);
  out.day_of_week = static_cast<float>(c.weekday_mon0 / 6.0);
  out.month = static_cast<float>((c.month - 1) / 11.0);
  out.hour = static_cast<float>(c.hour / 23.0);
  return out;
}

std::vector<EventFeatures> encode_prefix(std::span<const Event> prefix,
                                         const Vocabulary& activity_vocab,
                                         const Vocabulary& resource_vocab,
                                         const TimeStats& stats) {
  if (prefix.empty()) throw DataError("cannot encode an empty prefix");
  std::vector<EventFeatures> out;
  out.reserve(prefix.size());
  const std::int64_t start = prefix.front().timestamp;
  std::int64_t prev = start;
  for (const Event& e : prefix) {
    out.push_back(encode_event(e, start, prev, activity_vocab, resource_vocab, stats));
    prev = e.timestamp;
  }
  return out;
}

}  // namespace aston
