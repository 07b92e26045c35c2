#include "aston/eventlog.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "aston/rng.hpp"

namespace aston {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t days_from_civil_fields(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date");
  return sys_days{ymd}.time_since_epoch().count();
}

struct ParsedFields {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
};

bool read_digits(std::string_view& s, int count, int& out) {
  if (static_cast<int>(s.size()) < count) return false;
  int v = 0;
  for (int i = 0; i < count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  s.remove_prefix(count);
  out = v;
  return true;
}

bool parse_with_pattern(std::string_view text, std::string_view pattern, ParsedFields& f) {
  std::string_view s = text;
  std::string_view p = pattern;
  while (!p.empty()) {
    if (p.starts_with("yyyy")) {
      if (!read_digits(s, 4, f.year)) return false;
      p.remove_prefix(4);
    } else if (p.starts_with("MM")) {
      if (!read_digits(s, 2, f.month)) return false;
      p.remove_prefix(2);
    } else if (p.starts_with("dd")) {
      if (!read_digits(s, 2, f.day)) return false;
      p.remove_prefix(2);
    } else if (p.starts_with("HH")) {
      if (!read_digits(s, 2, f.hour)) return false;
      p.remove_prefix(2);
    } else if (p.starts_with("mm")) {
      if (!read_digits(s, 2, f.minute)) return false;
      p.remove_prefix(2);
    } else if (p.starts_with("ss")) {
      if (!read_digits(s, 2, f.second)) return false;
      p.remove_prefix(2);
    } else {
      if (s.empty() || s.front() != p.front()) return false;
      s.remove_prefix(1);
      p.remove_prefix(1);
    }
  }
  return s.empty();
}

// ISO 8601: yyyy-MM-dd[ T]HH:mm:ss with optional .fraction and offset/Z,
// both ignored (timestamps are naive local wall-clock values).
bool parse_iso(std::string_view s, ParsedFields& f) {
  if (!read_digits(s, 4, f.year)) return false;
  if (!s.starts_with('-')) return false;
  s.remove_prefix(1);
  if (!read_digits(s, 2, f.month)) return false;
  if (!s.starts_with('-')) return false;
  s.remove_prefix(1);
  if (!read_digits(s, 2, f.day)) return false;
  if (s.empty()) return true;  // date only: midnight
  if (s.front() != ' ' && s.front() != 'T') return false;
  s.remove_prefix(1);
  if (!read_digits(s, 2, f.hour)) return false;
  if (!s.starts_with(':')) return false;
  s.remove_prefix(1);
  if (!read_digits(s, 2, f.minute)) return false;
  if (!s.empty() && s.front() == ':') {
    s.remove_prefix(1);
    if (!read_digits(s, 2, f.second)) return false;
  }
  if (!s.empty() && s.front() == '.') {
    s.remove_prefix(1);
    while (!s.empty() && s.front() >= '0' && s.front() <= '9') s.remove_prefix(1);
  }
  if (s.empty() || s == "Z") return true;
  if (s.front() == '+' || s.front() == '-') {
    int h = 0, m = 0;
    s.remove_prefix(1);
    if (!read_digits(s, 2, h)) return false;
    if (!s.empty() && s.front() == ':') s.remove_prefix(1);
    if (!s.empty() && !read_digits(s, 2, m)) return false;
    return s.empty();
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC 4180-style record reader: quoted fields may contain commas, doubled
// quotes and newlines. Tracks 1-based line numbers for error messages.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool next_record(std::vector<std::string>& fields, long& line) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    line = line_;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field += '"';
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field += c;
        }
        ++pos_;
      } else if (c == '"' && field.empty()) {
        quoted = true;
        ++pos_;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        ++pos_;
      } else if (c == '\n') {
        ++line_;
        ++pos_;
        break;
      } else {
        field += c;
        ++pos_;
      }
    }
    fields.push_back(std::move(field));
    // Swallow the ghost record a trailing final newline would produce.
    if (fields.size() == 1 && fields[0].empty() && pos_ >= text_.size()) return false;
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  long line_ = 1;
};

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::string(trim(header[i])) == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text, std::string_view pattern) {
  ParsedFields f;
  const std::string_view s = trim(text);
  bool ok;
  if (!pattern.empty()) {
    ok = parse_with_pattern(s, pattern, f);
  } else {
    ok = parse_iso(s, f) || parse_with_pattern(s, "dd-MM-yyyy HH:mm:ss", f);
  }
  if (!ok) throw ParseError("unparseable timestamp '" + std::string(text) + "'");
  const std::int64_t days = days_from_civil_fields(f.year, f.month, f.day);
  if (f.hour > 23 || f.minute > 59 || f.second > 60) throw ParseError("invalid time of day");
  return days * kSecondsPerDay + f.hour * 3600 + f.minute * 60 + f.second;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  const CivilTime c = to_civil(epoch_seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  return buf;
}

CivilTime to_civil(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  std::int64_t days = epoch_seconds / kSecondsPerDay;
  std::int64_t rem = epoch_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    days -= 1;
  }
  const sys_days sd{std::chrono::days{days}};
  const year_month_day ymd{sd};
  const weekday wd{sd};
  CivilTime c;
  c.year = static_cast<int>(ymd.year());
  c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  c.seconds_since_midnight = rem;
  c.hour = static_cast<int>(rem / 3600);
  c.minute = static_cast<int>((rem / 60) % 60);
  c.second = static_cast<int>(rem % 60);
  c.weekday_mon0 = static_cast<int>(wd.iso_encoding()) - 1;
  return c;
}

std::size_t EventLog::num_events() const {
  std::size_t n = 0;
  for (const Trace& t : traces) n += t.events.size();
  return n;
}

std::vector<std::string> EventLog::activities() const {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const Trace& t : traces)
    for (const Event& e : t.events)
      if (seen.insert(e.activity).second) out.push_back(e.activity);
  return out;
}

std::size_t EventLog::max_trace_length() const {
  std::size_t m = 0;
  for (const Trace& t : traces) m = std::max(m, t.events.size());
  return m;
}

EventLog parse_csv(const std::string& path, const CsvColumns& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open event log file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str(), columns, path);
}

EventLog parse_csv_text(std::string_view text, const CsvColumns& columns,
                        std::string source_name) {
  // Strip a UTF-8 BOM if present.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  CsvReader reader(text);
  std::vector<std::string> fields;
  long line = 0;
  if (!reader.next_record(fields, line)) throw DataError("empty event log: " + source_name);

  const int ci_case = find_column(fields, columns.case_id);
  const int ci_act = find_column(fields, columns.activity);
  const int ci_ts = find_column(fields, columns.timestamp);
  const int ci_res = columns.resource.empty() ? -1 : find_column(fields, columns.resource);
  if (ci_case < 0) throw ConfigError("missing case id column '" + columns.case_id + "'");
  if (ci_act < 0) throw ConfigError("missing activity column '" + columns.activity + "'");
  if (ci_ts < 0) throw ConfigError("missing timestamp column '" + columns.timestamp + "'");

  struct Row {
    Event event;
    std::size_t file_order;
  };
  std::vector<std::string> case_order;
  std::unordered_map<std::string, std::vector<Row>> by_case;
  std::size_t order = 0;

  while (reader.next_record(fields, line)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    const int needed = std::max({ci_case, ci_act, ci_ts, ci_res});
    if (static_cast<int>(fields.size()) <= needed)
      throw ParseError("too few columns", line);
    Event e;
    e.case_id = std::string(trim(fields[ci_case]));
    e.activity = std::string(trim(fields[ci_act]));
    if (e.case_id.empty()) throw ParseError("empty case id", line);
    if (e.activity.empty()) throw ParseError("empty activity", line);
    try {
      e.timestamp = parse_timestamp(fields[ci_ts], columns.ts_format);
    } catch (const ParseError& pe) {
      throw ParseError(pe.what(), line);
    }
    if (ci_res >= 0) {
      e.resource = std::string(trim(fields[ci_res]));
      if (e.resource.empty()) e.resource = std::string(kUnkToken);
    } else {
      e.resource = std::string(kUnkToken);
    }
    auto [it, inserted] = by_case.try_emplace(e.case_id);
    if (inserted) case_order.push_back(e.case_id);
    it->second.push_back(Row{std::move(e), order++});
  }

  if (case_order.empty()) throw DataError("empty event log: " + source_name);

  EventLog log;
  log.source_path = std::move(source_name);
  log.traces.reserve(case_order.size());
  for (const std::string& cid : case_order) {
    std::vector<Row>& rows = by_case[cid];
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.event.timestamp < b.event.timestamp;
    });
    Trace t;
    t.case_id = cid;
    t.events.reserve(rows.size());
    for (Row& r : rows) t.events.push_back(std::move(r.event));
    log.traces.push_back(std::move(t));
  }
  return log;
}

namespace {

void write_csv_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_csv(const EventLog& log, std::ostream& out) {
  out << "case,activity,timestamp,resource\n";
  for (const Trace& t : log.traces) {
    for (const Event& e : t.events) {
      write_csv_field(out, e.case_id);
      out << ',';
      write_csv_field(out, e.activity);
      out << ',' << format_timestamp(e.timestamp) << ',';
      write_csv_field(out, e.resource);
      out << '\n';
    }
  }
}

void write_csv(const EventLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv(log, out);
}

std::vector<Example> make_examples(const EventLog& log, int min_prefix_len) {
  if (min_prefix_len < 1) throw ConfigError("min_prefix_len must be >= 1");
  std::vector<Example> out;
  for (const Trace& t : log.traces) {
    const int n = static_cast<int>(t.events.size());
    for (int k = min_prefix_len; k <= n; ++k) {
      Example ex;
      ex.prefix = std::span<const Event>(t.events.data(), static_cast<std::size_t>(k));
      ex.suffix_activities.reserve(static_cast<std::size_t>(n - k) + 1);
      for (int j = k; j < n; ++j) ex.suffix_activities.push_back(t.events[j].activity);
      ex.suffix_activities.emplace_back(kEocToken);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

FoldPlan make_fold_plan(const EventLog& log, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw ConfigError("fold count must be >= 2");
  if (log.traces.size() < static_cast<std::size_t>(fold_count))
    throw ConfigError("fewer traces (" + std::to_string(log.traces.size()) + ") than folds (" +
                      std::to_string(fold_count) + ")");
  std::vector<std::size_t> order(log.traces.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    plan.assignments[log.traces[order[i]].case_id] = static_cast<int>(i % fold_count);
  }
  return plan;
}

std::vector<FoldSplit> split_by_plan(const EventLog& log, const FoldPlan& plan,
                                     double val_fraction) {
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw ConfigError("val_fraction must be in (0, 1)");
  for (const Trace& t : log.traces) {
    auto it = plan.assignments.find(t.case_id);
    if (it == plan.assignments.end())
      throw ConfigError("fold plan has no assignment for case '" + t.case_id + "'");
    if (it->second < 0 || it->second >= plan.fold_count)
      throw ConfigError("fold plan assigns case '" + t.case_id + "' to an invalid fold");
  }

  std::vector<FoldSplit> splits(static_cast<std::size_t>(plan.fold_count));
  for (int fold = 0; fold < plan.fold_count; ++fold) {
    std::vector<std::size_t> rest;
    FoldSplit& s = splits[static_cast<std::size_t>(fold)];
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
      if (plan.assignments.at(log.traces[i].case_id) == fold) {
        s.test.traces.push_back(log.traces[i]);
      } else {
        rest.push_back(i);
      }
    }
    Rng rng(mix_seed(plan.seed, static_cast<std::uint64_t>(fold)));
    rng.shuffle(rest);
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(rest.size())));
    if (rest.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, rest.size() - 1);
    const std::size_t n_train = rest.size() - n_val;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      (i < n_train ? s.train : s.val).traces.push_back(log.traces[rest[i]]);
    }
    s.train.source_path = s.val.source_path = s.test.source_path = log.source_path;
  }
  return splits;
}

std::vector<FoldSplit> kfold_split(const EventLog& log, int fold_count, std::uint64_t seed,
                                   double val_fraction) {
  return split_by_plan(log, make_fold_plan(log, fold_count, seed), val_fraction);
}

std::pair<EventLog, EventLog> split_train_val(const EventLog& log, double val_fraction,
                                              std::uint64_t seed) {
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw ConfigError("val_fraction must be in (0, 1)");
  if (log.traces.size() < 2) throw ConfigError("need at least 2 traces to split");
  std::vector<std::size_t> order(log.traces.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x73706c69ULL));
  rng.shuffle(order);
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(order.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
  std::pair<EventLog, EventLog> out;
  out.first.source_path = out.second.source_path = log.source_path;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < order.size() - n_val ? out.first : out.second).traces.push_back(log.traces[order[i]]);
  return out;
}

void save_fold_plan(const FoldPlan& plan, const std::string& path) {
  nlohmann::json j;
  j["fold_count"] = plan.fold_count;
  j["seed"] = plan.seed;
  j["assignments"] = plan.assignments;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write fold plan '" + path + "'");
  out << j.dump(2) << '\n';
}

FoldPlan load_fold_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open fold plan '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid fold plan JSON: " + std::string(e.what()));
  }
  FoldPlan plan;
  plan.fold_count = j.at("fold_count").get<int>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.assignments = j.at("assignments").get<std::map<std::string, int>>();
  return plan;
}

LogStats compute_stats(const EventLog& log) {
  LogStats s;
  s.traces = log.traces.size();
  s.events = log.num_events();
  s.activities = log.activities().size();
  s.avg_case_length = s.traces ? static_cast<double>(s.events) / static_cast<double>(s.traces) : 0.0;
  s.max_case_length = log.max_trace_length();

  std::set<std::vector<std::string_view>> variants;
  double event_gap_sum = 0.0;
  std::size_t event_gap_count = 0;
  double case_dur_sum = 0.0;
  for (const Trace& t : log.traces) {
    std::vector<std::string_view> variant;
    variant.reserve(t.events.size());
    for (const Event& e : t.events) variant.push_back(e.activity);
    variants.insert(std::move(variant));
    for (std::size_t i = 1; i < t.events.size(); ++i) {
      const double gap = static_cast<double>(t.events[i].timestamp - t.events[i - 1].timestamp) /
                         static_cast<double>(kSecondsPerDay);
      event_gap_sum += gap;
      ++event_gap_count;
      s.max_event_duration = std::max(s.max_event_duration, gap);
    }
    const double dur = static_cast<double>(t.events.back().timestamp - t.events.front().timestamp) /
                       static_cast<double>(kSecondsPerDay);
    case_dur_sum += dur;
    s.max_case_duration = std::max(s.max_case_duration, dur);
  }
  s.variants = variants.size();
  s.avg_event_duration = event_gap_count ? event_gap_sum / static_cast<double>(event_gap_count) : 0.0;
  s.avg_case_duration = s.traces ? case_dur_sum / static_cast<double>(s.traces) : 0.0;
  return s;
}

}  // namespace aston
