#include <doctest.h>

#include <cmath>

#include "aston/features.hpp"
#include "testutil.hpp"

using namespace aston;

TEST_CASE("vocabulary: reserved ids, dense ids, OOV maps to UNK") {
  Vocabulary v;
  CHECK(v.size() == 3);
  CHECK(v.id(kPadToken) == Vocabulary::kPadId);
  CHECK(v.id(kEocToken) == Vocabulary::kEocId);
  CHECK(v.id(kUnkToken) == Vocabulary::kUnkId);

  CHECK(v.add("alpha") == 3);
  CHECK(v.add("beta") == 4);
  CHECK(v.add("alpha") == 3);  // idempotent
  CHECK(v.size() == 5);
  CHECK(v.id("beta") == 4);
  CHECK(v.id("never-seen") == Vocabulary::kUnkId);
  CHECK(v.label(4) == "beta");
  CHECK_THROWS_AS(v.label(5), DataError);

  const Vocabulary rebuilt = Vocabulary::from_labels(v.labels());
  CHECK(rebuilt == v);
}

TEST_CASE("fit_features: hospital log vocab sizes") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  const FittedFeatures f = fit_features(log);
  CHECK(f.activity_vocab.size() == 8);   // 5 activities + 3 reserved
  CHECK(f.resource_vocab.size() == 10);  // 7 resources + 3 reserved
  CHECK(f.stats.std_log_since_prev > 0.0);
  CHECK(f.stats.std_log_since_start > 0.0);
}

TEST_CASE("fit_features: degenerate logs floor the deviation") {
  // Single event: only the log1p(0) = 0 sample on both duration features.
  const EventLog single = testutil::make_log({{"A"}});
  const FittedFeatures f = fit_features(single);
  CHECK(f.stats.mean_log_since_prev == 0.0);
  CHECK(f.stats.mean_log_since_start == 0.0);
  CHECK(f.stats.std_log_since_prev == doctest::Approx(1e-8));
  CHECK(f.stats.std_log_since_start == doctest::Approx(1e-8));

  // All-zero durations across many events: z-scores are exactly 0.
  const EventLog zeros = testutil::make_log({{"A", "B", "C"}, {"A", "B"}}, 1600000000, 0);
  const FittedFeatures fz = fit_features(zeros);
  const EventFeatures enc = encode_event(zeros.traces[0].events[1], 1600000000, 1600000000,
                                         fz.activity_vocab, fz.resource_vocab, fz.stats);
  CHECK(enc.t_since_prev == 0.0f);
  CHECK(enc.t_since_start == 0.0f);
}

TEST_CASE("encode_event: clock and calendar features") {
  Vocabulary av, rv;
  av.add("X");
  TimeStats stats;  // mean 0, std 1

  Event noon{"c", "X", parse_timestamp("2021-02-15 12:00:00"), "r"};
  EventFeatures f = encode_event(noon, noon.timestamp, noon.timestamp, av, rv, stats);
  CHECK(f.t_since_midnight == doctest::Approx(0.5));  // 43200 / 86400
  CHECK(f.day_of_week == doctest::Approx(0.0));       // Monday
  CHECK(f.month == doctest::Approx(1.0 / 11.0));      // February
  CHECK(f.hour == doctest::Approx(12.0 / 23.0));
  CHECK(f.activity_id == 3);
  CHECK(f.resource_id == Vocabulary::kUnkId);  // resource unseen

  Event sunday{"c", "Y", parse_timestamp("2021-02-21 23:59:59"), "r"};
  f = encode_event(sunday, sunday.timestamp, sunday.timestamp, av, rv, stats);
  CHECK(f.day_of_week == doctest::Approx(1.0));  // Sunday = 6/6
  CHECK(f.hour == doctest::Approx(1.0));
  CHECK(f.activity_id == Vocabulary::kUnkId);

  // First event of a trace: both raw durations are zero.
  TimeStats shifted{2.0, 4.0, 1.0, 2.0};
  f = encode_event(noon, noon.timestamp, noon.timestamp, av, rv, shifted);
  CHECK(f.t_since_prev == doctest::Approx((0.0 - 2.0) / 4.0));
  CHECK(f.t_since_start == doctest::Approx((0.0 - 1.0) / 2.0));

  // A gap whose log1p equals the mean z-scores to zero.
  const double gap = std::expm1(2.0);
  Event later{"c", "X", noon.timestamp + static_cast<std::int64_t>(std::llround(gap)), "r"};
  f = encode_event(later, noon.timestamp, noon.timestamp, av, rv, shifted);
  CHECK(std::abs(f.t_since_prev) < 1e-4);
}

TEST_CASE("encode_event: pure function, bounded features") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  const FittedFeatures fit = fit_features(log);
  const Event& e = log.traces[0].events[2];
  const EventFeatures a =
      encode_event(e, log.traces[0].events[0].timestamp, log.traces[0].events[1].timestamp,
                   fit.activity_vocab, fit.resource_vocab, fit.stats);
  const EventFeatures b =
      encode_event(e, log.traces[0].events[0].timestamp, log.traces[0].events[1].timestamp,
                   fit.activity_vocab, fit.resource_vocab, fit.stats);
  CHECK(a.t_since_prev == b.t_since_prev);
  CHECK(a.t_since_start == b.t_since_start);

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Event ev{"c", "X", static_cast<std::int64_t>(rng.uniform_index(4'000'000'000ULL)), "r"};
    const EventFeatures f =
        encode_event(ev, ev.timestamp - static_cast<std::int64_t>(rng.uniform_index(100000)),
                     ev.timestamp, fit.activity_vocab, fit.resource_vocab, fit.stats);
    for (float v : {f.t_since_midnight, f.day_of_week, f.month, f.hour}) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    CHECK(std::isfinite(f.t_since_prev));
    CHECK(std::isfinite(f.t_since_start));
  }
}

TEST_CASE("z-scoring the training set with its own stats: mean 0, std 1") {
  // Varied gaps so the duration features have real spread.
  Rng rng(11);
  std::vector<std::vector<std::string>> traces;
  for (int t = 0; t < 30; ++t)
    traces.push_back(std::vector<std::string>(3 + rng.uniform_index(5), "A"));
  EventLog log = testutil::make_log(traces);
  for (Trace& t : log.traces) {
    std::int64_t ts = 1600000000;
    for (Event& e : t.events) {
      ts += static_cast<std::int64_t>(rng.uniform_index(100000));
      e.timestamp = ts;
    }
  }

  const FittedFeatures fit = fit_features(log);
  double sum_p = 0, sum2_p = 0, sum_s = 0, sum2_s = 0;
  long n = 0;
  for (const Trace& t : log.traces) {
    const auto encoded = encode_prefix(std::span<const Event>(t.events.data(), t.events.size()),
                                       fit.activity_vocab, fit.resource_vocab, fit.stats);
    for (const EventFeatures& f : encoded) {
      sum_p += f.t_since_prev;
      sum2_p += static_cast<double>(f.t_since_prev) * f.t_since_prev;
      sum_s += f.t_since_start;
      sum2_s += static_cast<double>(f.t_since_start) * f.t_since_start;
      ++n;
    }
  }
  const double mean_p = sum_p / n, mean_s = sum_s / n;
  const double var_p = (sum2_p - n * mean_p * mean_p) / (n - 1);
  const double var_s = (sum2_s - n * mean_s * mean_s) / (n - 1);
  // float32 encoding limits agreement to ~1e-6.
  CHECK(std::abs(mean_p) < 1e-6);
  CHECK(std::abs(mean_s) < 1e-6);
  CHECK(std::abs(std::sqrt(var_p) - 1.0) < 1e-5);
  CHECK(std::abs(std::sqrt(var_s) - 1.0) < 1e-5);
}

TEST_CASE("encode_prefix: shapes, OOV resource, empty prefix error") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  const FittedFeatures fit = fit_features(log);

  const auto m = encode_prefix(std::span<const Event>(log.traces[0].events.data(), 3),
                               fit.activity_vocab, fit.resource_vocab, fit.stats);
  CHECK(m.size() == 3);
  CHECK(m[0].activity_id == fit.activity_vocab.id("Registration"));

  Event oov{"c", "Registration", log.traces[0].events[0].timestamp, "nobody"};
  const std::vector<Event> prefix1 = {oov};
  const auto one = encode_prefix(prefix1, fit.activity_vocab, fit.resource_vocab, fit.stats);
  CHECK(one.size() == 1);
  CHECK(one[0].resource_id == Vocabulary::kUnkId);

  CHECK_THROWS_AS(encode_prefix({}, fit.activity_vocab, fit.resource_vocab, fit.stats), DataError);
}
