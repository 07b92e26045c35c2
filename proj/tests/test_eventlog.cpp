#include <doctest.h>

#include <set>
#include <sstream>

#include "aston/eventlog.hpp"
#include "testutil.hpp"

using namespace aston;

TEST_CASE("parse_csv: hospital example log") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  REQUIRE(log.traces.size() == 2);
  CHECK(log.traces[0].case_id == "Case1934");
  CHECK(log.traces[0].events.size() == 4);
  CHECK(log.traces[1].case_id == "Case2032");
  CHECK(log.traces[1].events.size() == 3);
  CHECK(log.num_events() == 7);

  const auto activities = log.activities();
  CHECK(activities.size() == 5);
  const std::set<std::string> expected = {"Registration", "CT scan", "Consultation",
                                          "Blood analysis", "Discharge"};
  CHECK(std::set<std::string>(activities.begin(), activities.end()) == expected);
  CHECK(log.traces[0].events[0].resource == "Max");
}

TEST_CASE("parse_csv: single-event trace is a valid log") {
  const EventLog log = parse_csv_text("case,activity,timestamp\nc1,go,2021-01-01 00:00:00\n");
  REQUIRE(log.traces.size() == 1);
  CHECK(log.traces[0].events.size() == 1);
  CHECK(log.traces[0].events[0].resource == kUnkToken);  // no resource column
}

TEST_CASE("parse_csv: equal timestamps keep file order") {
  const std::string text =
      "case,activity,timestamp\n"
      "c1,second,2021-01-01 10:00:00\n"
      "c1,first,2021-01-01 09:00:00\n"
      "c1,also9,2021-01-01 09:00:00\n";
  const EventLog log = parse_csv_text(text);
  REQUIRE(log.traces[0].events.size() == 3);
  CHECK(log.traces[0].events[0].activity == "first");
  CHECK(log.traces[0].events[1].activity == "also9");  // ties keep file order
  CHECK(log.traces[0].events[2].activity == "second");
}

TEST_CASE("parse_csv: errors") {
  CHECK_THROWS_WITH_AS(parse_csv_text("case,when\nc1,2021-01-01 00:00:00\n"),
                       doctest::Contains("activity"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_csv_text("case,activity,timestamp\nc1,go,yesterday\n"),
                       doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_AS(parse_csv_text(""), DataError);
  CHECK_THROWS_AS(parse_csv_text("case,activity,timestamp\n"), DataError);
  CHECK_THROWS_AS(parse_csv_text("case,activity,timestamp\nc1,,2021-01-01 00:00:00\n"),
                  ParseError);
}

TEST_CASE("parse_csv: quoted fields and BOM") {
  const std::string text =
      "\xEF\xBB\xBFcase,activity,timestamp,resource\n"
      "c1,\"check, recheck\",2021-01-01 08:00:00,\"agent \"\"A\"\"\"\n";
  const EventLog log = parse_csv_text(text);
  CHECK(log.traces[0].events[0].activity == "check, recheck");
  CHECK(log.traces[0].events[0].resource == "agent \"A\"");
}

TEST_CASE("timestamps: formats, round trip, civil fields") {
  CHECK(parse_timestamp("2021-02-15 08:34:20") == parse_timestamp("15-02-2021 08:34:20"));
  CHECK(parse_timestamp("2021-02-15T08:34:20") == parse_timestamp("2021-02-15 08:34:20"));
  CHECK(parse_timestamp("2021-02-15 08:34:20.123") == parse_timestamp("2021-02-15 08:34:20"));
  CHECK(parse_timestamp("2021-02-15 08:34:20+01:00") == parse_timestamp("2021-02-15 08:34:20"));
  CHECK(parse_timestamp("15/02/2021 08.34.20", "dd/MM/yyyy HH.mm.ss") ==
        parse_timestamp("2021-02-15 08:34:20"));
  CHECK_THROWS_AS(parse_timestamp("2021-13-05 00:00:00"), ParseError);

  const std::int64_t t = parse_timestamp("2021-02-15 08:34:20");
  CHECK(format_timestamp(t) == "2021-02-15 08:34:20");
  const CivilTime c = to_civil(t);
  CHECK(c.year == 2021);
  CHECK(c.month == 2);
  CHECK(c.day == 15);
  CHECK(c.hour == 8);
  CHECK(c.weekday_mon0 == 0);  // 2021-02-15 was a Monday
  CHECK(c.seconds_since_midnight == 8 * 3600 + 34 * 60 + 20);
}

TEST_CASE("round trip: parse -> write -> parse is identity") {
  const EventLog original = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  std::ostringstream out;
  write_csv(original, out);
  const EventLog again = parse_csv_text(out.str());
  CHECK(original == again);

  // Labels with CSV metacharacters survive the trip too.
  EventLog tricky = testutil::make_log({{"a,b", "c\"d", "plain"}});
  std::ostringstream out2;
  write_csv(tricky, out2);
  CHECK(parse_csv_text(out2.str()) == tricky);
}

TEST_CASE("make_examples: slicing and counts") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  const auto examples = make_examples(log, 1);
  CHECK(examples.size() == 7);  // trace lengths 4 + 3

  // Case1934 at k=3.
  const Example* k3 = nullptr;
  for (const auto& ex : examples)
    if (ex.case_id() == "Case1934" && ex.prefix_len() == 3) k3 = &ex;
  REQUIRE(k3 != nullptr);
  CHECK(k3->prefix[0].activity == "Registration");
  CHECK(k3->prefix[1].activity == "CT scan");
  CHECK(k3->prefix[2].activity == "Consultation");
  REQUIRE(k3->suffix_activities.size() == 2);
  CHECK(k3->suffix_activities[0] == "Blood analysis");
  CHECK(k3->suffix_activities[1] == kEocToken);

  // k = n: suffix is the end-of-case token alone.
  for (const auto& ex : examples) {
    if (ex.prefix_len() == 4) {
      CHECK(ex.suffix_activities == std::vector<std::string>{std::string(kEocToken)});
    }
  }

  // Reconstruction: prefix ++ suffix (minus EOC) equals the trace.
  for (const auto& ex : examples) {
    std::vector<std::string> rebuilt;
    for (const Event& e : ex.prefix) rebuilt.push_back(e.activity);
    for (const auto& a : ex.gold_suffix()) rebuilt.push_back(a);
    const Trace& trace = ex.case_id() == "Case1934" ? log.traces[0] : log.traces[1];
    REQUIRE(rebuilt.size() == trace.events.size());
    for (std::size_t i = 0; i < rebuilt.size(); ++i) CHECK(rebuilt[i] == trace.events[i].activity);
  }

  CHECK(make_examples(log, 3).size() == 3);  // k in {3,4} and {3}
}

TEST_CASE("kfold_split: sizes, determinism, partition") {
  std::vector<std::vector<std::string>> traces;
  for (int i = 0; i < 100; ++i) traces.push_back({"A", "B"});
  const EventLog log = testutil::make_log(traces);

  const auto folds = kfold_split(log, 5, 7, 0.2);
  REQUIRE(folds.size() == 5);
  for (const FoldSplit& f : folds) {
    CHECK(f.test.num_traces() == 20);
    CHECK(f.train.num_traces() == 64);
    CHECK(f.val.num_traces() == 16);
  }

  // Identical seed, identical assignment.
  const FoldPlan p1 = make_fold_plan(log, 5, 7);
  const FoldPlan p2 = make_fold_plan(log, 5, 7);
  CHECK(p1.assignments == p2.assignments);
  CHECK(make_fold_plan(log, 5, 8).assignments != p1.assignments);

  // Folds partition the trace set.
  std::set<std::string> seen;
  for (const FoldSplit& f : folds)
    for (const Trace& t : f.test.traces) CHECK(seen.insert(t.case_id).second);
  CHECK(seen.size() == 100);
}

TEST_CASE("kfold_split: balanced remainder and small-log errors") {
  const EventLog log7 = testutil::make_log({{"A"}, {"A"}, {"A"}, {"A"}, {"A"}, {"A"}, {"A"}});
  const FoldPlan plan = make_fold_plan(log7, 5, 1);
  std::vector<int> sizes(5, 0);
  for (const auto& [cid, fold] : plan.assignments) ++sizes[static_cast<std::size_t>(fold)];
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{1, 1, 1, 2, 2});

  const EventLog log3 = testutil::make_log({{"A"}, {"A"}, {"A"}});
  CHECK_THROWS_AS(make_fold_plan(log3, 5, 1), ConfigError);
  CHECK_THROWS_AS(kfold_split(log7, 5, 1, 1.5), ConfigError);
}

TEST_CASE("fold plan: JSON round trip") {
  const EventLog log = testutil::make_log({{"A"}, {"B"}, {"A"}, {"B"}, {"A"}});
  const FoldPlan plan = make_fold_plan(log, 2, 42);
  testutil::TempDir dir("foldplan");
  save_fold_plan(plan, dir.file("plan.json"));
  const FoldPlan loaded = load_fold_plan(dir.file("plan.json"));
  CHECK(loaded.fold_count == plan.fold_count);
  CHECK(loaded.seed == plan.seed);
  CHECK(loaded.assignments == plan.assignments);

  // Rerunning the split from the stored plan reproduces the same folds.
  const auto a = split_by_plan(log, plan, 0.5);
  const auto b = split_by_plan(log, loaded, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train == b[i].train);
    CHECK(a[i].val == b[i].val);
    CHECK(a[i].test == b[i].test);
  }
}

TEST_CASE("compute_stats: hospital example") {
  const EventLog log = parse_csv_text(testutil::table1_csv(), testutil::table1_columns());
  const LogStats s = compute_stats(log);
  CHECK(s.traces == 2);
  CHECK(s.activities == 5);
  CHECK(s.events == 7);
  CHECK(s.max_case_length == 4);
  CHECK(s.avg_case_length == doctest::Approx(3.5));
  CHECK(s.variants == 2);
}

TEST_CASE("split_train_val: deterministic disjoint split") {
  std::vector<std::vector<std::string>> traces;
  for (int i = 0; i < 10; ++i) traces.push_back({"A"});
  const EventLog log = testutil::make_log(traces);
  const auto [train, val] = split_train_val(log, 0.2, 3);
  CHECK(train.num_traces() == 8);
  CHECK(val.num_traces() == 2);
  const auto [train2, val2] = split_train_val(log, 0.2, 3);
  CHECK(train == train2);
  CHECK(val == val2);
}
