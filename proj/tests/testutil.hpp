#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aston/autodiff.hpp"
#include "aston/eventlog.hpp"
#include "aston/rng.hpp"
#include "aston/tensor.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// Steppers backed by lookup tables / hashes, for exercising the search
// strategies without a trained network.
// ---------------------------------------------------------------------------

/// Conditional distributions fixed per context (the symbol sequence so far).
/// Contexts without an entry fall back to the uniform distribution.
class FixedTableStepper {
 public:
  struct State {
    std::vector<int> seq;
    std::vector<double> log_probs;
  };

  FixedTableStepper(int num_classes, int eoc_id, int pad_id = -1)
      : num_classes_(num_classes), eoc_id_(eoc_id), pad_id_(pad_id) {}

  /// Probabilities for the next symbol after `context`; must sum to ~1.
  void set(std::vector<int> context, std::vector<double> probs) {
    table_[std::move(context)] = std::move(probs);
  }

  int num_classes() const { return num_classes_; }
  int eoc_id() const { return eoc_id_; }
  int pad_id() const { return pad_id_; }

  State start() const { return make_state({}); }
  State advance(const State& s, int symbol) const {
    std::vector<int> seq = s.seq;
    seq.push_back(symbol);
    return make_state(std::move(seq));
  }

 private:
  State make_state(std::vector<int> seq) const {
    State st;
    st.log_probs.assign(static_cast<std::size_t>(num_classes_),
                        -std::log(static_cast<double>(num_classes_)));
    auto it = table_.find(seq);
    if (it != table_.end()) {
      for (int c = 0; c < num_classes_; ++c)
        st.log_probs[static_cast<std::size_t>(c)] = std::log(std::max(it->second[static_cast<std::size_t>(c)], 1e-300));
    }
    st.seq = std::move(seq);
    return st;
  }

  int num_classes_, eoc_id_, pad_id_;
  std::map<std::vector<int>, std::vector<double>> table_;
};

/// Pseudo-random but deterministic conditional distributions: the logits for
/// a context are a pure hash of (seed, context).
class HashedStepper {
 public:
  using State = FixedTableStepper::State;

  HashedStepper(int num_classes, std::uint64_t seed, int eoc_id = 1, int pad_id = 0)
      : num_classes_(num_classes), seed_(seed), eoc_id_(eoc_id), pad_id_(pad_id) {}

  int num_classes() const { return num_classes_; }
  int eoc_id() const { return eoc_id_; }
  int pad_id() const { return pad_id_; }

  State start() const { return make_state({}); }
  State advance(const State& s, int symbol) const {
    std::vector<int> seq = s.seq;
    seq.push_back(symbol);
    return make_state(std::move(seq));
  }

 private:
  State make_state(std::vector<int> seq) const {
    std::uint64_t h = seed_;
    for (int v : seq) h = aston::mix_seed(h, static_cast<std::uint64_t>(v) + 17);
    std::vector<double> logits(static_cast<std::size_t>(num_classes_));
    for (int c = 0; c < num_classes_; ++c) {
      const std::uint64_t bits = aston::mix_seed(h, static_cast<std::uint64_t>(c) + 1000);
      logits[static_cast<std::size_t>(c)] =
          3.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53 - 0.5);
    }
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    State st;
    st.log_probs.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) st.log_probs[i] = logits[i] - lse;
    st.seq = std::move(seq);
    return st;
  }

  int num_classes_;
  std::uint64_t seed_;
  int eoc_id_, pad_id_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (double precision)
// ---------------------------------------------------------------------------

/// Relative error with an absolute fallback near zero.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Compares analytic gradients against central finite differences.
/// `loss` must evaluate the scalar loss at the parameters' current values;
/// when `with_grad` is set it must also accumulate gradients.
inline double max_grad_rel_err(const std::vector<aston::nn::Parameter<double>*>& params,
                               const std::function<double(bool with_grad)>& loss,
                               double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  loss(true);
  double worst = 0.0;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss(false);
      p->value[i] = saved - h;
      const double down = loss(false);
      p->value[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, rel_err(fd, p->gradient[i]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Synthetic event logs
// ---------------------------------------------------------------------------

inline aston::EventLog make_log(const std::vector<std::vector<std::string>>& traces,
                                std::int64_t start = 1600000000, std::int64_t gap = 3600) {
  aston::EventLog log;
  log.source_path = "<synthetic>";
  for (std::size_t t = 0; t < traces.size(); ++t) {
    aston::Trace trace;
    trace.case_id = "case" + std::to_string(t);
    std::int64_t ts = start + static_cast<std::int64_t>(t) * 7200;
    for (const std::string& activity : traces[t]) {
      trace.events.push_back(aston::Event{trace.case_id, activity, ts, std::string(aston::kUnkToken)});
      ts += gap;
    }
    log.traces.push_back(std::move(trace));
  }
  return log;
}

/// 200 linear A->B->C->D traces plus a second variant distinguishable from
/// its first event, so every suffix is a deterministic function of the
/// prefix.
inline aston::EventLog make_two_variant_log(int n_linear = 200, int n_branch = 100) {
  std::vector<std::vector<std::string>> traces;
  for (int i = 0; i < n_linear; ++i) traces.push_back({"A", "B", "C", "D"});
  for (int i = 0; i < n_branch; ++i) traces.push_back({"E", "B", "C", "F"});
  return make_log(traces);
}

/// Loop grammar S L ... L E1 E2: the loop repeats with probability
/// `p_continue` (truncated at max_loops), so traces are long and the
/// continuation is the likeliest step everywhere in the loop.
inline aston::EventLog make_loop_log(int n_traces, double p_continue = 0.92, int max_loops = 40,
                                     std::uint64_t seed = 99) {
  aston::Rng rng(seed);
  std::vector<std::vector<std::string>> traces;
  for (int i = 0; i < n_traces; ++i) {
    std::vector<std::string> t = {"S"};
    int loops = 0;
    while (loops < max_loops && rng.uniform() < p_continue) {
      t.push_back("L");
      ++loops;
    }
    t.push_back("E1");
    t.push_back("E2");
    traces.push_back(std::move(t));
  }
  return make_log(traces, 1600000000, 600);
}

/// The hospital example log (two traces, five activities, seven events).
inline std::string table1_csv() {
  return "Case ID,Activity,Timestamp,Resource\n"
         "Case1934,Registration,15-02-2021 08:34:20,Max\n"
         "Case1934,CT scan,16-02-2021 12:35:12,Lewis\n"
         "Case1934,Consultation,20-03-2021 11:23:53,Nicholas\n"
         "Case1934,Blood analysis,21-03-2021 10:54:12,Sergio\n"
         "Case2032,Registration,17-02-2021 12:57:25,Charles\n"
         "Case2032,Blood analysis,17-02-2021 13:05:24,Carlos\n"
         "Case2032,Discharge,17-02-2021 18:46:26,Fernando\n";
}

inline aston::CsvColumns table1_columns() {
  aston::CsvColumns c;
  c.case_id = "Case ID";
  c.activity = "Activity";
  c.timestamp = "Timestamp";
  c.resource = "Resource";
  return c;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aston_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
