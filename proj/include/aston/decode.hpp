#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aston/model.hpp"
#include "aston/rng.hpp"

namespace aston {

// A stepper exposes a frozen conditional next-symbol model: `start()` yields
// the state after consuming the prefix (its log_probs score the first suffix
// symbol), `advance` feeds one chosen symbol. States are value types so
// search strategies can snapshot them.
template <typename S>
concept SuffixStepper = requires(const S s, const typename S::State st, int symbol) {
  { s.num_classes() } -> std::convertible_to<int>;
  { s.eoc_id() } -> std::convertible_to<int>;
  { s.pad_id() } -> std::convertible_to<int>;
  { s.start() } -> std::same_as<typename S::State>;
  { s.advance(st, symbol) } -> std::same_as<typename S::State>;
  { st.log_probs } -> std::convertible_to<std::vector<double>>;
};

struct DecodeConfig {
  enum class Strategy { kArgmax, kRandom, kBeam, kBeamNorm };

  Strategy strategy = Strategy::kBeamNorm;
  int beam_width = 5;
  double alpha = 0.65;
  int max_len = 0;  // 0 = use the model's max trace length
  std::uint64_t seed = 0;

  void validate() const {
    if (beam_width < 1) throw ConfigError("beam width must be >= 1");
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (max_len < 0) throw ConfigError("max_len must be >= 1 (or 0 for the model default)");
  }
};

DecodeConfig::Strategy parse_strategy(const std::string& name);
std::string strategy_name(DecodeConfig::Strategy s);
std::vector<std::string> all_strategy_names();

/// Length-normalization factor (5 + 1)^alpha / (5 + i)^alpha for a hypothesis
/// of i emitted symbols; the first symbol has factor 1.
inline double normalization_factor(int predicted_len, double alpha) {
  if (predicted_len < 1) throw ConfigError("normalization_factor needs length >= 1");
  return std::pow(6.0 / (5.0 + static_cast<double>(predicted_len)), alpha);
}

/// Partial or finished suffix hypothesis tracked by the beam search.
template <typename State>
struct BeamHypothesis {
  std::vector<int> activity_ids;  // EOC never stored
  double cum_log_prob = 0.0;
  double score = 0.0;  // cum_log_prob, or normalization_factor(emitted) * it
  int emitted = 0;     // symbols emitted so far, end-of-case included
  bool finished = false;
  State state;
};

struct DecodeResult {
  std::vector<int> activity_ids;
  double cum_log_prob = 0.0;  // joint log-probability including the EOC step
  double score = 0.0;
};

namespace detail {

/// Lowest id wins among equal log-probs.
inline int argmax_symbol(const std::vector<double>& log_probs, int pad_id) {
  int best = -1;
  for (int c = 0; c < static_cast<int>(log_probs.size()); ++c) {
    if (c == pad_id) continue;
    if (best < 0 || log_probs[c] > log_probs[best]) best = c;
  }
  return best;
}

}  // namespace detail

/// Greedy decoding: the most likely symbol at every step, stopping at the
/// end-of-case symbol or after max_len activities. EOC is not returned.
template <SuffixStepper S>
std::vector<int> predict_argmax(const S& stepper, int max_len) {
  std::vector<int> ids;
  typename S::State state = stepper.start();
  while (static_cast<int>(ids.size()) < max_len) {
    const int c = detail::argmax_symbol(state.log_probs, stepper.pad_id());
    if (c == stepper.eoc_id()) break;
    ids.push_back(c);
    if (static_cast<int>(ids.size()) == max_len) break;
    state = stepper.advance(state, c);
  }
  return ids;
}

/// Categorical sampling from the model's next-symbol distribution at every
/// step; reproducible for a fixed seed.
template <SuffixStepper S>
std::vector<int> predict_random(const S& stepper, int max_len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> ids;
  typename S::State state = stepper.start();
  const int classes = stepper.num_classes();
  std::vector<double> weights(static_cast<std::size_t>(classes));
  while (static_cast<int>(ids.size()) < max_len) {
    for (int c = 0; c < classes; ++c)
      weights[static_cast<std::size_t>(c)] = c == stepper.pad_id() ? 0.0 : std::exp(state.log_probs[static_cast<std::size_t>(c)]);
    const int c = static_cast<int>(rng.categorical(weights));
    if (c == stepper.eoc_id()) break;
    ids.push_back(c);
    if (static_cast<int>(ids.size()) == max_len) break;
    state = stepper.advance(state, c);
  }
  return ids;
}

/// Beam search over EOC-terminated suffixes. Every hypothesis is expanded
/// over all non-PAD symbols and the top `width` by score survive; emitting
/// EOC freezes a hypothesis, which then competes by its final score.
/// Hypotheses reaching max_len activities are closed with the end-of-case
/// log-probability so every final score is the joint probability of a
/// terminated suffix. Scores are cumulative log-probabilities, optionally
/// length-normalized ((5+1)^a / (5+i)^a, applied to partial hypotheses at
/// their current length during pruning as well). Ties break toward the
/// lexicographically smaller (hence shorter) activity sequence.
template <SuffixStepper S>
DecodeResult predict_beam(const S& stepper, int width, bool normalized, double alpha,
                          int max_len) {
  if (width < 1) throw ConfigError("beam width must be >= 1");
  using Hyp = BeamHypothesis<typename S::State>;
  const int eoc = stepper.eoc_id(), pad = stepper.pad_id();

  Hyp root;
  root.state = stepper.start();
  std::vector<Hyp> beam;
  beam.push_back(std::move(root));

  // Candidate = finished carry-over or (parent, symbol) expansion, ranked
  // before any model advance happens.
  struct Candidate {
    double rank_score;
    std::vector<int> ids;  // full sequence, for deterministic tie-breaking
    int parent;            // -1 for carry-overs
    int symbol;
    double cum;
  };

  bool any_live = true;
  while (any_live) {
    std::vector<Candidate> pool;
    for (std::size_t p = 0; p < beam.size(); ++p) {
      const Hyp& h = beam[p];
      if (h.finished) {
        pool.push_back(Candidate{h.score, h.activity_ids, -1, static_cast<int>(p), h.cum_log_prob});
        continue;
      }
      for (int c = 0; c < stepper.num_classes(); ++c) {
        if (c == pad) continue;
        const double cum = h.cum_log_prob + h.state.log_probs[static_cast<std::size_t>(c)];
        const int emitted = h.emitted + 1;
        const double rank = normalized ? normalization_factor(emitted, alpha) * cum : cum;
        Candidate cand{rank, h.activity_ids, static_cast<int>(p), c, cum};
        if (c != eoc) cand.ids.push_back(c);
        pool.push_back(std::move(cand));
      }
    }
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
      if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
      return a.ids < b.ids;
    });
    if (static_cast<int>(pool.size()) > width) pool.resize(static_cast<std::size_t>(width));

    std::vector<Hyp> next;
    next.reserve(pool.size());
    any_live = false;
    for (Candidate& cand : pool) {
      if (cand.parent < 0) {
        next.push_back(std::move(beam[static_cast<std::size_t>(cand.symbol)]));
        continue;
      }
      const Hyp& parent = beam[static_cast<std::size_t>(cand.parent)];
      Hyp h;
      h.activity_ids = std::move(cand.ids);
      h.emitted = parent.emitted + 1;
      if (cand.symbol == eoc) {
        h.cum_log_prob = cand.cum;
        h.finished = true;
      } else if (static_cast<int>(h.activity_ids.size()) >= max_len) {
        // Close out at the length cap: account for the end-of-case step so
        // the score stays comparable with naturally finished hypotheses.
        typename S::State s = stepper.advance(parent.state, cand.symbol);
        h.cum_log_prob = cand.cum + s.log_probs[static_cast<std::size_t>(eoc)];
        h.emitted += 1;
        h.finished = true;
      } else {
        h.state = stepper.advance(parent.state, cand.symbol);
        h.cum_log_prob = cand.cum;
        any_live = true;
      }
      h.score = normalized ? normalization_factor(h.emitted, alpha) * h.cum_log_prob
                           : h.cum_log_prob;
      next.push_back(std::move(h));
    }
    beam = std::move(next);
  }

  const Hyp* best = nullptr;
  for (const Hyp& h : beam) {
    if (best == nullptr || h.score > best->score ||
        (h.score == best->score && h.activity_ids < best->activity_ids))
      best = &h;
  }
  return DecodeResult{best->activity_ids, best->cum_log_prob, best->score};
}

/// Enumerates every EOC-terminated suffix of up to max_len activities and
/// returns the best under the requested scoring. Test oracle; refuses search
/// spaces larger than `cap` terminated sequences.
template <SuffixStepper S>
DecodeResult exhaustive_oracle(const S& stepper, bool normalized, double alpha, int max_len,
                               std::size_t cap = 2'000'000) {
  const int eoc = stepper.eoc_id(), pad = stepper.pad_id();
  // A activities branching per level, all levels up to max_len.
  double space = 0.0, level = 1.0;
  const int branching = stepper.num_classes() - 1 - (pad >= 0 && pad != eoc ? 1 : 0);
  for (int l = 0; l <= max_len; ++l) {
    space += level;
    level *= static_cast<double>(branching);
  }
  if (space > static_cast<double>(cap))
    throw DataError("exhaustive oracle search space exceeds cap");

  std::optional<DecodeResult> best;
  std::vector<int> ids;
  auto consider = [&](double cum, double score) {
    if (!best || score > best->score || (score == best->score && ids < best->activity_ids)) {
      best = DecodeResult{ids, cum, score};
    }
  };
  auto recurse = [&](auto&& self, const typename S::State& state, double cum) -> void {
    const double cum_done = cum + state.log_probs[static_cast<std::size_t>(eoc)];
    const int emitted = static_cast<int>(ids.size()) + 1;
    consider(cum_done, normalized ? normalization_factor(emitted, alpha) * cum_done : cum_done);
    if (static_cast<int>(ids.size()) == max_len) return;
    for (int c = 0; c < stepper.num_classes(); ++c) {
      if (c == pad || c == eoc) continue;
      ids.push_back(c);
      self(self, stepper.advance(state, c), cum + state.log_probs[static_cast<std::size_t>(c)]);
      ids.pop_back();
    }
  };
  recurse(recurse, stepper.start(), 0.0);
  return *best;
}

// ---------------------------------------------------------------------------
// Stepper over a trained model
// ---------------------------------------------------------------------------

template <typename Real>
class AstonStepper {
 public:
  struct State {
    std::vector<nn::Tensor<Real>> hidden;  // per decoder layer
    std::vector<double> log_probs;
  };

  AstonStepper(const AstonModelT<Real>& model, std::vector<EventFeatures> prefix, int last_activity_id)
      : model_(&model), enc_(model.encode(prefix)), last_activity_(last_activity_id) {}

  AstonStepper(const AstonModelT<Real>& model, std::span<const Event> prefix)
      : AstonStepper(model,
                     encode_prefix(prefix, model.activity_vocab(), model.resource_vocab(), model.stats()),
                     model.activity_vocab().id(prefix.back().activity)) {}

  int num_classes() const { return model_->activity_vocab().size(); }
  int eoc_id() const { return Vocabulary::kEocId; }
  int pad_id() const { return Vocabulary::kPadId; }

  State start() const {
    State s;
    s.hidden = enc_.finals_per_layer;
    s.hidden.resize(static_cast<std::size_t>(model_->config().decoder_layers),
                    nn::Tensor<Real>(1, model_->hidden_dim()));
    return step(std::move(s), last_activity_);
  }

  State advance(const State& s, int symbol) const {
    State copy = s;
    return step(std::move(copy), symbol);
  }

 private:
  State step(State s, int fed_activity) const {
    const nn::Tensor<Real> logits = model_->decode_step(enc_, s.hidden, fed_activity);
    s.log_probs.resize(static_cast<std::size_t>(logits.cols()));
    nn::log_softmax_row(logits.data(), logits.cols(), s.log_probs.data());
    return s;
  }

  const AstonModelT<Real>* model_;
  typename AstonModelT<Real>::Encoded enc_;
  int last_activity_;
};

/// Decode one prefix under `config`; returns activity ids (no EOC).
template <typename Real>
std::vector<int> predict_suffix(const AstonModelT<Real>& model, std::span<const Event> prefix,
                                const DecodeConfig& config) {
  config.validate();
  const AstonStepper<Real> stepper(model, prefix);
  const int max_len = config.max_len > 0 ? config.max_len : model.max_trace_len();
  switch (config.strategy) {
    case DecodeConfig::Strategy::kArgmax:
      return predict_argmax(stepper, max_len);
    case DecodeConfig::Strategy::kRandom:
      return predict_random(stepper, max_len, config.seed);
    case DecodeConfig::Strategy::kBeam:
      return predict_beam(stepper, config.beam_width, false, config.alpha, max_len).activity_ids;
    case DecodeConfig::Strategy::kBeamNorm:
      return predict_beam(stepper, config.beam_width, true, config.alpha, max_len).activity_ids;
  }
  throw ConfigError("unknown decoding strategy");
}

}  // namespace aston
