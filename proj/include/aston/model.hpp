#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "aston/autodiff.hpp"
#include "aston/eventlog.hpp"
#include "aston/features.hpp"
#include "aston/nn.hpp"
#include "aston/rng.hpp"

namespace aston {

struct AstonConfig {
  int embedding_dim = 32;
  int hidden_dim = 32;
  int encoder_layers = 2;
  int decoder_layers = 2;
  double dropout = 0.1;
  int epochs = 150;
  int batch_size = 64;
  double learning_rate = 0.005;
  std::uint64_t seed = 1;
  double grad_clip = 0.0;  // 0 disables clipping
  int min_prefix_len = 1;

  void validate() const {
    if (embedding_dim <= 0 || hidden_dim <= 0 || encoder_layers <= 0 || decoder_layers <= 0 ||
        epochs <= 0 || batch_size <= 0 || learning_rate <= 0 || min_prefix_len < 1)
      throw ConfigError("model configuration values must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  }
};

namespace detail {
constexpr float kMaskNegative = -1e30f;
}

/// Encoder-decoder suffix predictor: stacked GRU encoder over encoded prefix
/// events, additive attention (scores w^T tanh(W1 s + W2 h_i)), stacked GRU
/// decoder over [context ++ previous-activity embedding], and a linear
/// projection to activity logits.
template <typename Real>
class AstonModelT {
 public:
  AstonModelT(AstonConfig config, Vocabulary activity_vocab, Vocabulary resource_vocab,
              TimeStats stats, int max_trace_len)
      : config_(config),
        activity_vocab_(std::move(activity_vocab)),
        resource_vocab_(std::move(resource_vocab)),
        stats_(stats),
        max_trace_len_(max_trace_len) {
    config_.validate();
    if (max_trace_len_ < 1) throw ConfigError("max_trace_len must be >= 1");
    const int e = config_.embedding_dim, h = config_.hidden_dim;
    act_emb_ = nn::Parameter<Real>({activity_vocab_.size(), e});
    res_emb_ = nn::Parameter<Real>({resource_vocab_.size(), e});
    for (int l = 0; l < config_.encoder_layers; ++l)
      encoder_.emplace_back(l == 0 ? 2 * e + EventFeatures::kNumNumeric : h, h);
    for (int l = 0; l < config_.decoder_layers; ++l)
      decoder_.emplace_back(l == 0 ? h + e : h, h);
    att_w1_ = nn::Parameter<Real>({h, h});
    att_w2_ = nn::Parameter<Real>({h, h});
    att_v_ = nn::Parameter<Real>({h, 1});
    proj_w_ = nn::Parameter<Real>({h, activity_vocab_.size()});
    proj_b_ = nn::Parameter<Real>({1, activity_vocab_.size()});
    init_params();
  }

  const AstonConfig& config() const { return config_; }
  const Vocabulary& activity_vocab() const { return activity_vocab_; }
  const Vocabulary& resource_vocab() const { return resource_vocab_; }
  const TimeStats& stats() const { return stats_; }
  int max_trace_len() const { return max_trace_len_; }
  int hidden_dim() const { return config_.hidden_dim; }

  std::vector<nn::Parameter<Real>*> params() {
    std::vector<nn::Parameter<Real>*> out = {&act_emb_, &res_emb_};
    for (auto& l : encoder_)
      for (auto* p : l.params()) out.push_back(p);
    for (auto& l : decoder_)
      for (auto* p : l.params()) out.push_back(p);
    out.push_back(&att_w1_);
    out.push_back(&att_w2_);
    out.push_back(&att_v_);
    out.push_back(&proj_w_);
    out.push_back(&proj_b_);
    return out;
  }

  std::vector<std::pair<std::string, nn::Parameter<Real>*>> named_params() {
    std::vector<std::pair<std::string, nn::Parameter<Real>*>> out = {{"act_emb", &act_emb_},
                                                                     {"res_emb", &res_emb_}};
    for (std::size_t l = 0; l < encoder_.size(); ++l)
      for (auto& np : encoder_[l].named_params("enc." + std::to_string(l))) out.push_back(np);
    for (std::size_t l = 0; l < decoder_.size(); ++l)
      for (auto& np : decoder_[l].named_params("dec." + std::to_string(l))) out.push_back(np);
    out.emplace_back("att.w1", &att_w1_);
    out.emplace_back("att.w2", &att_w2_);
    out.emplace_back("att.v", &att_v_);
    out.emplace_back("proj.w", &proj_w_);
    out.emplace_back("proj.b", &proj_b_);
    return out;
  }

  // ------------------------------------------------------------------
  // Inference path (no tape). Mirrors the training ops' arithmetic order
  // exactly, so both paths produce bit-identical forward values.
  // ------------------------------------------------------------------

  struct Encoded {
    std::vector<nn::Tensor<Real>> top_states;       // one [1 x h] per prefix event
    std::vector<nn::Tensor<Real>> finals_per_layer; // one [1 x h] per layer
  };

  /// Top-layer hidden state per prefix event plus per-layer final states.
  Encoded encode(const std::vector<EventFeatures>& prefix) const {
    if (prefix.empty()) throw DataError("encode: empty prefix");
    const int h = config_.hidden_dim;
    std::vector<nn::Tensor<Real>> hidden(encoder_.size(), nn::Tensor<Real>(1, h));
    Encoded out;
    for (const EventFeatures& f : prefix) {
      nn::Tensor<Real> x = assemble_input(f);
      for (std::size_t l = 0; l < encoder_.size(); ++l) {
        hidden[l] = nn::gru_step_infer(encoder_[l], x, hidden[l]);
        x = hidden[l];
      }
      out.top_states.push_back(hidden.back());
    }
    out.finals_per_layer = hidden;
    return out;
  }

  /// Additive attention: scores e_i = v . tanh(query W1 + h_i W2), softmax
  /// weights, context = sum_i alpha_i h_i. Returns (context, weights).
  std::pair<nn::Tensor<Real>, nn::Tensor<Real>> attend(
      const nn::Tensor<Real>& query, const std::vector<nn::Tensor<Real>>& enc_states) const {
    const int k = static_cast<int>(enc_states.size());
    if (k < 1) throw DataError("attend: no encoder states");
    const int h = config_.hidden_dim;
    nn::Tensor<Real> qw(1, h);
    nn::matmul_into(query, att_w1_.value, qw);
    nn::Tensor<Real> scores(1, k);
    nn::Tensor<Real> w2h(1, h), pre(1, h), score(1, 1);
    for (int i = 0; i < k; ++i) {
      nn::matmul_into(enc_states[static_cast<std::size_t>(i)], att_w2_.value, w2h);
      for (int c = 0; c < h; ++c) pre(0, c) = std::tanh(qw(0, c) + w2h(0, c));
      nn::matmul_into(pre, att_v_.value, score);
      scores(0, i) = score(0, 0);
    }
    nn::softmax_rows_inplace(scores);
    nn::Tensor<Real> context(1, h);
    for (int i = 0; i < k; ++i) {
      const Real w = scores(0, i);
      const nn::Tensor<Real>& hi = enc_states[static_cast<std::size_t>(i)];
      for (int c = 0; c < h; ++c) context(0, c) += w * hi(0, c);
    }
    return {std::move(context), std::move(scores)};
  }

  /// One inference decoder step. `hidden` holds the per-layer decoder state
  /// (initially the encoder finals); `fed_activity` is the previous activity
  /// (the last prefix activity on the first step). Returns logits [1 x V].
  nn::Tensor<Real> decode_step(const Encoded& enc, std::vector<nn::Tensor<Real>>& hidden,
                               int fed_activity) const {
    auto [context, weights] = attend(hidden.back(), enc.top_states);
    const int e = config_.embedding_dim;
    nn::Tensor<Real> x(1, config_.hidden_dim + e);
    for (int c = 0; c < config_.hidden_dim; ++c) x(0, c) = context(0, c);
    if (fed_activity < 0 || fed_activity >= act_emb_.value.rows())
      throw ShapeError("decode_step: activity id out of range");
    for (int c = 0; c < e; ++c) x(0, config_.hidden_dim + c) = act_emb_.value(fed_activity, c);
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
      hidden[l] = nn::gru_step_infer(decoder_[l], x, hidden[l]);
      x = hidden[l];
    }
    nn::Tensor<Real> logits(1, activity_vocab_.size());
    nn::matmul_into(hidden.back(), proj_w_.value, logits);
    for (int c = 0; c < logits.cols(); ++c) logits(0, c) += proj_b_.value(0, c);
    return logits;
  }

  // ------------------------------------------------------------------
  // Training path (autodiff tape)
  // ------------------------------------------------------------------

  /// One prefix/suffix example in id space; targets padded with EOC.
  struct EncodedExample {
    std::vector<EventFeatures> prefix;
    int last_activity_id = 0;
    std::vector<int> target;  // length = max_trace_len
  };

  EncodedExample encode_example(const Example& ex) const {
    EncodedExample out;
    out.prefix = encode_prefix(ex.prefix, activity_vocab_, resource_vocab_, stats_);
    out.last_activity_id = out.prefix.back().activity_id;
    out.target.reserve(static_cast<std::size_t>(max_trace_len_));
    for (const std::string& label : ex.suffix_activities) {
      if (static_cast<int>(out.target.size()) >= max_trace_len_) break;
      out.target.push_back(activity_vocab_.id(label));
    }
    while (static_cast<int>(out.target.size()) < max_trace_len_)
      out.target.push_back(Vocabulary::kEocId);
    return out;
  }

  /// Mini-batch of encoded examples, right-padded to the longest prefix.
  struct Batch {
    int rows = 0;
    int prefix_len = 0;  // padded length
    std::vector<std::vector<int>> act_ids;  // [prefix_len][rows]
    std::vector<std::vector<int>> res_ids;
    std::vector<nn::Tensor<Real>> numeric;  // [prefix_len] of [rows x 6]
    nn::Tensor<Real> attn_mask;             // [rows x prefix_len], 0 or -1e30
    std::vector<int> last_step;             // true prefix length - 1 per row
    std::vector<int> last_act;
    std::vector<std::vector<int>> target;   // [max_trace_len][rows]
  };

  Batch make_batch(const std::vector<EncodedExample>& examples,
                   const std::vector<std::size_t>& idx) const {
    Batch b;
    b.rows = static_cast<int>(idx.size());
    for (std::size_t i : idx)
      b.prefix_len = std::max(b.prefix_len, static_cast<int>(examples[i].prefix.size()));
    b.attn_mask = nn::Tensor<Real>(b.rows, b.prefix_len);
    b.act_ids.assign(static_cast<std::size_t>(b.prefix_len), std::vector<int>(b.rows, Vocabulary::kPadId));
    b.res_ids = b.act_ids;
    b.numeric.assign(static_cast<std::size_t>(b.prefix_len), nn::Tensor<Real>(b.rows, EventFeatures::kNumNumeric));
    b.target.assign(static_cast<std::size_t>(max_trace_len_), std::vector<int>(b.rows, Vocabulary::kEocId));
    for (int r = 0; r < b.rows; ++r) {
      const EncodedExample& ex = examples[idx[static_cast<std::size_t>(r)]];
      const int len = static_cast<int>(ex.prefix.size());
      b.last_step.push_back(len - 1);
      b.last_act.push_back(ex.last_activity_id);
      float numeric[EventFeatures::kNumNumeric];
      for (int j = 0; j < len; ++j) {
        const EventFeatures& f = ex.prefix[static_cast<std::size_t>(j)];
        b.act_ids[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] = f.activity_id;
        b.res_ids[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] = f.resource_id;
        f.numeric(numeric);
        for (int c = 0; c < EventFeatures::kNumNumeric; ++c)
          b.numeric[static_cast<std::size_t>(j)](r, c) = static_cast<Real>(numeric[c]);
      }
      // Padded positions are excluded from attention.
      for (int j = len; j < b.prefix_len; ++j)
        b.attn_mask(r, j) = static_cast<Real>(detail::kMaskNegative);
      for (std::size_t t = 0; t < ex.target.size(); ++t)
        b.target[t][static_cast<std::size_t>(r)] = ex.target[t];
    }
    return b;
  }

  struct TapeForward {
    std::vector<nn::Var> logits;        // one [rows x V] per decoder step
    std::vector<nn::Var> attn_weights;  // one [rows x prefix_len] per step
    nn::Var per_example_loss;           // [rows x 1], Eq-style sum over steps
    nn::Var mean_loss;                  // [1 x 1]
  };

  /// Teacher-forced forward pass. `rng` enables dropout (training mode);
  /// pass nullptr for evaluation.
  TapeForward forward_train(nn::Tape<Real>& tape, const Batch& batch, Rng* rng) {
    for (const auto& step : batch.target)
      for (int id : step)
        if (id == Vocabulary::kPadId) throw DataError("decoder target contains PAD");

    const int h = config_.hidden_dim;
    const nn::Var act_table = tape.param(act_emb_);
    const nn::Var res_table = tape.param(res_emb_);
    std::vector<nn::GruVars<Real>> enc_vars, dec_vars;
    for (auto& l : encoder_) enc_vars.push_back(nn::bind(tape, l));
    for (auto& l : decoder_) dec_vars.push_back(nn::bind(tape, l));
    const nn::Var w1 = tape.param(att_w1_);
    const nn::Var w2 = tape.param(att_w2_);
    const nn::Var v = tape.param(att_v_);
    const nn::Var pw = tape.param(proj_w_);
    const nn::Var pb = tape.param(proj_b_);

    auto maybe_dropout = [&](nn::Var x) {
      return rng != nullptr ? tape.dropout(x, config_.dropout, *rng) : x;
    };

    // Encoder over padded prefix steps.
    std::vector<std::vector<nn::Var>> states(encoder_.size());
    std::vector<nn::Var> hidden;
    for (std::size_t l = 0; l < encoder_.size(); ++l)
      hidden.push_back(tape.input(nn::Tensor<Real>(batch.rows, h)));
    for (int j = 0; j < batch.prefix_len; ++j) {
      nn::Var x = tape.concat_cols({tape.rows(act_table, batch.act_ids[static_cast<std::size_t>(j)]),
                                    tape.rows(res_table, batch.res_ids[static_cast<std::size_t>(j)]),
                                    tape.input(batch.numeric[static_cast<std::size_t>(j)])});
      x = maybe_dropout(x);
      for (std::size_t l = 0; l < encoder_.size(); ++l) {
        if (l > 0) x = maybe_dropout(x);
        hidden[l] = nn::gru_step(tape, enc_vars[l], x, hidden[l]);
        states[l].push_back(hidden[l]);
        x = hidden[l];
      }
    }
    const std::vector<nn::Var>& top_states = states.back();

    // Per-row final encoder state for each layer initializes the decoder.
    std::vector<nn::Var> dec_hidden;
    for (std::size_t l = 0; l < encoder_.size(); ++l)
      dec_hidden.push_back(tape.gather_time(states[l], batch.last_step));
    if (decoder_.size() != encoder_.size()) {
      // Extra decoder layers start at zero when the stacks differ in depth.
      dec_hidden.resize(decoder_.size(), tape.input(nn::Tensor<Real>(batch.rows, h)));
    }

    std::vector<nn::Var> w2h;
    for (const nn::Var& s : top_states) w2h.push_back(tape.matmul(s, w2));

    TapeForward out;
    nn::Var per_example{-1};
    for (int t = 0; t < max_trace_len_; ++t) {
      const nn::Var query = dec_hidden.back();
      const nn::Var qw1 = tape.matmul(query, w1);
      std::vector<nn::Var> score_cols;
      for (int j = 0; j < batch.prefix_len; ++j)
        score_cols.push_back(tape.matmul(tape.tanh(tape.add(qw1, w2h[static_cast<std::size_t>(j)])), v));
      const nn::Var alpha = tape.softmax_rows(tape.concat_cols(score_cols), &batch.attn_mask);
      out.attn_weights.push_back(alpha);
      const nn::Var context = tape.weighted_sum(top_states, alpha);

      const std::vector<int>& fed = t == 0 ? batch.last_act : batch.target[static_cast<std::size_t>(t - 1)];
      nn::Var x = tape.concat_cols({context, tape.rows(act_table, fed)});
      x = maybe_dropout(x);
      for (std::size_t l = 0; l < decoder_.size(); ++l) {
        if (l > 0) x = maybe_dropout(x);
        dec_hidden[l] = nn::gru_step(tape, dec_vars[l], x, dec_hidden[l]);
        x = dec_hidden[l];
      }
      const nn::Var logits = tape.add_rowvec(tape.matmul(dec_hidden.back(), pw), pb);
      out.logits.push_back(logits);

      const nn::Var ce = tape.cross_entropy_rows(logits, batch.target[static_cast<std::size_t>(t)]);
      per_example = t == 0 ? ce : tape.add(per_example, ce);
    }
    out.per_example_loss = per_example;
    out.mean_loss = tape.scale(tape.sum_all(per_example), Real(1) / static_cast<Real>(batch.rows));
    return out;
  }

  /// Suffix loss of one encoded example: sum of per-position cross-entropy
  /// over the full padded target, padding unmasked.
  double example_loss(const EncodedExample& ex) {
    nn::Tape<Real> tape;
    const Batch b = make_batch({ex}, {0});
    return static_cast<double>(tape.value(forward_train(tape, b, nullptr).per_example_loss)(0, 0));
  }

 private:
  void init_params() {
    Rng rng(config_.seed);
    for (std::size_t i = 0; i < act_emb_.value.size(); ++i)
      act_emb_.value[i] = static_cast<Real>(rng.normal(0.0, 0.1));
    for (std::size_t i = 0; i < res_emb_.value.size(); ++i)
      res_emb_.value[i] = static_cast<Real>(rng.normal(0.0, 0.1));
    for (auto& l : encoder_) l.init(rng);
    for (auto& l : decoder_) l.init(rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
    for (nn::Parameter<Real>* p : {&att_w1_, &att_w2_, &att_v_, &proj_w_}) {
      for (std::size_t i = 0; i < p->value.size(); ++i)
        p->value[i] = static_cast<Real>(rng.uniform(-bound, bound));
    }
  }

  nn::Tensor<Real> assemble_input(const EventFeatures& f) const {
    const int e = config_.embedding_dim;
    nn::Tensor<Real> x(1, 2 * e + EventFeatures::kNumNumeric);
    if (f.activity_id < 0 || f.activity_id >= act_emb_.value.rows() || f.resource_id < 0 ||
        f.resource_id >= res_emb_.value.rows())
      throw ShapeError("event features reference ids outside the vocabularies");
    for (int c = 0; c < e; ++c) x(0, c) = act_emb_.value(f.activity_id, c);
    for (int c = 0; c < e; ++c) x(0, e + c) = res_emb_.value(f.resource_id, c);
    float numeric[EventFeatures::kNumNumeric];
    f.numeric(numeric);
    for (int c = 0; c < EventFeatures::kNumNumeric; ++c)
      x(0, 2 * e + c) = static_cast<Real>(numeric[c]);
    return x;
  }

  AstonConfig config_;
  Vocabulary activity_vocab_;
  Vocabulary resource_vocab_;
  TimeStats stats_;
  int max_trace_len_ = 1;

  nn::Parameter<Real> act_emb_, res_emb_;
  std::vector<nn::GruLayer<Real>> encoder_, decoder_;
  nn::Parameter<Real> att_w1_, att_w2_, att_v_;
  nn::Parameter<Real> proj_w_, proj_b_;
};

using AstonModel = AstonModelT<float>;

/// Plain-arithmetic suffix loss over already-computed logits (one [1 x V]
/// row per position), padding positions included.
template <typename Real>
double suffix_loss(const std::vector<nn::Tensor<Real>>& logits, const std::vector<int>& target) {
  if (logits.size() != target.size()) throw DataError("suffix_loss: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += nn::cross_entropy(logits[i], target[i]);
  return total;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct EpochStats {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // mean per-example loss / padded length
  double val_loss = 0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

/// Mini-batch Adam with per-epoch shuffling; keeps the parameter snapshot
/// with the lowest mean validation loss and restores it before returning.
/// Aborts with DataError if the loss diverges to NaN/Inf.
template <typename Real>
TrainResult train_model(AstonModelT<Real>& model, const std::vector<Example>& train_examples,
                        const std::vector<Example>& val_examples,
                        const std::function<void(const EpochStats&)>& on_epoch = {}) {
  if (train_examples.empty()) throw DataError("training set is empty");
  if (val_examples.empty()) throw DataError("validation set is empty");
  const AstonConfig& cfg = model.config();

  using Encoded = typename AstonModelT<Real>::EncodedExample;
  std::vector<Encoded> train_enc, val_enc;
  train_enc.reserve(train_examples.size());
  for (const Example& ex : train_examples) train_enc.push_back(model.encode_example(ex));
  val_enc.reserve(val_examples.size());
  for (const Example& ex : val_examples) val_enc.push_back(model.encode_example(ex));

  Rng rng(mix_seed(cfg.seed, 0x7261696eULL));  // training stream
  auto params = model.params();
  const double per_position = 1.0 / static_cast<double>(model.max_trace_len());

  auto eval_mean_loss = [&](const std::vector<Encoded>& set) {
    double total = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t at = 0; at < set.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      idx.clear();
      for (std::size_t i = at; i < std::min(set.size(), at + static_cast<std::size_t>(cfg.batch_size)); ++i)
        idx.push_back(i);
      nn::Tape<Real> tape;
      auto fwd = model.forward_train(tape, model.make_batch(set, idx), nullptr);
      const auto& per_ex = tape.value(fwd.per_example_loss);
      for (int r = 0; r < per_ex.rows(); ++r) total += static_cast<double>(per_ex(r, 0));
    }
    return total / static_cast<double>(set.size()) * per_position;
  };

  TrainResult result;
  std::vector<std::vector<Real>> best_values;
  std::vector<std::size_t> order(train_enc.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double train_total = 0.0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::vector<std::size_t> idx(
          order.begin() + static_cast<std::ptrdiff_t>(at),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size))));
      nn::Tape<Real> tape;
      auto fwd = model.forward_train(tape, model.make_batch(train_enc, idx), &rng);
      const double batch_loss = static_cast<double>(tape.value(fwd.mean_loss)(0, 0));
      if (!std::isfinite(batch_loss))
        throw DataError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      train_total += batch_loss * static_cast<double>(idx.size());
      tape.backward(fwd.mean_loss);
      if (cfg.grad_clip > 0.0) {
        double norm_sq = 0.0;
        for (auto* p : params)
          for (std::size_t i = 0; i < p->gradient.size(); ++i)
            norm_sq += static_cast<double>(p->gradient[i]) * static_cast<double>(p->gradient[i]);
        if (norm_sq > cfg.grad_clip * cfg.grad_clip) {
          const Real s = static_cast<Real>(cfg.grad_clip / std::sqrt(norm_sq));
          for (auto* p : params)
            for (std::size_t i = 0; i < p->gradient.size(); ++i) p->gradient[i] *= s;
        }
      }
      nn::adam_step(params, cfg.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_total / static_cast<double>(train_enc.size()) * per_position;
    stats.val_loss = eval_mean_loss(val_enc);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (stats.val_loss < result.best_val_loss) {
      result.best_val_loss = stats.val_loss;
      result.best_epoch = epoch;
      best_values.clear();
      for (auto* p : params)
        best_values.emplace_back(p->value.data(), p->value.data() + p->value.size());
    }
  }

  for (std::size_t pi = 0; pi < params.size(); ++pi)
    for (std::size_t i = 0; i < params[pi]->value.size(); ++i)
      params[pi]->value[i] = best_values[pi][i];
  return result;
}

}  // namespace aston
