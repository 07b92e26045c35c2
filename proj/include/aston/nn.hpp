#pragma once

#include <string>
#include <vector>

#include "aston/autodiff.hpp"
#include "aston/rng.hpp"
#include "aston/tensor.hpp"

namespace aston::nn {

/// Gated recurrent unit:
///   z = sigmoid(x Wz + h Uz + bz)
///   r = sigmoid(x Wr + h Ur + br)
///   hc = tanh(x Wh + (r * h) Uh + bh)
///   h' = z * h + (1 - z) * hc
/// The reset gate is applied to h before the candidate's recurrent product.
template <typename Real>
struct GruLayer {
  GruLayer() = default;
  GruLayer(int input, int hidden)
      : input_size(input),
        hidden_size(hidden),
        w_z({input, hidden}), u_z({hidden, hidden}), b_z({1, hidden}),
        w_r({input, hidden}), u_r({hidden, hidden}), b_r({1, hidden}),
        w_h({input, hidden}), u_h({hidden, hidden}), b_h({1, hidden}) {}

  /// Uniform(-1/sqrt(hidden), +1/sqrt(hidden)) weights, zero biases.
  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    for (Parameter<Real>* w : {&w_z, &u_z, &w_r, &u_r, &w_h, &u_h}) {
      for (std::size_t i = 0; i < w->value.size(); ++i)
        w->value[i] = static_cast<Real>(rng.uniform(-bound, bound));
    }
  }

  std::vector<Parameter<Real>*> params() {
    return {&w_z, &u_z, &b_z, &w_r, &u_r, &b_r, &w_h, &u_h, &b_h};
  }

  std::vector<std::pair<std::string, Parameter<Real>*>> named_params(const std::string& prefix) {
    return {{prefix + ".w_z", &w_z}, {prefix + ".u_z", &u_z}, {prefix + ".b_z", &b_z},
            {prefix + ".w_r", &w_r}, {prefix + ".u_r", &u_r}, {prefix + ".b_r", &b_r},
            {prefix + ".w_h", &w_h}, {prefix + ".u_h", &u_h}, {prefix + ".b_h", &b_h}};
  }

  int input_size = 0;
  int hidden_size = 0;
  Parameter<Real> w_z, u_z, b_z;
  Parameter<Real> w_r, u_r, b_r;
  Parameter<Real> w_h, u_h, b_h;
};

/// Tape-bound views of one layer's parameters, so each parameter is
/// registered once per forward pass no matter how many steps reuse it.
template <typename Real>
struct GruVars {
  Var w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h;
};

template <typename Real>
GruVars<Real> bind(Tape<Real>& tape, GruLayer<Real>& layer) {
  return GruVars<Real>{tape.param(layer.w_z), tape.param(layer.u_z), tape.param(layer.b_z),
                       tape.param(layer.w_r), tape.param(layer.u_r), tape.param(layer.b_r),
                       tape.param(layer.w_h), tape.param(layer.u_h), tape.param(layer.b_h)};
}

/// One differentiable GRU step; x is [batch x input], h_prev [batch x hidden].
template <typename Real>
Var gru_step(Tape<Real>& tape, const GruVars<Real>& g, Var x, Var h_prev) {
  const Var z = tape.sigmoid(tape.add_rowvec(tape.add(tape.matmul(x, g.w_z), tape.matmul(h_prev, g.u_z)), g.b_z));
  const Var r = tape.sigmoid(tape.add_rowvec(tape.add(tape.matmul(x, g.w_r), tape.matmul(h_prev, g.u_r)), g.b_r));
  const Var rh = tape.mul(r, h_prev);
  const Var hc = tape.tanh(tape.add_rowvec(tape.add(tape.matmul(x, g.w_h), tape.matmul(rh, g.u_h)), g.b_h));
  return tape.add(tape.mul(z, h_prev), tape.mul(tape.affine(z, Real(-1), Real(1)), hc));
}

/// Convenience wrapper binding a layer for a single step (tests, tools).
template <typename Real>
Var gru_step(Tape<Real>& tape, GruLayer<Real>& layer, Var x, Var h_prev) {
  return gru_step(tape, bind(tape, layer), x, h_prev);
}

/// No-grad GRU step mirroring gru_step's operation order exactly, so the
/// inference path produces bit-identical values to the training forward.
template <typename Real>
Tensor<Real> gru_step_infer(const GruLayer<Real>& layer, const Tensor<Real>& x,
                            const Tensor<Real>& h_prev) {
  const int rows = x.rows(), hidden = layer.hidden_size;
  auto gate = [&](const Parameter<Real>& w, const Parameter<Real>& u, const Parameter<Real>& b,
                  const Tensor<Real>& hin) {
    Tensor<Real> t1(rows, hidden), t2(rows, hidden);
    matmul_into(x, w.value, t1);
    matmul_into(hin, u.value, t2);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < hidden; ++c) t1(r, c) = t1(r, c) + t2(r, c) + b.value(0, c);
    return t1;
  };
  Tensor<Real> z = gate(layer.w_z, layer.u_z, layer.b_z, h_prev);
  Tensor<Real> r = gate(layer.w_r, layer.u_r, layer.b_r, h_prev);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = sigmoid_scalar(z[i]);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = sigmoid_scalar(r[i]);
  Tensor<Real> rh = h_prev;
  for (std::size_t i = 0; i < rh.size(); ++i) rh[i] = r[i] * rh[i];
  Tensor<Real> hc = gate(layer.w_h, layer.u_h, layer.b_h, rh);
  for (std::size_t i = 0; i < hc.size(); ++i) hc[i] = std::tanh(hc[i]);
  Tensor<Real> h(rows, hidden);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Real a = z[i] * h_prev[i];
    const Real b2 = (Real(1) - z[i]) * hc[i];
    h[i] = a + b2;
  }
  return h;
}

/// Embedding lookup: gathers rows of a bound table. Same op as Tape::rows;
/// named for its role.
template <typename Real>
Var embedding_lookup(Tape<Real>& tape, Var table, std::vector<int> ids) {
  return tape.rows(table, std::move(ids));
}

/// Plain softmax over the last axis of a [rows x cols] tensor.
template <typename Real>
Tensor<Real> softmax(const Tensor<Real>& x) {
  Tensor<Real> out = x;
  const int cols = out.cols();
  std::vector<double> lsm(static_cast<std::size_t>(cols));
  for (int r = 0; r < out.rows(); ++r) {
    log_softmax_row(out.data() + static_cast<std::size_t>(r) * cols, cols, lsm.data());
    for (int c = 0; c < cols; ++c) out(r, c) = static_cast<Real>(std::exp(lsm[c]));
  }
  return out;
}

/// -log softmax(logits)[target] for a single row of logits.
template <typename Real>
double cross_entropy(const Tensor<Real>& logits, int target) {
  const int n = static_cast<int>(logits.size());
  if (target < 0 || target >= n) throw ShapeError("cross_entropy: target out of range");
  std::vector<double> lsm(static_cast<std::size_t>(n));
  log_softmax_row(logits.data(), n, lsm.data());
  return -lsm[target];
}

}  // namespace aston::nn
