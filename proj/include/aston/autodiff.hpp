#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "aston/rng.hpp"
#include "aston/tensor.hpp"

namespace aston::nn {

/// Trainable tensor with its gradient accumulator and Adam state.
/// All four tensors share one shape.
template <typename Real>
struct Parameter {
  Parameter() = default;
  explicit Parameter(std::vector<int> shape)
      : value(shape), gradient(shape), adam_m(shape), adam_v(std::move(shape)) {}

  Tensor<Real> value;
  Tensor<Real> gradient;
  Tensor<Real> adam_m;
  Tensor<Real> adam_v;
  long step_count = 0;

  void zero_grad() { gradient.fill(Real(0)); }
};

/// Standard Adam update with bias correction. Gradients are zeroed and
/// step counts incremented afterwards.
template <typename Real>
void adam_step(const std::vector<Parameter<Real>*>& params, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8) {
  for (Parameter<Real>* p : params) {
    p->step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p->step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p->step_count));
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = static_cast<double>(p->gradient[i]);
      const double m = beta1 * static_cast<double>(p->adam_m[i]) + (1.0 - beta1) * g;
      const double v = beta2 * static_cast<double>(p->adam_v[i]) + (1.0 - beta2) * g * g;
      p->adam_m[i] = static_cast<Real>(m);
      p->adam_v[i] = static_cast<Real>(v);
      const double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
      p->value[i] = static_cast<Real>(static_cast<double>(p->value[i]) - update);
    }
    p->zero_grad();
  }
}

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode autodiff tape. Forward values are computed eagerly; backward
/// closures run in reverse creation order. A tape is confined to one thread
/// and normally lives for a single forward+backward pass.
template <typename Real>
class Tape {
 public:
  const Tensor<Real>& value(Var v) const { return nodes_[v.id].value; }
  const Tensor<Real>& grad(Var v) const { return nodes_[v.id].grad; }

  Var input(Tensor<Real> t) { return make_node(std::move(t), nullptr); }

  Var param(Parameter<Real>& p) {
    Var v = make_node(p.value, nullptr);
    param_nodes_.emplace_back(v.id, &p);
    return v;
  }

  Var matmul(Var a, Var b) {
    const Tensor<Real>&av = val(a), &bv = val(b);
    Tensor<Real> out(av.rows(), bv.cols());
    matmul_into(av, bv, out);
    return make_node(std::move(out), [a, b](Tape& t, int self) {
      matmul_transb_into(t.nodes_[self].grad, t.val(b), t.nodes_[a.id].grad, true);
      matmul_transa_into(t.val(a), t.nodes_[self].grad, t.nodes_[b.id].grad, true);
    });
  }

  Var add(Var a, Var b) {
    const Tensor<Real>&av = val(a), &bv = val(b);
    if (!av.same_shape(bv)) throw ShapeError("add: shape mismatch");
    Tensor<Real> out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return make_node(std::move(out), [a, b](Tape& t, int self) {
      accumulate(t.nodes_[a.id].grad, t.nodes_[self].grad);
      accumulate(t.nodes_[b.id].grad, t.nodes_[self].grad);
    });
  }

  /// a[r x c] + bias[1 x c] broadcast over rows.
  Var add_rowvec(Var a, Var bias) {
    const Tensor<Real>&av = val(a), &bv = val(bias);
    if (bv.rows() != 1 || bv.cols() != av.cols()) throw ShapeError("add_rowvec: bad bias shape");
    Tensor<Real> out = av;
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
    return make_node(std::move(out), [a, bias](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      accumulate(t.nodes_[a.id].grad, g);
      Tensor<Real>& gb = t.nodes_[bias.id].grad;
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
    });
  }

  /// Elementwise product.
  Var mul(Var a, Var b) {
    const Tensor<Real>&av = val(a), &bv = val(b);
    if (!av.same_shape(bv)) throw ShapeError("mul: shape mismatch");
    Tensor<Real> out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return make_node(std::move(out), [a, b](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      Tensor<Real>&ga = t.nodes_[a.id].grad, &gb = t.nodes_[b.id].grad;
      const Tensor<Real>&av2 = t.val(a), &bv2 = t.val(b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * bv2[i];
        gb[i] += g[i] * av2[i];
      }
    });
  }

  /// Elementwise alpha * a + beta.
  Var affine(Var a, Real alpha, Real beta) {
    Tensor<Real> out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * out[i] + beta;
    return make_node(std::move(out), [a, alpha](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += alpha * g[i];
    });
  }

  Var sigmoid(Var a) {
    Tensor<Real> out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(out[i]);
    return make_node(std::move(out), [a](Tape& t, int self) {
      const Tensor<Real>&g = t.nodes_[self].grad, &y = t.nodes_[self].value;
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (Real(1) - y[i]);
    });
  }

  Var tanh(Var a) {
    Tensor<Real> out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return make_node(std::move(out), [a](Tape& t, int self) {
      const Tensor<Real>&g = t.nodes_[self].grad, &y = t.nodes_[self].value;
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (Real(1) - y[i] * y[i]);
    });
  }

  Var concat_cols(std::vector<Var> parts) {
    const int rows = val(parts[0]).rows();
    int cols = 0;
    for (Var p : parts) {
      if (val(p).rows() != rows) throw ShapeError("concat_cols: row mismatch");
      cols += val(p).cols();
    }
    Tensor<Real> out(rows, cols);
    int at = 0;
    for (Var p : parts) {
      const Tensor<Real>& pv = val(p);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < pv.cols(); ++c) out(r, at + c) = pv(r, c);
      at += pv.cols();
    }
    return make_node(std::move(out), [parts](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      int offset = 0;
      for (Var p : parts) {
        Tensor<Real>& gp = t.nodes_[p.id].grad;
        for (int r = 0; r < g.rows(); ++r)
          for (int c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, offset + c);
        offset += gp.cols();
      }
    });
  }

  /// Row gather: out[i, :] = table[ids[i], :]. Gradient scatters back into
  /// the rows that were read.
  Var rows(Var table, std::vector<int> ids) {
    const Tensor<Real>& tv = val(table);
    Tensor<Real> out(static_cast<int>(ids.size()), tv.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= tv.rows()) throw ShapeError("rows: id out of range");
      for (int c = 0; c < tv.cols(); ++c) out(static_cast<int>(i), c) = tv(ids[i], c);
    }
    return make_node(std::move(out), [table, ids](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      Tensor<Real>& gt = t.nodes_[table.id].grad;
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (int c = 0; c < g.cols(); ++c) gt(ids[i], c) += g(static_cast<int>(i), c);
    });
  }

  /// Row-wise softmax with optional additive mask (not differentiated).
  Var softmax_rows(Var a, const Tensor<Real>* mask = nullptr) {
    Tensor<Real> out = val(a);
    if (mask != nullptr && !mask->same_shape(out)) throw ShapeError("softmax mask shape");
    softmax_rows_inplace(out, mask);
    return make_node(std::move(out), [a](Tape& t, int self) {
      const Tensor<Real>&g = t.nodes_[self].grad, &y = t.nodes_[self].value;
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (int r = 0; r < g.rows(); ++r) {
        Real dot = 0;
        for (int c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
        for (int c = 0; c < g.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - dot);
      }
    });
  }

  /// out[b, :] = sum_i alpha[b, i] * states[i][b, :].
  Var weighted_sum(std::vector<Var> states, Var alpha) {
    const Tensor<Real>& av = val(alpha);
    if (av.cols() != static_cast<int>(states.size()))
      throw ShapeError("weighted_sum: weight count != state count");
    const int rows = val(states[0]).rows(), cols = val(states[0]).cols();
    Tensor<Real> out(rows, cols);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const Tensor<Real>& h = val(states[i]);
      for (int b = 0; b < rows; ++b) {
        const Real w = av(b, static_cast<int>(i));
        for (int c = 0; c < cols; ++c) out(b, c) += w * h(b, c);
      }
    }
    return make_node(std::move(out), [states, alpha](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      Tensor<Real>& galpha = t.nodes_[alpha.id].grad;
      const Tensor<Real>& av2 = t.val(alpha);
      for (std::size_t i = 0; i < states.size(); ++i) {
        const Tensor<Real>& h = t.val(states[i]);
        Tensor<Real>& gh = t.nodes_[states[i].id].grad;
        for (int b = 0; b < g.rows(); ++b) {
          Real dot = 0;
          const Real w = av2(b, static_cast<int>(i));
          for (int c = 0; c < g.cols(); ++c) {
            dot += g(b, c) * h(b, c);
            gh(b, c) += w * g(b, c);
          }
          galpha(b, static_cast<int>(i)) += dot;
        }
      }
    });
  }

  /// out[b, :] = states[step[b]][b, :]; picks one time step per row.
  Var gather_time(std::vector<Var> states, std::vector<int> step) {
    const int rows = val(states[0]).rows(), cols = val(states[0]).cols();
    if (static_cast<int>(step.size()) != rows) throw ShapeError("gather_time: bad index count");
    Tensor<Real> out(rows, cols);
    for (int b = 0; b < rows; ++b) {
      if (step[b] < 0 || step[b] >= static_cast<int>(states.size()))
        throw ShapeError("gather_time: step out of range");
      const Tensor<Real>& h = val(states[step[b]]);
      for (int c = 0; c < cols; ++c) out(b, c) = h(b, c);
    }
    return make_node(std::move(out), [states, step](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      for (int b = 0; b < g.rows(); ++b) {
        Tensor<Real>& gh = t.nodes_[states[step[b]].id].grad;
        for (int c = 0; c < g.cols(); ++c) gh(b, c) += g(b, c);
      }
    });
  }

  /// Per-row cross-entropy -log softmax(logits)[target]; returns [rows x 1].
  Var cross_entropy_rows(Var logits, std::vector<int> targets) {
    const Tensor<Real>& lv = val(logits);
    if (static_cast<int>(targets.size()) != lv.rows())
      throw ShapeError("cross_entropy: target count != rows");
    const int cols = lv.cols();
    Tensor<Real> out(lv.rows(), 1);
    std::vector<double> lsm(static_cast<std::size_t>(cols));
    for (int r = 0; r < lv.rows(); ++r) {
      if (targets[r] < 0 || targets[r] >= cols) throw ShapeError("cross_entropy: target out of range");
      log_softmax_row(lv.data() + static_cast<std::size_t>(r) * cols, cols, lsm.data());
      out(r, 0) = static_cast<Real>(-lsm[targets[r]]);
    }
    return make_node(std::move(out), [logits, targets](Tape& t, int self) {
      const Tensor<Real>&g = t.nodes_[self].grad, &lv2 = t.val(logits);
      Tensor<Real>& gl = t.nodes_[logits.id].grad;
      const int c2 = lv2.cols();
      std::vector<double> lsm2(static_cast<std::size_t>(c2));
      for (int r = 0; r < lv2.rows(); ++r) {
        log_softmax_row(lv2.data() + static_cast<std::size_t>(r) * c2, c2, lsm2.data());
        const Real gr = g(r, 0);
        for (int c = 0; c < c2; ++c) {
          const Real p = static_cast<Real>(std::exp(lsm2[c]));
          gl(r, c) += gr * (p - Real(c == targets[r] ? 1 : 0));
        }
      }
    });
  }

  /// Sum of all elements; returns [1 x 1].
  Var sum_all(Var a) {
    Tensor<Real> out(1, 1);
    const Tensor<Real>& av = val(a);
    for (std::size_t i = 0; i < av.size(); ++i) out(0, 0) += av[i];
    return make_node(std::move(out), [a](Tape& t, int self) {
      const Real g = t.nodes_[self].grad(0, 0);
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }

  Var scale(Var a, Real s) { return affine(a, s, Real(0)); }

  /// Inverted dropout: mask and rescale by 1/(1-p). Identity when p == 0.
  /// Eval-mode callers simply skip this op.
  Var dropout(Var a, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ShapeError("dropout: p must be in [0, 1)");
    if (p == 0.0) return a;
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
    Tensor<Real> out = val(a);
    auto mask = std::make_shared<std::vector<char>>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      (*mask)[i] = rng.uniform() >= p ? 1 : 0;
      out[i] = (*mask)[i] ? out[i] * keep_scale : Real(0);
    }
    return make_node(std::move(out), [a, mask, keep_scale](Tape& t, int self) {
      const Tensor<Real>& g = t.nodes_[self].grad;
      Tensor<Real>& ga = t.nodes_[a.id].grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        if ((*mask)[i]) ga[i] += g[i] * keep_scale;
    });
  }

  /// Run reverse-mode accumulation from a scalar node, then flush gradients
  /// of parameter leaves into their Parameter::gradient tensors.
  void backward(Var loss) {
    if (val(loss).size() != 1) throw ShapeError("backward: loss must be scalar");
    nodes_[loss.id].grad(0, 0) = Real(1);
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward(*this, i);
    }
    for (auto& [node_id, p] : param_nodes_) accumulate(p->gradient, nodes_[node_id].grad);
  }

 private:
  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;
    std::function<void(Tape&, int)> backward;
  };

  const Tensor<Real>& val(Var v) const { return nodes_[v.id].value; }

  Var make_node(Tensor<Real> value, std::function<void(Tape&, int)> back) {
    Node n;
    n.grad = Tensor<Real>(value.shape());
    n.value = std::move(value);
    n.backward = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  static void accumulate(Tensor<Real>& into, const Tensor<Real>& g) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, Parameter<Real>*>> param_nodes_;
};

}  // namespace aston::nn
