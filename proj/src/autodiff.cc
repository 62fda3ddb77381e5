// src/autodiff.cc

// Copyright 2026  The rcnnctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rcnnctc/autodiff.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rcnnctc/error.h"

namespace rcnnctc {

Var Leaf(Tensor value, bool requires_grad, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->name = std::move(name);
  return n;
}

Var Parameter(std::string name, Tensor value) {
  return Leaf(std::move(value), true, std::move(name));
}

Var Constant(Tensor value) { return Leaf(std::move(value), false); }

namespace {

Var MakeNode(Tensor value, std::vector<Var> parents,
             std::function<void(Node &)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backprop = std::move(backprop);
  for (const Var &p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  return n;
}

void EnsureGrad(Node &n) {
  if (n.grad.NumElements() != n.value.NumElements()) {
    n.grad = Tensor::Zeros(n.value.shape());
  }
}

}  // namespace

Var Add(const Var &a, const Var &b) {
  RequireSameShape(a->value, b->value, "add");
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.NumElements(); ++i) {
    out[i] = a->value[i] + b->value[i];
  }
  return MakeNode(std::move(out), {a, b}, [](Node &n) {
    for (int k = 0; k < 2; ++k) {
      Node &p = *n.parents[k];
      EnsureGrad(p);
      for (int64_t i = 0; i < n.grad.NumElements(); ++i) p.grad[i] += n.grad[i];
    }
  });
}

Var Sub(const Var &a, const Var &b) {
  RequireSameShape(a->value, b->value, "sub");
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.NumElements(); ++i) {
    out[i] = a->value[i] - b->value[i];
  }
  return MakeNode(std::move(out), {a, b}, [](Node &n) {
    Node &pa = *n.parents[0];
    Node &pb = *n.parents[1];
    EnsureGrad(pa);
    EnsureGrad(pb);
    for (int64_t i = 0; i < n.grad.NumElements(); ++i) {
      pa.grad[i] += n.grad[i];
      pb.grad[i] -= n.grad[i];
    }
  });
}

Var Mul(const Var &a, const Var &b) {
  RequireSameShape(a->value, b->value, "mul");
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.NumElements(); ++i) {
    out[i] = a->value[i] * b->value[i];
  }
  return MakeNode(std::move(out), {a, b}, [](Node &n) {
    Node &pa = *n.parents[0];
    Node &pb = *n.parents[1];
    EnsureGrad(pa);
    EnsureGrad(pb);
    for (int64_t i = 0; i < n.grad.NumElements(); ++i) {
      pa.grad[i] += n.grad[i] * pb.value[i];
      pb.grad[i] += n.grad[i] * pa.value[i];
    }
  });
}

Var Scale(const Var &a, double s) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.NumElements(); ++i) out[i] = a->value[i] * s;
  return MakeNode(std::move(out), {a}, [s](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    for (int64_t i = 0; i < n.grad.NumElements(); ++i) {
      p.grad[i] += n.grad[i] * s;
    }
  });
}

Var Relu(const Var &a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.NumElements(); ++i) {
    out[i] = a->value[i] > 0.0 ? a->value[i] : 0.0;
  }
  // Subgradient at exactly 0 is 0.
  return MakeNode(std::move(out), {a}, [](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    for (int64_t i = 0; i < n.grad.NumElements(); ++i) {
      if (p.value[i] > 0.0) p.grad[i] += n.grad[i];
    }
  });
}

Var Sum(const Var &a) {
  double s = 0.0;
  for (int64_t i = 0; i < a->value.NumElements(); ++i) s += a->value[i];
  return MakeNode(Tensor::Scalar(s), {a}, [](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    const double g = n.grad[0];
    for (int64_t i = 0; i < p.grad.NumElements(); ++i) p.grad[i] += g;
  });
}

Var MeanOf(const std::vector<Var> &terms) {
  if (terms.empty()) RC_ERR << "MeanOf needs at least one term";
  double s = 0.0;
  for (const Var &t : terms) {
    if (t->value.NumElements() != 1) {
      RC_SHAPE_ERR << "MeanOf expects scalars, got "
                   << ShapeToString(t->value.shape());
    }
    s += t->value[0];
  }
  const double inv = 1.0 / static_cast<double>(terms.size());
  return MakeNode(Tensor::Scalar(s * inv), terms, [inv](Node &n) {
    const double g = n.grad[0] * inv;
    for (const Var &p : n.parents) {
      EnsureGrad(*p);
      p->grad[0] += g;
    }
  });
}

Var Reshape(const Var &a, std::vector<int64_t> shape) {
  if (NumElementsOf(shape) != a->value.NumElements()) {
    RC_SHAPE_ERR << "reshape from " << ShapeToString(a->value.shape())
                 << " to " << ShapeToString(shape) << " changes element count";
  }
  Tensor out(std::move(shape), a->value.vec());
  return MakeNode(std::move(out), {a}, [](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    for (int64_t i = 0; i < n.grad.NumElements(); ++i) p.grad[i] += n.grad[i];
  });
}

Var Linear(const Var &input, const Var &weights, const Var &bias) {
  const Tensor &x = input->value;
  const Tensor &w = weights->value;
  const Tensor &b = bias->value;
  if (x.Rank() != 2 || w.Rank() != 2) {
    RC_SHAPE_ERR << "linear expects 2-D input and weights, got "
                 << ShapeToString(x.shape()) << " and "
                 << ShapeToString(w.shape());
  }
  const int64_t rows = x.Dim(0), in_dim = x.Dim(1);
  const int64_t out_dim = w.Dim(0);
  if (w.Dim(1) != in_dim) {
    RC_SHAPE_ERR << "linear input dim mismatch: input "
                 << ShapeToString(x.shape()) << " vs weights "
                 << ShapeToString(w.shape());
  }
  if (b.NumElements() != out_dim) {
    RC_SHAPE_ERR << "linear bias size " << b.NumElements()
                 << " does not match out_dim " << out_dim;
  }
  Tensor out({rows, out_dim});
  for (int64_t r = 0; r < rows; ++r) {
    const double *xr = x.data() + r * in_dim;
    double *orow = out.data() + r * out_dim;
    for (int64_t o = 0; o < out_dim; ++o) {
      const double *wo = w.data() + o * in_dim;
      double acc = b[o];
      for (int64_t i = 0; i < in_dim; ++i) acc += wo[i] * xr[i];
      orow[o] = acc;
    }
  }
  return MakeNode(std::move(out), {input, weights, bias}, [](Node &n) {
    Node &pi = *n.parents[0];
    Node &pw = *n.parents[1];
    Node &pb = *n.parents[2];
    EnsureGrad(pi);
    EnsureGrad(pw);
    EnsureGrad(pb);
    const int64_t rows = pi.value.Dim(0), in_dim = pi.value.Dim(1);
    const int64_t out_dim = pw.value.Dim(0);
    for (int64_t r = 0; r < rows; ++r) {
      const double *xr = pi.value.data() + r * in_dim;
      const double *gr = n.grad.data() + r * out_dim;
      double *gxr = pi.grad.data() + r * in_dim;
      for (int64_t o = 0; o < out_dim; ++o) {
        const double g = gr[o];
        if (g == 0.0) continue;
        const double *wo = pw.value.data() + o * in_dim;
        double *gwo = pw.grad.data() + o * in_dim;
        pb.grad[o] += g;
        for (int64_t i = 0; i < in_dim; ++i) {
          gxr[i] += g * wo[i];
          gwo[i] += g * xr[i];
        }
      }
    }
  });
}

Var LogSoftmax(const Var &input) {
  const Tensor &x = input->value;
  if (x.Rank() < 1) RC_SHAPE_ERR << "log_softmax needs rank >= 1";
  const int64_t labels = x.Dim(x.Rank() - 1);
  if (labels < 2) {
    RC_SHAPE_ERR << "log_softmax needs a label axis of extent >= 2, got "
                 << ShapeToString(x.shape());
  }
  const int64_t rows = x.NumElements() / labels;
  Tensor out(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double *xr = x.data() + r * labels;
    double *orow = out.data() + r * labels;
    double mx = xr[0];
    for (int64_t j = 1; j < labels; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < labels; ++j) sum += std::exp(xr[j] - mx);
    const double lse = mx + std::log(sum);
    for (int64_t j = 0; j < labels; ++j) orow[j] = xr[j] - lse;
  }
  return MakeNode(std::move(out), {input}, [labels](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    const int64_t rows = n.value.NumElements() / labels;
    for (int64_t r = 0; r < rows; ++r) {
      const double *g = n.grad.data() + r * labels;
      const double *y = n.value.data() + r * labels;
      double *gx = p.grad.data() + r * labels;
      double gsum = 0.0;
      for (int64_t j = 0; j < labels; ++j) gsum += g[j];
      for (int64_t j = 0; j < labels; ++j) {
        gx[j] += g[j] - std::exp(y[j]) * gsum;
      }
    }
  });
}

Var Conv2d(const Var &input, const ConvSpec &spec, const Var &weights) {
  Tensor out = Conv2dForward(input->value, spec, weights->value);
  return MakeNode(std::move(out), {input, weights}, [spec](Node &n) {
    Node &pi = *n.parents[0];
    Node &pw = *n.parents[1];
    EnsureGrad(pi);
    EnsureGrad(pw);
    Conv2dBackward(pi.value, spec, pw.value, n.grad, &pi.grad, &pw.grad);
  });
}

Var BatchNorm(const Var &input, BNState *state, const Var &gamma,
              const Var &beta) {
  Tensor batch_mean, batch_var;
  Tensor out = BatchNormForward(input->value, state, gamma->value, beta->value,
                                &batch_mean, &batch_var);
  // Backward needs the statistics and mode the forward actually used.
  const BNMode mode = state->mode;
  if (mode == BNMode::kEval) {
    batch_mean = state->running_mean;
    batch_var = state->running_var;
  }
  const double eps = state->epsilon;
  return MakeNode(
      std::move(out), {input, gamma, beta},
      [batch_mean, batch_var, mode, eps](Node &n) {
        Node &pi = *n.parents[0];
        Node &pg = *n.parents[1];
        Node &pb = *n.parents[2];
        EnsureGrad(pi);
        EnsureGrad(pg);
        EnsureGrad(pb);
        BNState tmp(batch_mean.NumElements());
        tmp.epsilon = eps;
        tmp.mode = mode;
        BatchNormBackward(pi.value, tmp, pg.value, batch_mean, batch_var,
                          n.grad, &pi.grad, &pg.grad, &pb.grad);
      });
}

Var TimeMajorFeatures(const Var &input) {
  const Tensor &x = input->value;
  if (x.Rank() != 4) {
    RC_SHAPE_ERR << "TimeMajorFeatures expects [batch, maps, freq, time], got "
                 << ShapeToString(x.shape());
  }
  const int64_t b = x.Dim(0), m = x.Dim(1), f = x.Dim(2), t = x.Dim(3);
  Tensor out({b, t, m * f});
  for (int64_t ib = 0; ib < b; ++ib) {
    for (int64_t im = 0; im < m; ++im) {
      for (int64_t jf = 0; jf < f; ++jf) {
        const double *src = x.data() + ((ib * m + im) * f + jf) * t;
        for (int64_t it = 0; it < t; ++it) {
          out.At(ib, it, im * f + jf) = src[it];
        }
      }
    }
  }
  return MakeNode(std::move(out), {input}, [b, m, f, t](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    for (int64_t ib = 0; ib < b; ++ib) {
      for (int64_t im = 0; im < m; ++im) {
        for (int64_t jf = 0; jf < f; ++jf) {
          double *dst = p.grad.data() + ((ib * m + im) * f + jf) * t;
          for (int64_t it = 0; it < t; ++it) {
            dst[it] += n.grad.At(ib, it, im * f + jf);
          }
        }
      }
    }
  });
}

Var MeanPoolFreq(const Var &input) {
  const Tensor &x = input->value;
  if (x.Rank() != 4) {
    RC_SHAPE_ERR << "MeanPoolFreq expects [batch, maps, freq, time], got "
                 << ShapeToString(x.shape());
  }
  const int64_t b = x.Dim(0), m = x.Dim(1), f = x.Dim(2), t = x.Dim(3);
  Tensor out({b, m, 1, t});
  const double inv = 1.0 / static_cast<double>(f);
  for (int64_t ib = 0; ib < b; ++ib) {
    for (int64_t im = 0; im < m; ++im) {
      for (int64_t it = 0; it < t; ++it) {
        double s = 0.0;
        for (int64_t jf = 0; jf < f; ++jf) s += x.At(ib, im, jf, it);
        out.At(ib, im, 0, it) = s * inv;
      }
    }
  }
  return MakeNode(std::move(out), {input}, [b, m, f, t, inv](Node &n) {
    Node &p = *n.parents[0];
    EnsureGrad(p);
    for (int64_t ib = 0; ib < b; ++ib) {
      for (int64_t im = 0; im < m; ++im) {
        for (int64_t it = 0; it < t; ++it) {
          const double g = n.grad.At(ib, im, 0, it) * inv;
          for (int64_t jf = 0; jf < f; ++jf) p.grad.At(ib, im, jf, it) += g;
        }
      }
    }
  });
}

GradientMap Backward(const Var &loss, const ParamMap &params) {
  if (!loss) RC_ERR << "backward on null node";
  if (loss->value.NumElements() != 1) {
    RC_SHAPE_ERR << "backward needs a scalar loss, got "
                 << ShapeToString(loss->value.shape());
  }
  if (loss->IsLeaf()) {
    RC_ERR << "backward before forward: loss records no computation";
  }

  // Iterative post-order topological sort.
  std::vector<Node *> order;
  std::unordered_set<Node *> visited;
  std::vector<std::pair<Node *, size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto &[node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node *parent = node->parents[idx].get();
      ++idx;
      if (!visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node *n : order) {
    n->grad = Tensor::Zeros(n->value.shape());
  }
  loss->grad[0] = 1.0;

  // order is post-order, so reverse iteration visits each node before its
  // parents.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *n = *it;
    if (n->backprop && n->requires_grad) n->backprop(*n);
  }

  GradientMap grads;
  for (const auto &[name, var] : params) {
    if (visited.count(var.get())) {
      grads[name] = var->grad;
    } else {
      grads[name] = Tensor::Zeros(var->value.shape());
    }
  }
  return grads;
}

void SgdStep(ParamMap *params, const GradientMap &grads, double lr) {
  if (lr < 0.0) RC_ERR << "sgd_step learning rate must be >= 0, got " << lr;
  for (auto &[name, var] : *params) {
    auto it = grads.find(name);
    if (it == grads.end()) RC_ERR << "sgd_step missing gradient for " << name;
    const Tensor &g = it->second;
    RequireSameShape(var->value, g, "sgd_step");
    if (!g.AllFinite()) {
      RC_ERR << "sgd_step: non-finite gradient for parameter " << name;
    }
    for (int64_t i = 0; i < g.NumElements(); ++i) {
      var->value[i] -= lr * g[i];
    }
  }
}

}  // namespace rcnnctc
