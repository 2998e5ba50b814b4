// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "avguard/errors.hpp"

namespace avguard::ag {

namespace {
std::atomic<int64_t> g_next_id{1};

void require_same_shape(const VarPtr& a, const VarPtr& b, const char* op) {
  if (!a->value.same_shape(b->value))
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a->value.shape_str() + " vs " + b->value.shape_str());
}
}  // namespace

VarPtr make_op_node(Tensor v, std::vector<VarPtr> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->parents = std::move(parents);
  n->id = g_next_id.fetch_add(1);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

VarPtr constant(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->id = g_next_id.fetch_add(1);
  return n;
}

VarPtr leaf(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = true;
  n->is_leaf = true;
  n->id = g_next_id.fetch_add(1);
  return n;
}

void backward(const VarPtr& root) {
  if (root->value.numel() != 1)
    throw DimensionError("backward requires a scalar root");
  // Node ids increase in creation order, which is a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](Node* a, Node* b) { return a->id > b->id; });

  root->ensure_grad();
  root->grad.data[0] = 1.0;
  for (Node* n : order) {
    if (n->backward_fn && n->requires_grad && !n->grad.data.empty())
      n->backward_fn();
    if (!n->is_leaf && n != root.get()) {
      n->value.data.clear();
      n->value.data.shrink_to_fit();
      n->grad.data.clear();
      n->grad.data.shrink_to_fit();
    }
  }
}

void zero_grad(const std::vector<VarPtr>& leaves) {
  for (const auto& l : leaves)
    if (!l->grad.data.empty()) l->grad.fill(0.0);
}

// ---- elementwise -------------------------------------------------------------

VarPtr add(VarPtr a, VarPtr b) {
  require_same_shape(a, b, "add");
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] + b->value.data[i];
  auto n = make_op_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    Node* pb = b.get();
    n->backward_fn = [pn, pa, pb] {
      if (pa->requires_grad) pa->accumulate(pn->grad);
      if (pb->requires_grad) pb->accumulate(pn->grad);
    };
  }
  return n;
}

VarPtr sub(VarPtr a, VarPtr b) {
  require_same_shape(a, b, "sub");
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] - b->value.data[i];
  auto n = make_op_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    Node* pb = b.get();
    n->backward_fn = [pn, pa, pb] {
      if (pa->requires_grad) pa->accumulate(pn->grad);
      if (pb->requires_grad) {
        Tensor& g = pb->ensure_grad();
        for (size_t i = 0; i < g.data.size(); ++i) g.data[i] -= pn->grad.data[i];
      }
    };
  }
  return n;
}

VarPtr mul(VarPtr a, VarPtr b) {
  require_same_shape(a, b, "mul");
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] * b->value.data[i];
  auto n = make_op_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    Node* pb = b.get();
    n->backward_fn = [pn, pa, pb] {
      if (pa->requires_grad) {
        Tensor& g = pa->ensure_grad();
        for (size_t i = 0; i < g.data.size(); ++i)
          g.data[i] += pn->grad.data[i] * pb->value.data[i];
      }
      if (pb->requires_grad) {
        Tensor& g = pb->ensure_grad();
        for (size_t i = 0; i < g.data.size(); ++i)
          g.data[i] += pn->grad.data[i] * pa->value.data[i];
      }
    };
  }
  return n;
}

VarPtr scale(VarPtr a, double c) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a->value.data[i] * c;
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa, c] {
      Tensor& g = pa->ensure_grad();
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += pn->grad.data[i] * c;
    };
  }
  return n;
}

VarPtr vexp(VarPtr a) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = std::exp(a->value.data[i]);
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa] {
      Tensor& g = pa->ensure_grad();
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += pn->grad.data[i] * pn->value.data[i];
    };
  }
  return n;
}

VarPtr sigmoid(VarPtr a) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i) {
    double x = a->value.data[i];
    out.data[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                         : std::exp(x) / (1.0 + std::exp(x));
  }
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa] {
      Tensor& g = pa->ensure_grad();
      for (size_t i = 0; i < g.data.size(); ++i) {
        double y = pn->value.data[i];
        g.data[i] += pn->grad.data[i] * y * (1.0 - y);
      }
    };
  }
  return n;
}

VarPtr leaky_relu(VarPtr a, double negative_slope) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i) {
    double x = a->value.data[i];
    out.data[i] = x >= 0 ? x : negative_slope * x;
  }
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    // keeps the sign pattern; input values may be freed before backward runs
    auto signs = std::make_shared<std::vector<char>>(a->value.data.size());
    for (size_t i = 0; i < a->value.data.size(); ++i)
      (*signs)[i] = a->value.data[i] >= 0 ? 1 : 0;
    n->backward_fn = [pn, pa, negative_slope, signs] {
      Tensor& g = pa->ensure_grad();
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += pn->grad.data[i] * ((*signs)[i] ? 1.0 : negative_slope);
    };
  }
  return n;
}

VarPtr clamp01_ste(VarPtr a) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = std::clamp(a->value.data[i], 0.0, 1.0);
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa] { pa->accumulate(pn->grad); };
  }
  return n;
}

VarPtr quantize8_ste(VarPtr a) {
  Tensor out(a->value.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = std::round(a->value.data[i] * 255.0) / 255.0;
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa] { pa->accumulate(pn->grad); };
  }
  return n;
}

// ---- structure ---------------------------------------------------------------

VarPtr concat_channels(const std::vector<VarPtr>& xs) {
  if (xs.empty()) throw DimensionError("concat_channels: empty input list");
  int64_t n_dim = xs[0]->value.dim(0);
  int64_t h = xs[0]->value.dim(2), w = xs[0]->value.dim(3);
  int64_t c_total = 0;
  for (const auto& x : xs) {
    if (x->value.ndim() != 4 || x->value.dim(0) != n_dim ||
        x->value.dim(2) != h || x->value.dim(3) != w)
      throw DimensionError("concat_channels: incompatible shapes");
    c_total += x->value.dim(1);
  }
  Tensor out({n_dim, c_total, h, w});
  int64_t plane = h * w;
  int64_t c_off = 0;
  for (const auto& x : xs) {
    int64_t c = x->value.dim(1);
    for (int64_t b = 0; b < n_dim; ++b) {
      const double* src = &x->value.data[static_cast<size_t>(b * c * plane)];
      double* dst =
          &out.data[static_cast<size_t>((b * c_total + c_off) * plane)];
      std::copy(src, src + c * plane, dst);
    }
    c_off += c;
  }
  auto n = make_op_node(std::move(out), xs);
  if (n->requires_grad) {
    Node* pn = n.get();
    std::vector<Node*> raw;
    raw.reserve(xs.size());
    for (const auto& x : xs) raw.push_back(x.get());
    n->backward_fn = [pn, raw, n_dim, c_total, plane] {
      int64_t off = 0;
      for (Node* p : raw) {
        int64_t c = p->value.dim(1);
        if (p->requires_grad) {
          Tensor& g = p->ensure_grad();
          for (int64_t b = 0; b < n_dim; ++b) {
            const double* src =
                &pn->grad.data[static_cast<size_t>((b * c_total + off) * plane)];
            double* dst = &g.data[static_cast<size_t>(b * c * plane)];
            for (int64_t i = 0; i < c * plane; ++i) dst[i] += src[i];
          }
        }
        off += c;
      }
    };
  }
  return n;
}

// ---- reductions --------------------------------------------------------------

VarPtr mean_all(VarPtr a) {
  double s = 0.0;
  for (double v : a->value.data) s += v;
  int64_t count = a->value.numel();
  Tensor out({1});
  out.data[0] = s / static_cast<double>(count);
  auto n = make_op_node(std::move(out), {a});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    n->backward_fn = [pn, pa, count] {
      double g = pn->grad.data[0] / static_cast<double>(count);
      Tensor& dst = pa->ensure_grad();
      for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g;
    };
  }
  return n;
}

VarPtr mse(VarPtr a, VarPtr b) {
  require_same_shape(a, b, "mse");
  double s = 0.0;
  for (size_t i = 0; i < a->value.data.size(); ++i) {
    double d = a->value.data[i] - b->value.data[i];
    s += d * d;
  }
  int64_t count = a->value.numel();
  Tensor out({1});
  out.data[0] = s / static_cast<double>(count);
  auto n = make_op_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* pn = n.get();
    Node* pa = a.get();
    Node* pb = b.get();
    n->backward_fn = [pn, pa, pb, count] {
      double g = 2.0 * pn->grad.data[0] / static_cast<double>(count);
      if (pa->requires_grad) {
        Tensor& da = pa->ensure_grad();
        for (size_t i = 0; i < da.data.size(); ++i)
          da.data[i] += g * (pa->value.data[i] - pb->value.data[i]);
      }
      if (pb->requires_grad) {
        Tensor& dbg = pb->ensure_grad();
        for (size_t i = 0; i < dbg.data.size(); ++i)
          dbg.data[i] -= g * (pa->value.data[i] - pb->value.data[i]);
      }
    };
  }
  return n;
}

}  // namespace avguard::ag
