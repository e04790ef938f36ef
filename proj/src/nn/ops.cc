// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "omniqa/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "omniqa/error.h"

namespace omniqa::nn {
namespace {

using NodePtr = std::shared_ptr<Node>;

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     " tensor, got " + shape_string(t.shape()));
  }
}

// Broadcast kind for binary elementwise ops.
bool is_scalar_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (b.numel() == 1 && a.numel() != 1) return true;
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  return false;
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, DA da,
              DB db) {
  const bool bc = is_scalar_broadcast(a, b, name);
  const std::size_t n = a.numel();
  std::vector<double> out(n);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[bc ? 0 : i]);
  NodePtr an = a.node(), bn = b.node();
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [an, bn, bc, da, db](std::span<const double> g) {
                       const auto& x = an->value;
                       const auto& y = bn->value;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const std::size_t j = bc ? 0 : i;
                         accumulate(an, i, g[i] * da(x[i], y[j]));
                         accumulate(bn, j, g[i] * db(x[i], y[j]));
                       }
                     });
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  NodePtr an = a.node();
  return make_result(a.shape(), std::move(out), {&a},
                     [an, deriv](std::span<const double> g) {
                       if (!an->requires_grad) return;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         an->grad[i] += g[i] * deriv(an->value[i]);
                       }
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return s * x; }, [s](double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return x + s; }, [](double) { return 1.0; });
}

Tensor add_n(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("add_n of nothing");
  std::vector<double> out(xs.front().numel(), 0.0);
  std::vector<const Tensor*> inputs;
  std::vector<NodePtr> nodes;
  for (const Tensor& x : xs) {
    if (x.shape() != xs.front().shape()) {
      throw ShapeError("add_n: shape mismatch " + shape_string(x.shape()) +
                       " vs " + shape_string(xs.front().shape()));
    }
    auto v = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    inputs.push_back(&x);
    nodes.push_back(x.node());
  }
  return make_result(xs.front().shape(), std::move(out), inputs,
                     [nodes](std::span<const double> g) {
                       for (const auto& n : nodes) {
                         if (!n->requires_grad) continue;
                         for (std::size_t i = 0; i < g.size(); ++i) n->grad[i] += g[i];
                       }
                     });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double x) { return 0.5 / std::sqrt(x); });
}

Tensor abs(const Tensor& a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& a) {
  auto f = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  return unary(a, f, [f](double x) {
    const double s = f(x);
    return s * (1.0 - s);
  });
}

Tensor gelu(const Tensor& a) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c = 0.044715;
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + c * x * x * x))); },
      [](double x) {
        const double u = k * (x + c * x * x * x);
        const double t = std::tanh(u);
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * k * (1.0 + 3.0 * c * x * x);
      });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  NodePtr an = a.node();
  return make_result({1}, {s}, {&a}, [an](std::span<const double> g) {
    if (!an->requires_grad) return;
    for (double& v : an->grad) v += g[0];
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const int n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) +
                     " x " + shape_string(b.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(n) * m, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (int i = 0; i < n; ++i) {
    double* row = out.data() + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double x = av[static_cast<std::size_t>(i) * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) row[j] += x * brow[j];
    }
  }
  NodePtr an = a.node(), bn = b.node();
  return make_result({n, m}, std::move(out), {&a, &b},
                     [an, bn, n, k, m](std::span<const double> g) {
                       const auto& A = an->value;
                       const auto& B = bn->value;
                       if (an->requires_grad) {
                         for (int i = 0; i < n; ++i) {
                           for (int p = 0; p < k; ++p) {
                             double s = 0.0;
                             const double* grow = g.data() + static_cast<std::size_t>(i) * m;
                             const double* brow = B.data() + static_cast<std::size_t>(p) * m;
                             for (int j = 0; j < m; ++j) s += grow[j] * brow[j];
                             an->grad[static_cast<std::size_t>(i) * k + p] += s;
                           }
                         }
                       }
                       if (bn->requires_grad) {
                         for (int i = 0; i < n; ++i) {
                           const double* grow = g.data() + static_cast<std::size_t>(i) * m;
                           for (int p = 0; p < k; ++p) {
                             const double x = A[static_cast<std::size_t>(i) * k + p];
                             if (x == 0.0) continue;
                             double* drow = bn->grad.data() + static_cast<std::size_t>(p) * m;
                             for (int j = 0; j < m; ++j) drow[j] += x * grow[j];
                           }
                         }
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const int n = a.dim(0), m = a.dim(1);
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      out[static_cast<std::size_t>(j) * n + i] = av[static_cast<std::size_t>(i) * m + j];
    }
  }
  NodePtr an = a.node();
  return make_result({m, n}, std::move(out), {&a}, [an, n, m](std::span<const double> g) {
    if (!an->requires_grad) return;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        an->grad[static_cast<std::size_t>(i) * m + j] += g[static_cast<std::size_t>(j) * n + i];
      }
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_rank(a, 2, "add_bias");
  const int n = a.dim(0), m = a.dim(1);
  if (bias.numel() != static_cast<std::size_t>(m)) {
    throw ShapeError("add_bias: bias " + shape_string(bias.shape()) +
                     " does not match " + shape_string(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = bias.data();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i) * m + j] += bv[j];
  }
  NodePtr an = a.node(), bn = bias.node();
  return make_result(a.shape(), std::move(out), {&a, &bias},
                     [an, bn, n, m](std::span<const double> g) {
                       if (an->requires_grad) {
                         for (std::size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                       }
                       if (bn->requires_grad) {
                         for (int i = 0; i < n; ++i) {
                           for (int j = 0; j < m; ++j) {
                             bn->grad[j] += g[static_cast<std::size_t>(i) * m + j];
                           }
                         }
                       }
                     });
}

Tensor mean_rows(const Tensor& a) {
  require_rank(a, 2, "mean_rows");
  const int n = a.dim(0), m = a.dim(1);
  std::vector<double> out(m, 0.0);
  auto av = a.data();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) out[j] += av[static_cast<std::size_t>(i) * m + j];
  }
  for (double& v : out) v /= n;
  NodePtr an = a.node();
  return make_result({1, m}, std::move(out), {&a}, [an, n, m](std::span<const double> g) {
    if (!an->requires_grad) return;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) an->grad[static_cast<std::size_t>(i) * m + j] += g[j] / n;
    }
  });
}

Tensor softmax_rows(const Tensor& a) {
  require_rank(a, 2, "softmax_rows");
  const int n = a.dim(0), m = a.dim(1);
  std::vector<double> out(a.numel());
  auto av = a.data();
  for (int i = 0; i < n; ++i) {
    const double* x = av.data() + static_cast<std::size_t>(i) * m;
    double* y = out.data() + static_cast<std::size_t>(i) * m;
    const double mx = *std::max_element(x, x + m);
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      y[j] = std::exp(x[j] - mx);
      s += y[j];
    }
    for (int j = 0; j < m; ++j) y[j] /= s;
  }
  NodePtr an = a.node();
  auto y_copy = std::make_shared<std::vector<double>>(out);
  return make_result(a.shape(), std::move(out), {&a},
                     [an, y_copy, n, m](std::span<const double> g) {
                       if (!an->requires_grad) return;
                       const auto& y = *y_copy;
                       for (int i = 0; i < n; ++i) {
                         const std::size_t o = static_cast<std::size_t>(i) * m;
                         double dot = 0.0;
                         for (int j = 0; j < m; ++j) dot += g[o + j] * y[o + j];
                         for (int j = 0; j < m; ++j) {
                           an->grad[o + j] += y[o + j] * (g[o + j] - dot);
                         }
                       }
                     });
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                       double eps) {
  require_rank(a, 2, "layer_norm_rows");
  const int n = a.dim(0), m = a.dim(1);
  if (gamma.numel() != static_cast<std::size_t>(m) ||
      beta.numel() != static_cast<std::size_t>(m)) {
    throw ShapeError("layer_norm_rows: affine parameters do not match " +
                     shape_string(a.shape()));
  }
  auto xhat = std::make_shared<std::vector<double>>(a.numel());
  auto inv_std = std::make_shared<std::vector<double>>(n);
  std::vector<double> out(a.numel());
  auto av = a.data();
  auto gv = gamma.data();
  auto bv = beta.data();
  for (int i = 0; i < n; ++i) {
    const std::size_t o = static_cast<std::size_t>(i) * m;
    double mu = 0.0;
    for (int j = 0; j < m; ++j) mu += av[o + j];
    mu /= m;
    double var = 0.0;
    for (int j = 0; j < m; ++j) var += (av[o + j] - mu) * (av[o + j] - mu);
    var /= m;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (int j = 0; j < m; ++j) {
      (*xhat)[o + j] = (av[o + j] - mu) * is;
      out[o + j] = (*xhat)[o + j] * gv[j] + bv[j];
    }
  }
  NodePtr an = a.node(), gn = gamma.node(), bn = beta.node();
  return make_result(
      a.shape(), std::move(out), {&a, &gamma, &beta},
      [an, gn, bn, xhat, inv_std, n, m](std::span<const double> g) {
        const auto& gam = gn->value;
        for (int i = 0; i < n; ++i) {
          const std::size_t o = static_cast<std::size_t>(i) * m;
          double s1 = 0.0, s2 = 0.0;
          for (int j = 0; j < m; ++j) {
            const double dxh = g[o + j] * gam[j];
            s1 += dxh;
            s2 += dxh * (*xhat)[o + j];
            if (gn->requires_grad) gn->grad[j] += g[o + j] * (*xhat)[o + j];
            if (bn->requires_grad) bn->grad[j] += g[o + j];
          }
          if (!an->requires_grad) continue;
          const double is = (*inv_std)[i];
          for (int j = 0; j < m; ++j) {
            const double dxh = g[o + j] * gam[j];
            an->grad[o + j] += is * (dxh - s1 / m - (*xhat)[o + j] * s2 / m);
          }
        }
      });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape " + shape_string(a.shape()) + " -> " +
                     shape_string(shape) + " changes the element count");
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  NodePtr an = a.node();
  return make_result(std::move(shape), std::move(out), {&a},
                     [an](std::span<const double> g) {
                       if (!an->requires_grad) return;
                       for (std::size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                     });
}

Tensor slice_rows(const Tensor& a, int start, int count) {
  if (a.rank() < 1 || start < 0 || count < 0 || start + count > a.dim(0)) {
    throw ShapeError("slice_rows out of range on " + shape_string(a.shape()));
  }
  const std::size_t inner = a.numel() / static_cast<std::size_t>(a.dim(0));
  Shape shape = a.shape();
  shape[0] = count;
  const std::size_t off = static_cast<std::size_t>(start) * inner;
  std::vector<double> out(a.data().begin() + off,
                          a.data().begin() + off + static_cast<std::size_t>(count) * inner);
  NodePtr an = a.node();
  return make_result(std::move(shape), std::move(out), {&a},
                     [an, off](std::span<const double> g) {
                       if (!an->requires_grad) return;
                       for (std::size_t i = 0; i < g.size(); ++i) an->grad[off + i] += g[i];
                     });
}

Tensor slice_cols(const Tensor& a, int start, int count) {
  require_rank(a, 2, "slice_cols");
  const int n = a.dim(0), m = a.dim(1);
  if (start < 0 || count < 0 || start + count > m) {
    throw ShapeError("slice_cols out of range on " + shape_string(a.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(n) * count);
  auto av = a.data();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < count; ++j) {
      out[static_cast<std::size_t>(i) * count + j] = av[static_cast<std::size_t>(i) * m + start + j];
    }
  }
  NodePtr an = a.node();
  return make_result({n, count}, std::move(out), {&a},
                     [an, n, m, start, count](std::span<const double> g) {
                       if (!an->requires_grad) return;
                       for (int i = 0; i < n; ++i) {
                         for (int j = 0; j < count; ++j) {
                           an->grad[static_cast<std::size_t>(i) * m + start + j] +=
                               g[static_cast<std::size_t>(i) * count + j];
                         }
                       }
                     });
}

Tensor concat_rows(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_rows of nothing");
  Shape shape = xs.front().shape();
  if (shape.empty()) throw ShapeError("concat_rows needs rank >= 1");
  int rows = 0;
  std::vector<double> out;
  std::vector<const Tensor*> inputs;
  std::vector<NodePtr> nodes;
  for (const Tensor& x : xs) {
    Shape s = x.shape();
    if (s.size() != shape.size() || !std::equal(s.begin() + 1, s.end(), shape.begin() + 1)) {
      throw ShapeError("concat_rows: incompatible shapes " + shape_string(s) +
                       " and " + shape_string(shape));
    }
    rows += s[0];
    out.insert(out.end(), x.data().begin(), x.data().end());
    inputs.push_back(&x);
    nodes.push_back(x.node());
  }
  shape[0] = rows;
  return make_result(std::move(shape), std::move(out), inputs,
                     [nodes](std::span<const double> g) {
                       std::size_t off = 0;
                       for (const auto& n : nodes) {
                         const std::size_t len = n->value.size();
                         if (n->requires_grad) {
                           for (std::size_t i = 0; i < len; ++i) n->grad[i] += g[off + i];
                         }
                         off += len;
                       }
                     });
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols of nothing");
  const int n = xs.front().dim(0);
  int m = 0;
  std::vector<const Tensor*> inputs;
  std::vector<NodePtr> nodes;
  std::vector<int> widths;
  for (const Tensor& x : xs) {
    require_rank(x, 2, "concat_cols");
    if (x.dim(0) != n) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(x.dim(1));
    m += x.dim(1);
    inputs.push_back(&x);
    nodes.push_back(x.node());
  }
  std::vector<double> out(static_cast<std::size_t>(n) * m);
  int off = 0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    auto v = xs[t].data();
    const int w = widths[t];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < w; ++j) {
        out[static_cast<std::size_t>(i) * m + off + j] = v[static_cast<std::size_t>(i) * w + j];
      }
    }
    off += w;
  }
  return make_result({n, m}, std::move(out), inputs,
                     [nodes, widths, n, m](std::span<const double> g) {
                       int off = 0;
                       for (std::size_t t = 0; t < nodes.size(); ++t) {
                         const int w = widths[t];
                         if (nodes[t]->requires_grad) {
                           for (int i = 0; i < n; ++i) {
                             for (int j = 0; j < w; ++j) {
                               nodes[t]->grad[static_cast<std::size_t>(i) * w + j] +=
                                   g[static_cast<std::size_t>(i) * m + off + j];
                             }
                           }
                         }
                         off += w;
                       }
                     });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 3, "conv2d");
  require_rank(w, 4, "conv2d");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = w.dim(0), K = w.dim(2);
  if (w.dim(1) != C || w.dim(3) != K || K % 2 == 0) {
    throw ShapeError("conv2d: kernel " + shape_string(w.shape()) +
                     " incompatible with input " + shape_string(x.shape()));
  }
  if (b.numel() != static_cast<std::size_t>(O)) {
    throw ShapeError("conv2d: bias does not match output channels");
  }
  const int P = K / 2;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  std::vector<double> out(static_cast<std::size_t>(O) * plane);
  auto xv = x.data();
  auto wv = w.data();
  auto bv = b.data();
  for (int o = 0; o < O; ++o) {
    double* op = out.data() + o * plane;
    std::fill(op, op + plane, bv[o]);
    for (int c = 0; c < C; ++c) {
      const double* ip = xv.data() + c * plane;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const double wt = wv[((static_cast<std::size_t>(o) * C + c) * K + ky) * K + kx];
          const int dy = ky - P, dx = kx - P;
          const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          for (int yy = y0; yy < y1; ++yy) {
            double* orow = op + static_cast<std::size_t>(yy) * W;
            const double* irow = ip + static_cast<std::size_t>(yy + dy) * W + dx;
            for (int xx = x0; xx < x1; ++xx) orow[xx] += wt * irow[xx];
          }
        }
      }
    }
  }
  NodePtr xn = x.node(), wn = w.node(), bn = b.node();
  return make_result(
      {O, H, W}, std::move(out), {&x, &w, &b},
      [xn, wn, bn, C, H, W, O, K, P, plane](std::span<const double> g) {
        const auto& xv = xn->value;
        const auto& wv = wn->value;
        for (int o = 0; o < O; ++o) {
          const double* gp = g.data() + o * plane;
          if (bn->requires_grad) {
            double s = 0.0;
            for (std::size_t i = 0; i < plane; ++i) s += gp[i];
            bn->grad[o] += s;
          }
          for (int c = 0; c < C; ++c) {
            const double* ip = xv.data() + c * plane;
            for (int ky = 0; ky < K; ++ky) {
              for (int kx = 0; kx < K; ++kx) {
                const std::size_t wi = ((static_cast<std::size_t>(o) * C + c) * K + ky) * K + kx;
                const int dy = ky - P, dx = kx - P;
                const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                double gw = 0.0;
                const double wt = wv[wi];
                for (int yy = y0; yy < y1; ++yy) {
                  const double* grow = gp + static_cast<std::size_t>(yy) * W;
                  const std::size_t ioff = static_cast<std::size_t>(yy + dy) * W + dx;
                  const double* irow = ip + ioff;
                  if (wn->requires_grad) {
                    for (int xx = x0; xx < x1; ++xx) gw += grow[xx] * irow[xx];
                  }
                  if (xn->requires_grad) {
                    double* drow = xn->grad.data() + c * plane + ioff;
                    for (int xx = x0; xx < x1; ++xx) drow[xx] += wt * grow[xx];
                  }
                }
                if (wn->requires_grad) wn->grad[wi] += gw;
              }
            }
          }
        }
      });
}

namespace {

struct AxisInterp {
  std::vector<int> lo, hi;
  std::vector<double> t;
};

AxisInterp axis_interp(int in, int out) {
  AxisInterp a;
  a.lo.resize(out);
  a.hi.resize(out);
  a.t.resize(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    a.lo[i] = static_cast<int>(std::floor(src));
    a.hi[i] = std::min(a.lo[i] + 1, in - 1);
    a.t[i] = src - a.lo[i];
  }
  return a;
}

}  // namespace

Tensor resize_bilinear(const Tensor& x, int out_h, int out_w) {
  require_rank(x, 3, "resize_bilinear");
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_bilinear: empty output");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  auto ay = std::make_shared<AxisInterp>(axis_interp(H, out_h));
  auto ax = std::make_shared<AxisInterp>(axis_interp(W, out_w));
  std::vector<double> out(static_cast<std::size_t>(C) * out_h * out_w);
  auto xv = x.data();
  for (int c = 0; c < C; ++c) {
    const double* ip = xv.data() + static_cast<std::size_t>(c) * H * W;
    double* op = out.data() + static_cast<std::size_t>(c) * out_h * out_w;
    for (int i = 0; i < out_h; ++i) {
      const double ty = ay->t[i];
      const double* r0 = ip + static_cast<std::size_t>(ay->lo[i]) * W;
      const double* r1 = ip + static_cast<std::size_t>(ay->hi[i]) * W;
      for (int j = 0; j < out_w; ++j) {
        const double tx = ax->t[j];
        const int l = ax->lo[j], h = ax->hi[j];
        op[static_cast<std::size_t>(i) * out_w + j] =
            (1 - ty) * ((1 - tx) * r0[l] + tx * r0[h]) + ty * ((1 - tx) * r1[l] + tx * r1[h]);
      }
    }
  }
  NodePtr xn = x.node();
  return make_result({C, out_h, out_w}, std::move(out), {&x},
                     [xn, ay, ax, C, H, W, out_h, out_w](std::span<const double> g) {
                       if (!xn->requires_grad) return;
                       for (int c = 0; c < C; ++c) {
                         double* dp = xn->grad.data() + static_cast<std::size_t>(c) * H * W;
                         const double* gp = g.data() + static_cast<std::size_t>(c) * out_h * out_w;
                         for (int i = 0; i < out_h; ++i) {
                           const double ty = ay->t[i];
                           double* r0 = dp + static_cast<std::size_t>(ay->lo[i]) * W;
                           double* r1 = dp + static_cast<std::size_t>(ay->hi[i]) * W;
                           for (int j = 0; j < out_w; ++j) {
                             const double gv = gp[static_cast<std::size_t>(i) * out_w + j];
                             const double tx = ax->t[j];
                             const int l = ax->lo[j], h = ax->hi[j];
                             r0[l] += gv * (1 - ty) * (1 - tx);
                             r0[h] += gv * (1 - ty) * tx;
                             r1[l] += gv * ty * (1 - tx);
                             r1[h] += gv * ty * tx;
                           }
                         }
                       }
                     });
}

}  // namespace omniqa::nn
