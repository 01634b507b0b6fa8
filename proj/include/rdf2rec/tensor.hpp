#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdf2rec/common.hpp"

namespace rdf2rec {

// Dense 2-D tensors (rows x cols, row-major doubles) recorded on a Tape for
// reverse-mode differentiation. Scalars are 1x1. Leaves are created with
// make_param / make_const and live outside the tape; op results are owned by
// the tape and freed by Tape::clear() after each backward pass.

namespace detail {

struct TensorNode {
  int r = 0, c = 0;
  std::vector<double> v;
  std::vector<double> g;
  bool rg = false;  // requires_grad
  std::string name;
  std::function<void()> back;  // unset on leaves

  size_t size() const { return v.size(); }
  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), 0.0);
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  int rows() const { return node_->r; }
  int cols() const { return node_->c; }
  size_t size() const { return node_->v.size(); }
  bool requires_grad() const { return node_->rg; }
  const std::string& name() const { return node_->name; }

  std::vector<double>& values() { return node_->v; }
  const std::vector<double>& values() const { return node_->v; }
  const std::vector<double>& grad() const {
    node_->ensure_grad();
    return node_->g;
  }
  double at(int i, int j) const { return node_->v[static_cast<size_t>(i) * node_->c + j]; }
  double& at(int i, int j) { return node_->v[static_cast<size_t>(i) * node_->c + j]; }
  double grad_at(int i, int j) const {
    node_->ensure_grad();
    return node_->g[static_cast<size_t>(i) * node_->c + j];
  }
  double scalar() const {
    if (node_->r != 1 || node_->c != 1) throw ShapeError("scalar() on non-scalar tensor");
    return node_->v[0];
  }
  void zero_grad() { node_->g.assign(node_->v.size(), 0.0); }

  detail::TensorNode* raw() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& ptr() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

inline Tensor make_tensor(int r, int c, std::vector<double> v, bool requires_grad,
                          std::string name = {}) {
  if (r < 0 || c < 0 || v.size() != static_cast<size_t>(r) * c)
    throw ShapeError("tensor value count does not match shape " + std::to_string(r) +
                     "x" + std::to_string(c));
  auto n = std::make_shared<detail::TensorNode>();
  n->r = r;
  n->c = c;
  n->v = std::move(v);
  n->rg = requires_grad;
  n->name = std::move(name);
  return Tensor(n);
}

inline Tensor make_param(int r, int c, std::vector<double> v, std::string name = {}) {
  return make_tensor(r, c, std::move(v), true, std::move(name));
}

inline Tensor make_const(int r, int c, std::vector<double> v) {
  return make_tensor(r, c, std::move(v), false);
}

inline Tensor make_zeros(int r, int c) {
  return make_tensor(r, c, std::vector<double>(static_cast<size_t>(r) * c, 0.0), false);
}

inline void zero_grad(std::vector<Tensor>& params) {
  for (auto& p : params) p.zero_grad();
}

class Tape {
 public:
  // --- forward primitives -------------------------------------------------

  Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
      throw ShapeError("matmul: " + shape_str(a) + " x " + shape_str(b));
    const int m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (int i = 0; i < m; ++i) {
      double* orow = out.data() + static_cast<size_t>(i) * n;
      const double* arow = av + static_cast<size_t>(i) * k;
      for (int p = 0; p < k; ++p) {
        const double aa = arow[p];
        if (aa == 0.0) continue;
        const double* brow = bv + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) orow[j] += aa * brow[j];
      }
    }
    return record(m, n, std::move(out), {a, b}, [m, k, n](detail::TensorNode* self,
                                                          auto& parents) {
      auto* pa = parents[0].get();
      auto* pb = parents[1].get();
      const double* g = self->g.data();
      if (pa->rg) {
        pa->ensure_grad();
        // dA += G * B^T
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* grow = g + static_cast<size_t>(i) * n;
            const double* brow = pb->v.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
            pa->g[static_cast<size_t>(i) * k + p] += acc;
          }
      }
      if (pb->rg) {
        pb->ensure_grad();
        // dB += A^T * G
        for (int i = 0; i < m; ++i) {
          const double* arow = pa->v.data() + static_cast<size_t>(i) * k;
          const double* grow = g + static_cast<size_t>(i) * n;
          for (int p = 0; p < k; ++p) {
            const double aa = arow[p];
            if (aa == 0.0) continue;
            double* brow = pb->g.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) brow[j] += aa * grow[j];
          }
        }
      }
    });
  }

  // Elementwise add; the second argument may be a 1 x n row vector broadcast
  // across rows (bias form).
  Tensor add(const Tensor& a, const Tensor& b) { return add_sub(a, b, +1.0); }
  Tensor sub(const Tensor& a, const Tensor& b) { return add_sub(a, b, -1.0); }

  // Elementwise product; the second argument may be 1x1 (scalar broadcast) or
  // m x 1 (column broadcast across the row).
  Tensor multiply(const Tensor& a, const Tensor& b) {
    const int m = a.rows(), n = a.cols();
    enum class B { Full, Scalar, Col };
    B mode;
    if (b.rows() == m && b.cols() == n)
      mode = B::Full;
    else if (b.rows() == 1 && b.cols() == 1)
      mode = B::Scalar;
    else if (b.rows() == m && b.cols() == 1)
      mode = B::Col;
    else
      throw ShapeError("multiply: " + shape_str(a) + " x " + shape_str(b));
    std::vector<double> out(a.values());
    const auto& bv = b.values();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double bb = mode == B::Full ? bv[static_cast<size_t>(i) * n + j]
                   : mode == B::Scalar ? bv[0]
                                       : bv[i];
        out[static_cast<size_t>(i) * n + j] *= bb;
      }
    return record(m, n, std::move(out), {a, b}, [m, n, mode](detail::TensorNode* self,
                                                             auto& parents) {
      auto* pa = parents[0].get();
      auto* pb = parents[1].get();
      const double* g = self->g.data();
      if (pa->rg) {
        pa->ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            double bb = mode == B::Full ? pb->v[static_cast<size_t>(i) * n + j]
                       : mode == B::Scalar ? pb->v[0]
                                           : pb->v[i];
            pa->g[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(i) * n + j] * bb;
          }
      }
      if (pb->rg) {
        pb->ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            double contrib = g[static_cast<size_t>(i) * n + j] *
                             pa->v[static_cast<size_t>(i) * n + j];
            if (mode == B::Full)
              pb->g[static_cast<size_t>(i) * n + j] += contrib;
            else if (mode == B::Scalar)
              pb->g[0] += contrib;
            else
              pb->g[i] += contrib;
          }
      }
    });
  }

  Tensor scale(const Tensor& a, double k) {
    std::vector<double> out(a.values());
    for (double& x : out) x *= k;
    return record(a.rows(), a.cols(), std::move(out), {a},
                  [k](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (size_t i = 0; i < self->g.size(); ++i) pa->g[i] += k * self->g[i];
                  });
  }

  Tensor concat_rows(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols())
      throw ShapeError("concat_rows: " + shape_str(a) + " with " + shape_str(b));
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    const size_t asz = a.size();
    return record(a.rows() + b.rows(), a.cols(), std::move(out), {a, b},
                  [asz](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    auto* pb = parents[1].get();
                    if (pa->rg) {
                      pa->ensure_grad();
                      for (size_t i = 0; i < asz; ++i) pa->g[i] += self->g[i];
                    }
                    if (pb->rg) {
                      pb->ensure_grad();
                      for (size_t i = asz; i < self->g.size(); ++i)
                        pb->g[i - asz] += self->g[i];
                    }
                  });
  }

  Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
      throw ShapeError("concat_cols: " + shape_str(a) + " with " + shape_str(b));
    const int m = a.rows(), ca = a.cols(), cb = b.cols();
    std::vector<double> out(static_cast<size_t>(m) * (ca + cb));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < ca; ++j)
        out[static_cast<size_t>(i) * (ca + cb) + j] = a.at(i, j);
      for (int j = 0; j < cb; ++j)
        out[static_cast<size_t>(i) * (ca + cb) + ca + j] = b.at(i, j);
    }
    return record(m, ca + cb, std::move(out), {a, b},
                  [m, ca, cb](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    auto* pb = parents[1].get();
                    const double* g = self->g.data();
                    if (pa->rg) {
                      pa->ensure_grad();
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < ca; ++j)
                          pa->g[static_cast<size_t>(i) * ca + j] +=
                              g[static_cast<size_t>(i) * (ca + cb) + j];
                    }
                    if (pb->rg) {
                      pb->ensure_grad();
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < cb; ++j)
                          pb->g[static_cast<size_t>(i) * cb + j] +=
                              g[static_cast<size_t>(i) * (ca + cb) + ca + j];
                    }
                  });
  }

  Tensor slice_rows(const Tensor& a, int begin, int end) {
    if (begin < 0 || end > a.rows() || begin > end)
      throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," +
                       std::to_string(end) + ") on " + shape_str(a));
    const int n = a.cols();
    std::vector<double> out(a.values().begin() + static_cast<size_t>(begin) * n,
                            a.values().begin() + static_cast<size_t>(end) * n);
    return record(end - begin, n, std::move(out), {a},
                  [begin, n](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    const size_t off = static_cast<size_t>(begin) * n;
                    for (size_t i = 0; i < self->g.size(); ++i) pa->g[off + i] += self->g[i];
                  });
  }

  Tensor slice_cols(const Tensor& a, int begin, int end) {
    if (begin < 0 || end > a.cols() || begin > end)
      throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," +
                       std::to_string(end) + ") on " + shape_str(a));
    const int m = a.rows(), n = a.cols(), w = end - begin;
    std::vector<double> out(static_cast<size_t>(m) * w);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j)
        out[static_cast<size_t>(i) * w + j] = a.at(i, begin + j);
    return record(m, w, std::move(out), {a},
                  [m, n, w, begin](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (int i = 0; i < m; ++i)
                      for (int j = 0; j < w; ++j)
                        pa->g[static_cast<size_t>(i) * n + begin + j] +=
                            self->g[static_cast<size_t>(i) * w + j];
                  });
  }

  Tensor relu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0 ? x : 0.0; },
                 [](double x, double) { return x > 0 ? 1.0 : 0.0; });
  }

  Tensor leaky_relu(const Tensor& a, double slope) {
    return unary(a, [slope](double x) { return x > 0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0 ? 1.0 : slope; });
  }

  Tensor elu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0 ? x : std::expm1(x); },
                 [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
  }

  Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return stable_sigmoid(x); },
                 [](double, double y) { return y * (1.0 - y); });
  }

  Tensor softplus(const Tensor& a) {
    return unary(a, [](double x) { return stable_softplus(x); },
                 [](double x, double) { return stable_sigmoid(x); });
  }

  Tensor sin_elem(const Tensor& a) {
    return unary(a, [](double x) { return std::sin(x); },
                 [](double x, double) { return std::cos(x); });
  }

  Tensor cos_elem(const Tensor& a) {
    return unary(a, [](double x) { return std::cos(x); },
                 [](double x, double) { return -std::sin(x); });
  }

  Tensor softmax_rows(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    std::vector<int> seg(m);
    for (int i = 0; i < m; ++i) seg[i] = i;
    return softmax_segments_impl(a, seg, m, /*per_row=*/true);
  }

  // Softmax normalized within each segment, independently per column. Used
  // for per-destination attention; seg[i] is the segment of row i.
  Tensor softmax_segments(const Tensor& a, const std::vector<int>& seg, int num_segments) {
    if (static_cast<int>(seg.size()) != a.rows())
      throw ShapeError("softmax_segments: segment list length " +
                       std::to_string(seg.size()) + " for " + shape_str(a));
    return softmax_segments_impl(a, seg, num_segments, false);
  }

  Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.values()) s += x;
    return record(1, 1, {s}, {a}, [](detail::TensorNode* self, auto& parents) {
      auto* pa = parents[0].get();
      if (!pa->rg) return;
      pa->ensure_grad();
      for (double& g : pa->g) g += self->g[0];
    });
  }

  Tensor rowsum(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[i] += a.at(i, j);
    return record(m, 1, std::move(out), {a}, [m, n](detail::TensorNode* self, auto& parents) {
      auto* pa = parents[0].get();
      if (!pa->rg) return;
      pa->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) pa->g[static_cast<size_t>(i) * n + j] += self->g[i];
    });
  }

  // Per-segment mean of rows; empty segments produce zero rows.
  Tensor mean_segments(const Tensor& a, const std::vector<int>& seg, int num_segments) {
    check_segments(a, seg, num_segments, "mean_segments");
    const int m = a.rows(), n = a.cols();
    std::vector<double> out(static_cast<size_t>(num_segments) * n, 0.0);
    std::vector<int> count(num_segments, 0);
    for (int i = 0; i < m; ++i) {
      ++count[seg[i]];
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(seg[i]) * n + j] += a.at(i, j);
    }
    for (int s = 0; s < num_segments; ++s)
      if (count[s] > 0)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(s) * n + j] /= count[s];
    auto counts = std::make_shared<std::vector<int>>(std::move(count));
    auto segp = std::make_shared<std::vector<int>>(seg);
    return record(num_segments, n, std::move(out), {a},
                  [m, n, counts, segp](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (int i = 0; i < m; ++i) {
                      int s = (*segp)[i];
                      double inv = 1.0 / (*counts)[s];
                      for (int j = 0; j < n; ++j)
                        pa->g[static_cast<size_t>(i) * n + j] +=
                            self->g[static_cast<size_t>(s) * n + j] * inv;
                    }
                  });
  }

  // Per-segment elementwise max; gradient flows to the first argmax row.
  Tensor max_segments(const Tensor& a, const std::vector<int>& seg, int num_segments) {
    check_segments(a, seg, num_segments, "max_segments");
    const int m = a.rows(), n = a.cols();
    std::vector<double> out(static_cast<size_t>(num_segments) * n, 0.0);
    std::vector<int> arg(static_cast<size_t>(num_segments) * n, -1);
    for (int i = 0; i < m; ++i) {
      int s = seg[i];
      for (int j = 0; j < n; ++j) {
        size_t o = static_cast<size_t>(s) * n + j;
        if (arg[o] < 0 || a.at(i, j) > out[o]) {
          out[o] = a.at(i, j);
          arg[o] = i;
        }
      }
    }
    for (size_t o = 0; o < out.size(); ++o)
      if (arg[o] < 0) out[o] = 0.0;
    auto argp = std::make_shared<std::vector<int>>(std::move(arg));
    return record(num_segments, n, std::move(out), {a},
                  [n, argp](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (size_t o = 0; o < self->g.size(); ++o) {
                      int i = (*argp)[o];
                      if (i >= 0) pa->g[static_cast<size_t>(i) * n + o % n] += self->g[o];
                    }
                  });
  }

  Tensor l2_norm_rows(const Tensor& a) {
    const int m = a.rows(), n = a.cols();
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a.at(i, j) * a.at(i, j);
      out[i] = std::sqrt(s);
    }
    return record(m, 1, std::move(out), {a}, [m, n](detail::TensorNode* self, auto& parents) {
      auto* pa = parents[0].get();
      if (!pa->rg) return;
      pa->ensure_grad();
      for (int i = 0; i < m; ++i) {
        double norm = self->v[i];
        if (norm <= 0.0) continue;
        double gn = self->g[i] / norm;
        for (int j = 0; j < n; ++j)
          pa->g[static_cast<size_t>(i) * n + j] += gn * pa->v[static_cast<size_t>(i) * n + j];
      }
    });
  }

  Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    const int n = a.cols();
    std::vector<double> out(idx.size() * static_cast<size_t>(n));
    for (size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= a.rows())
        throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of " +
                         shape_str(a));
      for (int j = 0; j < n; ++j) out[i * n + j] = a.at(idx[i], j);
    }
    auto idxp = std::make_shared<std::vector<int>>(idx);
    return record(static_cast<int>(idx.size()), n, std::move(out), {a},
                  [n, idxp](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (size_t i = 0; i < idxp->size(); ++i)
                      for (int j = 0; j < n; ++j)
                        pa->g[static_cast<size_t>((*idxp)[i]) * n + j] += self->g[i * n + j];
                  });
  }

  // Accumulates message rows into their destination rows.
  Tensor scatter_add_rows(const Tensor& msgs, const std::vector<int>& dst, int out_rows) {
    if (static_cast<int>(dst.size()) != msgs.rows())
      throw ShapeError("scatter_add_rows: destination list length " +
                       std::to_string(dst.size()) + " for " + shape_str(msgs));
    const int n = msgs.cols();
    std::vector<double> out(static_cast<size_t>(out_rows) * n, 0.0);
    for (size_t i = 0; i < dst.size(); ++i) {
      if (dst[i] < 0 || dst[i] >= out_rows)
        throw ShapeError("scatter_add_rows: destination " + std::to_string(dst[i]) +
                         " out of " + std::to_string(out_rows) + " rows");
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(dst[i]) * n + j] += msgs.at(static_cast<int>(i), j);
    }
    auto dstp = std::make_shared<std::vector<int>>(dst);
    return record(out_rows, n, std::move(out), {msgs},
                  [n, dstp](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (size_t i = 0; i < dstp->size(); ++i)
                      for (int j = 0; j < n; ++j)
                        pa->g[i * n + j] += self->g[static_cast<size_t>((*dstp)[i]) * n + j];
                  });
  }

  // Mean binary cross-entropy on logits, computed in the stable form
  // max(s,0) - s*y + log(1+exp(-|s|)). Labels are frozen.
  Tensor bce_with_logits(const Tensor& scores, const Tensor& labels) {
    if (scores.rows() != labels.rows() || scores.cols() != 1 || labels.cols() != 1)
      throw ShapeError("bce_with_logits: " + shape_str(scores) + " vs " + shape_str(labels));
    if (scores.rows() == 0) throw ShapeError("bce_with_logits: empty input");
    const int m = scores.rows();
    double loss = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = scores.values()[i], y = labels.values()[i];
      loss += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
    }
    loss /= m;
    return record(1, 1, {loss}, {scores, labels},
                  [m](detail::TensorNode* self, auto& parents) {
                    auto* ps = parents[0].get();
                    auto* py = parents[1].get();
                    if (!ps->rg) return;
                    ps->ensure_grad();
                    double g = self->g[0] / m;
                    for (int i = 0; i < m; ++i)
                      ps->g[i] += g * (stable_sigmoid(ps->v[i]) - py->v[i]);
                  });
  }

  // --- backward -----------------------------------------------------------

  // Populates grad for every requires_grad leaf reachable from the loss.
  // Leaf grads accumulate across calls; tape-internal grads are reset so that
  // each call contributes exactly one d(loss)=1 seed.
  void backward(const Tensor& loss) {
    if (loss.rows() != 1 || loss.cols() != 1)
      throw ShapeError("backward: loss must be scalar, got " + shape_str(loss));
    for (auto& n : nodes_) n->g.assign(n->v.size(), 0.0);
    loss.raw()->ensure_grad();
    loss.raw()->g[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      detail::TensorNode* n = it->get();
      if (n->rg && n->back) n->back();
    }
  }

  void clear() { nodes_.clear(); }
  size_t size() const { return nodes_.size(); }

  static double stable_sigmoid(double x) {
    if (x >= 0) {
      double e = std::exp(-x);
      return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
  }

  static double stable_softplus(double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
  }

 private:
  static std::string shape_str(const Tensor& t) {
    return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
  }

  template <typename Back>
  Tensor record(int r, int c, std::vector<double> out,
                std::initializer_list<Tensor> parents, Back back) {
    auto n = std::make_shared<detail::TensorNode>();
    n->r = r;
    n->c = c;
    n->v = std::move(out);
    std::vector<std::shared_ptr<detail::TensorNode>> ps;
    ps.reserve(parents.size());
    bool rg = false;
    for (const Tensor& p : parents) {
      rg |= p.requires_grad();
      ps.push_back(p.ptr());
    }
    n->rg = rg;
    if (rg) {
      detail::TensorNode* raw = n.get();
      n->back = [raw, ps = std::move(ps), back = std::move(back)]() { back(raw, ps); };
    }
    nodes_.push_back(n);
    return Tensor(n);
  }

  Tensor add_sub(const Tensor& a, const Tensor& b, double sign) {
    const int m = a.rows(), n = a.cols();
    bool bias = (b.rows() == 1 && b.cols() == n && m != 1);
    if (!bias && (b.rows() != m || b.cols() != n))
      throw ShapeError(std::string(sign > 0 ? "add: " : "sub: ") + shape_str(a) + " with " +
                       shape_str(b));
    std::vector<double> out(a.values());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(i) * n + j] +=
            sign * b.values()[bias ? j : static_cast<size_t>(i) * n + j];
    return record(m, n, std::move(out), {a, b},
                  [m, n, bias, sign](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    auto* pb = parents[1].get();
                    if (pa->rg) {
                      pa->ensure_grad();
                      for (size_t i = 0; i < self->g.size(); ++i) pa->g[i] += self->g[i];
                    }
                    if (pb->rg) {
                      pb->ensure_grad();
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j)
                          pb->g[bias ? j : static_cast<size_t>(i) * n + j] +=
                              sign * self->g[static_cast<size_t>(i) * n + j];
                    }
                  });
  }

  template <typename F, typename DF>
  Tensor unary(const Tensor& a, F f, DF df) {
    std::vector<double> out(a.values());
    for (double& x : out) x = f(x);
    return record(a.rows(), a.cols(), std::move(out), {a},
                  [df](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    for (size_t i = 0; i < self->g.size(); ++i)
                      pa->g[i] += self->g[i] * df(pa->v[i], self->v[i]);
                  });
  }

  static void check_segments(const Tensor& a, const std::vector<int>& seg, int num_segments,
                             const char* op) {
    if (static_cast<int>(seg.size()) != a.rows())
      throw ShapeError(std::string(op) + ": segment list length " +
                       std::to_string(seg.size()) + " for " + shape_str(a));
    for (int s : seg)
      if (s < 0 || s >= num_segments)
        throw ShapeError(std::string(op) + ": segment id " + std::to_string(s) +
                         " out of " + std::to_string(num_segments));
  }

  Tensor softmax_segments_impl(const Tensor& a, const std::vector<int>& seg,
                               int num_segments, bool per_row) {
    if (!per_row) check_segments(a, seg, num_segments, "softmax_segments");
    const int m = a.rows(), n = a.cols();
    std::vector<double> mx(static_cast<size_t>(num_segments) * n,
                           -std::numeric_limits<double>::infinity());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        mx[static_cast<size_t>(seg[i]) * n + j] =
            std::max(mx[static_cast<size_t>(seg[i]) * n + j], a.at(i, j));
    std::vector<double> z(static_cast<size_t>(num_segments) * n, 0.0);
    std::vector<double> out(static_cast<size_t>(m) * n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double e = std::exp(a.at(i, j) - mx[static_cast<size_t>(seg[i]) * n + j]);
        out[static_cast<size_t>(i) * n + j] = e;
        z[static_cast<size_t>(seg[i]) * n + j] += e;
      }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(i) * n + j] /= z[static_cast<size_t>(seg[i]) * n + j];
    auto segp = std::make_shared<std::vector<int>>(seg);
    return record(m, n, std::move(out), {a},
                  [m, n, num_segments, segp](detail::TensorNode* self, auto& parents) {
                    auto* pa = parents[0].get();
                    if (!pa->rg) return;
                    pa->ensure_grad();
                    // dx = y * (g - sum_seg(g*y)) per segment and column
                    std::vector<double> dot(static_cast<size_t>(num_segments) * n, 0.0);
                    for (int i = 0; i < m; ++i)
                      for (int j = 0; j < n; ++j)
                        dot[static_cast<size_t>((*segp)[i]) * n + j] +=
                            self->g[static_cast<size_t>(i) * n + j] *
                            self->v[static_cast<size_t>(i) * n + j];
                    for (int i = 0; i < m; ++i)
                      for (int j = 0; j < n; ++j) {
                        size_t o = static_cast<size_t>(i) * n + j;
                        pa->g[o] += self->v[o] * (self->g[o] -
                                                  dot[static_cast<size_t>((*segp)[i]) * n + j]);
                      }
                  });
  }

  std::vector<std::shared_ptr<detail::TensorNode>> nodes_;
};

// --- optimizers -------------------------------------------------------------

inline void check_finite_grads(const std::vector<Tensor>& params) {
  for (const auto& p : params)
    for (double g : p.grad())
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient in parameter '" +
                           (p.name().empty() ? std::string("<unnamed>") : p.name()) + "'");
}

inline void sgd_step(std::vector<Tensor>& params, double lr) {
  check_finite_grads(params);
  for (auto& p : params) {
    const auto& g = p.grad();
    auto& v = p.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
  }
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::vector<Tensor>& params) {
    check_finite_grads(params);
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (auto& p : params) {
      auto& slot = slots_[p.raw()];
      if (slot.m.size() != p.size()) {
        slot.m.assign(p.size(), 0.0);
        slot.v.assign(p.size(), 0.0);
      }
      const auto& g = p.grad();
      auto& v = p.values();
      for (size_t i = 0; i < v.size(); ++i) {
        slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * g[i];
        slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        double mhat = slot.m[i] / bc1;
        double vhat = slot.v[i] / bc2;
        v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  const AdamConfig& config() const { return cfg_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  AdamConfig cfg_;
  long t_ = 0;
  std::unordered_map<detail::TensorNode*, Slot> slots_;
};

// Glorot-uniform initialized parameter matrix.
inline Tensor glorot_param(int in_dim, int out_dim, Rng& rng, std::string name) {
  double limit = std::sqrt(6.0 / (in_dim + out_dim));
  std::vector<double> v(static_cast<size_t>(in_dim) * out_dim);
  for (double& x : v) x = rng.uniform(-limit, limit);
  return make_param(in_dim, out_dim, std::move(v), std::move(name));
}

inline Tensor zeros_param(int r, int c, std::string name) {
  return make_param(r, c, std::vector<double>(static_cast<size_t>(r) * c, 0.0),
                    std::move(name));
}

}  // namespace rdf2rec
