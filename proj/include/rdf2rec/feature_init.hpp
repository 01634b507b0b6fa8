#pragma once

#include "rdf2rec/hetero_graph.hpp"
#include "rdf2rec/tensor.hpp"

namespace rdf2rec {

enum class InitTag {
  one_hot,
  cb_nld,
  cb_literal,
  tb,
  comb_nld_or_tb,
  comb_concat,
  comb_addition,
  comb_waddition,
  comb_average,
  comb_nc,
};

inline const std::vector<InitTag>& all_init_tags() {
  static const std::vector<InitTag> tags = {
      InitTag::one_hot,       InitTag::cb_nld,      InitTag::cb_literal,
      InitTag::tb,            InitTag::comb_nld_or_tb, InitTag::comb_concat,
      InitTag::comb_addition, InitTag::comb_waddition, InitTag::comb_average,
      InitTag::comb_nc};
  return tags;
}

inline const char* to_string(InitTag t) {
  switch (t) {
    case InitTag::one_hot: return "one_hot";
    case InitTag::cb_nld: return "cb_nld";
    case InitTag::cb_literal: return "cb_literal";
    case InitTag::tb: return "tb";
    case InitTag::comb_nld_or_tb: return "comb_nld_or_tb";
    case InitTag::comb_concat: return "comb_concat";
    case InitTag::comb_addition: return "comb_addition";
    case InitTag::comb_waddition: return "comb_waddition";
    case InitTag::comb_average: return "comb_average";
    case InitTag::comb_nc: return "comb_nc";
  }
  return "?";
}

inline InitTag init_tag_from_string(std::string_view s) {
  for (InitTag t : all_init_tags())
    if (s == to_string(t)) return t;
  throw ConfigError("unknown init strategy '" + std::string(s) + "'");
}

// Which precomputed inputs a strategy consumes.
inline bool is_combining(InitTag t) {
  return t == InitTag::comb_concat || t == InitTag::comb_addition ||
         t == InitTag::comb_waddition || t == InitTag::comb_average ||
         t == InitTag::comb_nc;
}
inline bool needs_content(InitTag t) {
  return t == InitTag::cb_nld || t == InitTag::cb_literal || t == InitTag::comb_nld_or_tb ||
         is_combining(t);
}
inline bool needs_topology(InitTag t) {
  return t == InitTag::tb || t == InitTag::comb_nld_or_tb || is_combining(t);
}

struct InitStrategy {
  InitTag tag = InitTag::one_hot;
  double alpha_init = 0.5;  // waddition starting weight
};

namespace detail {

inline FeatureTable nld_block_table(const HeteroGraph& g, const std::string& type) {
  const FeatureTable& xc = g.content_features.at(type);
  std::vector<std::pair<int, int>> blocks;  // (offset, width) of NLD blocks
  int off = 0;
  for (const auto& b : xc.column_spec) {
    if (b.nld && b.kind == LiteralKind::String) blocks.emplace_back(off, b.width);
    off += b.width;
  }
  if (blocks.empty()) {
    FeatureTable out = FeatureTable::zeros(xc.rows, 1, Provenance::Content);
    out.content_empty = true;
    out.column_spec.push_back({"content_empty", LiteralKind::String, 1, false});
    return out;
  }
  int dim = 0;
  for (auto [o, w] : blocks) dim += w;
  FeatureTable out = FeatureTable::zeros(xc.rows, dim, Provenance::Content);
  int at = 0;
  for (auto [o, w] : blocks) {
    for (int i = 0; i < xc.rows; ++i)
      for (int j = 0; j < w; ++j) out.at(i, at + j) = xc.at(i, o + j);
    at += w;
  }
  off = 0;
  for (const auto& b : xc.column_spec)
    if (b.nld && b.kind == LiteralKind::String) out.column_spec.push_back(b);
  return out;
}

inline const FeatureTable& require_topology(const HeteroGraph& g, const std::string& type) {
  auto it = g.topology_features.find(type);
  if (it == g.topology_features.end())
    throw MissingDependency("strategy requires topology features x_t for type '" + type +
                            "' (run KGE training first)");
  return it->second;
}

inline const FeatureTable& require_content(const HeteroGraph& g, const std::string& type) {
  auto it = g.content_features.find(type);
  if (it == g.content_features.end())
    throw MissingDependency("strategy requires content features x_c for type '" + type + "'");
  return it->second;
}

}  // namespace detail

// x_v^0 for the non-combining strategies (items 1-5).
inline std::map<std::string, FeatureTable> init_features(const HeteroGraph& g,
                                                         const InitStrategy& strategy) {
  std::map<std::string, FeatureTable> out;
  for (const auto& [tn, nt] : g.node_types) {
    switch (strategy.tag) {
      case InitTag::one_hot: {
        const int n = static_cast<int>(nt.members.size());
        FeatureTable ft = FeatureTable::zeros(n, std::max(n, 1), Provenance::OneHot);
        for (int i = 0; i < n; ++i) ft.at(i, i) = 1.0;
        ft.column_spec.push_back({"one_hot", LiteralKind::Categorical, std::max(n, 1), false});
        out[tn] = std::move(ft);
        break;
      }
      case InitTag::cb_nld:
        out[tn] = detail::nld_block_table(g, tn);
        break;
      case InitTag::cb_literal:
        out[tn] = detail::require_content(g, tn);
        break;
      case InitTag::tb:
        out[tn] = detail::require_topology(g, tn);
        break;
      case InitTag::comb_nld_or_tb: {
        if (nt.has_nld())
          out[tn] = detail::nld_block_table(g, tn);
        else
          out[tn] = detail::require_topology(g, tn);
        break;
      }
      default:
        throw ConfigError(std::string("init_features: strategy ") + to_string(strategy.tag) +
                          " combines x_c and x_t; use a feature model");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trainable pieces.

struct ProjectionLayer {
  Tensor W;  // in_dim x out_dim
  Tensor b;  // 1 x out_dim
  int in_dim = 0, out_dim = 0;

  Tensor apply(Tape& tp, const Tensor& x) const {
    if (x.cols() != in_dim)
      throw ShapeError("projection expects width " + std::to_string(in_dim) + ", got " +
                       std::to_string(x.cols()));
    return tp.add(tp.matmul(x, W), b);
  }
};

inline ProjectionLayer make_projection(int in_dim, int out_dim, Rng& rng,
                                       const std::string& name) {
  ProjectionLayer p;
  p.in_dim = in_dim;
  p.out_dim = out_dim;
  p.W = glorot_param(in_dim, out_dim, rng, name + ".W");
  p.b = zeros_param(1, out_dim, name + ".b");
  return p;
}

enum class CombineMode { Concat, Addition, WAddition, Average, NeuralCombinator };

inline CombineMode combine_mode(InitTag t) {
  switch (t) {
    case InitTag::comb_concat: return CombineMode::Concat;
    case InitTag::comb_addition: return CombineMode::Addition;
    case InitTag::comb_waddition: return CombineMode::WAddition;
    case InitTag::comb_average: return CombineMode::Average;
    case InitTag::comb_nc: return CombineMode::NeuralCombinator;
    default: throw ConfigError("not a combining strategy");
  }
}

// z = f(W [a, b] + c) with elementwise ReLU by default.
struct Combinator {
  Tensor W;  // 2*d_in x d_out
  Tensor c;  // 1 x d_out
  bool relu = true;

  Tensor apply(Tape& tp, const Tensor& a, const Tensor& b) const {
    if (a.cols() != b.cols())
      throw ShapeError("combinator inputs must have equal width, got " +
                       std::to_string(a.cols()) + " and " + std::to_string(b.cols()));
    Tensor z = tp.add(tp.matmul(tp.concat_cols(a, b), W), c);
    return relu ? tp.relu(z) : z;
  }
};

inline Combinator make_combinator(int d_in, int d_out, Rng& rng, const std::string& name) {
  Combinator cb;
  cb.W = glorot_param(2 * d_in, d_out, rng, name + ".W");
  cb.c = zeros_param(1, d_out, name + ".c");
  return cb;
}

struct CombineParams {
  Tensor alpha;               // 1x1, waddition only
  const Combinator* nc = nullptr;  // neural combinator only
};

// Combination of two equal-width (already projected) inputs; concat is the
// one mode that works on unequal widths.
inline Tensor combine(Tape& tp, const Tensor& a, const Tensor& b, CombineMode mode,
                      const CombineParams& params = {}) {
  if (a.rows() != b.rows())
    throw ShapeError("combine: row counts differ (" + std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + ")");
  switch (mode) {
    case CombineMode::Concat:
      return tp.concat_cols(a, b);
    case CombineMode::Addition:
      return tp.add(a, b);
    case CombineMode::Average:
      return tp.scale(tp.add(a, b), 0.5);
    case CombineMode::WAddition: {
      if (!params.alpha.valid()) throw ConfigError("waddition needs an alpha parameter");
      Tensor one = make_const(1, 1, {1.0});
      return tp.add(tp.multiply(a, params.alpha), tp.multiply(b, tp.sub(one, params.alpha)));
    }
    case CombineMode::NeuralCombinator:
      if (!params.nc) throw ConfigError("neural combinator parameters missing");
      return params.nc->apply(tp, a, b);
  }
  throw ConfigError("unhandled combine mode");
}

// Table-level wrappers used by tests and by callers outside a training loop;
// they run the same tensor path on constant inputs.
inline Tensor table_const(const FeatureTable& t) {
  return make_const(t.rows, t.dim, t.values);
}

inline FeatureTable table_from_tensor(const Tensor& t, Provenance prov,
                                      const std::string& strategy = {}) {
  FeatureTable ft;
  ft.rows = t.rows();
  ft.dim = t.cols();
  ft.values = t.values();
  ft.provenance = prov;
  ft.strategy = strategy;
  ft.column_spec.push_back({strategy.empty() ? "derived" : strategy, LiteralKind::Numeric,
                            ft.dim, false});
  return ft;
}

inline FeatureTable combine(const FeatureTable& a, const FeatureTable& b, CombineMode mode,
                            double alpha = 0.5, const Combinator* nc = nullptr) {
  Tape tp;
  CombineParams params;
  if (mode == CombineMode::WAddition) params.alpha = make_const(1, 1, {alpha});
  params.nc = nc;
  Tensor out = combine(tp, table_const(a), table_const(b), mode, params);
  return table_from_tensor(out, Provenance::Combined);
}

inline FeatureTable project(const ProjectionLayer& layer, const FeatureTable& x) {
  Tape tp;
  Tensor out = layer.apply(tp, table_const(x));
  return table_from_tensor(out, x.provenance);
}

// ---------------------------------------------------------------------------
// The strategy stage of the pipeline: frozen base tables plus the learnable
// projections / combination parameters, producing per-type width-out_dim
// inputs for a shared encoder.

class FeatureModel {
 public:
  static FeatureModel build(const HeteroGraph& g, const InitStrategy& strategy, int out_dim,
                            Rng& rng) {
    FeatureModel fm;
    fm.strategy_ = strategy;
    fm.out_dim_ = out_dim;
    if (!is_combining(strategy.tag)) {
      auto base = init_features(g, strategy);
      for (auto& [tn, table] : base) {
        table.validate("x0 of " + tn);
        fm.base_a_[tn] = make_const(table.rows, table.dim, table.values);
        fm.proj_a_[tn] = make_projection(table.dim, out_dim, rng, "proj." + tn);
      }
      return fm;
    }
    CombineMode mode = combine_mode(strategy.tag);
    for (const auto& [tn, nt] : g.node_types) {
      const FeatureTable& xc = detail::require_content(g, tn);
      const FeatureTable& xt = detail::require_topology(g, tn);
      fm.base_a_[tn] = make_const(xc.rows, xc.dim, xc.values);
      fm.base_b_[tn] = make_const(xt.rows, xt.dim, xt.values);
      if (mode == CombineMode::Concat) {
        // concat combines raw tables, projection follows
        fm.proj_a_[tn] = make_projection(xc.dim + xt.dim, out_dim, rng, "proj." + tn);
      } else {
        fm.proj_a_[tn] = make_projection(xc.dim, out_dim, rng, "proj_c." + tn);
        fm.proj_b_[tn] = make_projection(xt.dim, out_dim, rng, "proj_t." + tn);
        if (mode == CombineMode::WAddition)
          fm.alpha_[tn] = make_param(1, 1, {strategy.alpha_init}, "alpha." + tn);
      }
    }
    if (mode == CombineMode::NeuralCombinator)
      fm.nc_ = make_combinator(out_dim, out_dim, rng, "combinator");
    return fm;
  }

  // per-type x0 of width out_dim
  std::map<std::string, Tensor> forward(Tape& tp) const {
    std::map<std::string, Tensor> out;
    if (!is_combining(strategy_.tag)) {
      for (const auto& [tn, base] : base_a_) out[tn] = proj_a_.at(tn).apply(tp, base);
      return out;
    }
    CombineMode mode = combine_mode(strategy_.tag);
    for (const auto& [tn, xc] : base_a_) {
      const Tensor& xt = base_b_.at(tn);
      if (mode == CombineMode::Concat) {
        out[tn] = proj_a_.at(tn).apply(tp, tp.concat_cols(xc, xt));
        continue;
      }
      Tensor pa = proj_a_.at(tn).apply(tp, xc);
      Tensor pb = proj_b_.at(tn).apply(tp, xt);
      CombineParams params;
      if (mode == CombineMode::WAddition) params.alpha = alpha_.at(tn);
      if (mode == CombineMode::NeuralCombinator) params.nc = &*nc_;
      out[tn] = combine(tp, pa, pb, mode, params);
    }
    return out;
  }

  std::vector<Tensor> params() const {
    std::vector<Tensor> out;
    for (const auto& [tn, p] : proj_a_) {
      out.push_back(p.W);
      out.push_back(p.b);
    }
    for (const auto& [tn, p] : proj_b_) {
      out.push_back(p.W);
      out.push_back(p.b);
    }
    for (const auto& [tn, a] : alpha_) out.push_back(a);
    if (nc_) {
      out.push_back(nc_->W);
      out.push_back(nc_->c);
    }
    return out;
  }

  // waddition weights stay in [0,1] after each optimizer step
  void clamp() {
    for (auto& [tn, a] : alpha_) {
      double& v = a.values()[0];
      v = std::min(1.0, std::max(0.0, v));
    }
  }

  double alpha(const std::string& type) const {
    auto it = alpha_.find(type);
    return it == alpha_.end() ? -1.0 : it->second.values()[0];
  }
  int out_dim() const { return out_dim_; }
  const InitStrategy& strategy() const { return strategy_; }

 private:
  InitStrategy strategy_;
  int out_dim_ = 0;
  std::map<std::string, Tensor> base_a_, base_b_;
  std::map<std::string, ProjectionLayer> proj_a_, proj_b_;
  std::map<std::string, Tensor> alpha_;
  std::optional<Combinator> nc_;
};

}  // namespace rdf2rec
