#pragma once

#include "rdf2rec/hetero_graph.hpp"
#include "rdf2rec/tensor.hpp"

namespace rdf2rec {

enum class KgeVariant { TransE, DistMult, ComplEx, RotatE };

inline const char* to_string(KgeVariant v) {
  switch (v) {
    case KgeVariant::TransE: return "transe";
    case KgeVariant::DistMult: return "distmult";
    case KgeVariant::ComplEx: return "complex";
    case KgeVariant::RotatE: return "rotate";
  }
  return "?";
}

inline KgeVariant kge_variant_from_string(std::string_view s) {
  if (s == "transe") return KgeVariant::TransE;
  if (s == "distmult") return KgeVariant::DistMult;
  if (s == "complex") return KgeVariant::ComplEx;
  if (s == "rotate") return KgeVariant::RotatE;
  throw ConfigError("unknown KGE model '" + std::string(s) +
                    "' (expected transe|distmult|complex|rotate)");
}

struct KgeTrainConfig {
  int d = 64;
  int epochs = 100;
  double lr = 0.01;
  int negatives = 1;     // per positive
  double margin = 1.0;   // for margin-ranking variants
  uint64_t seed = 0;

  void validate() const {
    if (d < 1 || epochs < 0 || lr <= 0 || negatives < 1 || margin <= 0)
      throw ConfigError("KGE config values must be positive");
  }
};

struct KgeModel {
  KgeVariant variant = KgeVariant::TransE;
  int d = 0;
  uint64_t seed = 0;

  // entity ids are laid out per node type, types in sorted order
  std::vector<std::string> types;
  std::vector<int> type_offset;  // size types+1
  std::vector<EdgeKey> relation_keys;  // non-reverse edge types, sorted

  std::vector<double> entity;    // num_entities x entity_width, row-major
  std::vector<double> relation;  // num_relations x relation_width

  bool complex_entities() const {
    return variant == KgeVariant::ComplEx || variant == KgeVariant::RotatE;
  }
  int entity_width() const { return complex_entities() ? 2 * d : d; }
  int relation_width() const { return variant == KgeVariant::ComplEx ? 2 * d : d; }
  int num_entities() const { return type_offset.empty() ? 0 : type_offset.back(); }
  int num_relations() const { return static_cast<int>(relation_keys.size()); }

  int type_index(const std::string& type) const {
    for (size_t i = 0; i < types.size(); ++i)
      if (types[i] == type) return static_cast<int>(i);
    throw DataError("unknown node type '" + type + "' in KGE model");
  }
  int entity_id(const std::string& type, int member) const {
    return type_offset[type_index(type)] + member;
  }
  int relation_id(const EdgeKey& key) const {
    for (size_t i = 0; i < relation_keys.size(); ++i)
      if (relation_keys[i] == key) return static_cast<int>(i);
    throw DataError("unknown relation '" + key.str() + "' in KGE model");
  }
  const double* entity_row(int id) const { return entity.data() + static_cast<size_t>(id) * entity_width(); }
  const double* relation_row(int id) const { return relation.data() + static_cast<size_t>(id) * relation_width(); }
};

// Standard scoring functions of the four models; higher = more plausible.
inline double score_triple(const KgeModel& m, int h, int r, int t) {
  const double* hv = m.entity_row(h);
  const double* tv = m.entity_row(t);
  const double* rv = m.relation_row(r);
  const int d = m.d;
  switch (m.variant) {
    case KgeVariant::TransE: {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double diff = hv[i] + rv[i] - tv[i];
        s += diff * diff;
      }
      return -std::sqrt(s);
    }
    case KgeVariant::DistMult: {
      // (h*t)*r keeps score(h,r,t) == score(t,r,h) exact in floating point
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += (hv[i] * tv[i]) * rv[i];
      return s;
    }
    case KgeVariant::ComplEx: {
      // Re(sum h * r * conj(t)); rows store [re | im]
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double a = hv[i], b = hv[d + i];
        double c = rv[i], dd = rv[d + i];
        double e = tv[i], f = tv[d + i];
        s += e * (a * c - b * dd) + f * (a * dd + b * c);
      }
      return s;
    }
    case KgeVariant::RotatE: {
      // -|| h o e^{i theta} - t ||, phases in the relation row
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double cs = std::cos(rv[i]), sn = std::sin(rv[i]);
        double ure = hv[i] * cs - hv[d + i] * sn;
        double uim = hv[i] * sn + hv[d + i] * cs;
        double dre = ure - tv[i], dim = uim - tv[d + i];
        s += dre * dre + dim * dim;
      }
      return -std::sqrt(s);
    }
  }
  return 0.0;
}

// Training-side view of the graph: asserted (non-reverse) edges only.
struct KgeTriples {
  struct Relation {
    EdgeKey key;
    int head_offset = 0, head_count = 0;
    int tail_offset = 0, tail_count = 0;
  };
  std::vector<Relation> relations;
  std::vector<std::array<int, 3>> triples;  // (h, rel index, t) with global entity ids
  std::vector<std::unordered_set<uint64_t>> positives;  // per relation

  static uint64_t code(int h, int t) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(h)) << 32) |
           static_cast<uint32_t>(t);
  }
  bool is_positive(int h, int r, int t) const { return positives[r].count(code(h, t)) > 0; }
};

inline KgeModel make_kge_skeleton(const HeteroGraph& g, KgeVariant variant,
                                  const KgeTrainConfig& cfg) {
  KgeModel m;
  m.variant = variant;
  m.d = cfg.d;
  m.seed = cfg.seed;
  int off = 0;
  m.type_offset.push_back(0);
  for (const auto& [tn, nt] : g.node_types) {
    m.types.push_back(tn);
    off += static_cast<int>(nt.members.size());
    m.type_offset.push_back(off);
  }
  for (const auto& [key, et] : g.edge_types)
    if (!et.reverse) m.relation_keys.push_back(key);
  return m;
}

inline KgeTriples collect_kge_triples(const HeteroGraph& g, const KgeModel& m) {
  KgeTriples out;
  out.positives.resize(m.relation_keys.size());
  for (size_t r = 0; r < m.relation_keys.size(); ++r) {
    const EdgeKey& key = m.relation_keys[r];
    const EdgeTypeSchema& et = g.edge_types.at(key);
    KgeTriples::Relation rel;
    rel.key = key;
    int hi = m.type_index(key.src), ti = m.type_index(key.dst);
    rel.head_offset = m.type_offset[hi];
    rel.head_count = m.type_offset[hi + 1] - m.type_offset[hi];
    rel.tail_offset = m.type_offset[ti];
    rel.tail_count = m.type_offset[ti + 1] - m.type_offset[ti];
    out.relations.push_back(rel);
    for (auto [s, d] : et.edges) {
      int h = rel.head_offset + s, t = rel.tail_offset + d;
      out.triples.push_back({h, static_cast<int>(r), t});
      out.positives[r].insert(KgeTriples::code(h, t));
    }
  }
  return out;
}

struct NegativeSample {
  std::array<int, 3> triple;
  bool false_negative_possible = false;
};

// Type-respecting corruption: half the draws replace the head, half the
// tail; resampled while the corruption is a known positive (max 100 tries).
inline NegativeSample negative_sample(const KgeTriples& ctx, const std::array<int, 3>& pos,
                                      Rng& rng) {
  const auto& rel = ctx.relations[pos[1]];
  std::array<int, 3> cand = pos;
  for (int attempt = 0; attempt < 100; ++attempt) {
    bool corrupt_head = rng.coin();
    if (corrupt_head && rel.head_count <= 1) corrupt_head = false;
    if (!corrupt_head && rel.tail_count <= 1) {
      if (rel.head_count <= 1) return {pos, true};  // corruption impossible
      corrupt_head = true;
    }
    cand = pos;
    if (corrupt_head)
      cand[0] = rel.head_offset + rng.uniform_int(rel.head_count);
    else
      cand[2] = rel.tail_offset + rng.uniform_int(rel.tail_count);
    if (!ctx.is_positive(cand[0], cand[1], cand[2])) return {cand, false};
  }
  return {cand, true};
}

namespace detail {

// Engine-built scores on 1 x width rows; gradients flow back to the given
// row tensors.
inline Tensor kge_score(Tape& tp, KgeVariant variant, int d, const Tensor& h,
                        const Tensor& r, const Tensor& t) {
  switch (variant) {
    case KgeVariant::TransE:
      return tp.scale(tp.l2_norm_rows(tp.sub(tp.add(h, r), t)), -1.0);
    case KgeVariant::DistMult:
      return tp.rowsum(tp.multiply(tp.multiply(h, r), t));
    case KgeVariant::ComplEx: {
      Tensor a = tp.slice_cols(h, 0, d), b = tp.slice_cols(h, d, 2 * d);
      Tensor c = tp.slice_cols(r, 0, d), dd = tp.slice_cols(r, d, 2 * d);
      Tensor e = tp.slice_cols(t, 0, d), f = tp.slice_cols(t, d, 2 * d);
      Tensor re = tp.sub(tp.multiply(a, c), tp.multiply(b, dd));
      Tensor im = tp.add(tp.multiply(a, dd), tp.multiply(b, c));
      return tp.rowsum(tp.add(tp.multiply(re, e), tp.multiply(im, f)));
    }
    case KgeVariant::RotatE: {
      Tensor hre = tp.slice_cols(h, 0, d), him = tp.slice_cols(h, d, 2 * d);
      Tensor tre = tp.slice_cols(t, 0, d), tim = tp.slice_cols(t, d, 2 * d);
      Tensor cs = tp.cos_elem(r), sn = tp.sin_elem(r);
      Tensor ure = tp.sub(tp.multiply(hre, cs), tp.multiply(him, sn));
      Tensor uim = tp.add(tp.multiply(hre, sn), tp.multiply(him, cs));
      Tensor diff = tp.concat_cols(tp.sub(ure, tre), tp.sub(uim, tim));
      return tp.scale(tp.l2_norm_rows(diff), -1.0);
    }
  }
  throw ConfigError("unhandled KGE variant");
}

inline bool margin_based(KgeVariant v) {
  return v == KgeVariant::TransE || v == KgeVariant::RotatE;
}

// Pairwise loss: margin ranking for TransE/RotatE, softplus logistic for
// DistMult/ComplEx.
inline Tensor kge_pair_loss(Tape& tp, KgeVariant variant, double margin,
                            const Tensor& pos_score, const Tensor& neg_score) {
  if (margin_based(variant)) {
    Tensor gamma = make_const(1, 1, {margin});
    return tp.relu(tp.add(tp.sub(gamma, pos_score), neg_score));
  }
  return tp.add(tp.softplus(tp.scale(pos_score, -1.0)), tp.softplus(neg_score));
}

}  // namespace detail

struct KgeResult {
  KgeModel model;
  std::map<std::string, FeatureTable> x_t;  // per-type topology features
};

inline std::map<std::string, FeatureTable> kge_feature_tables(const KgeModel& m) {
  std::map<std::string, FeatureTable> out;
  const int w = m.entity_width();
  for (size_t ti = 0; ti < m.types.size(); ++ti) {
    int begin = m.type_offset[ti], end = m.type_offset[ti + 1];
    FeatureTable ft;
    ft.rows = end - begin;
    ft.dim = w;
    ft.provenance = Provenance::Topology;
    ft.values.assign(m.entity.begin() + static_cast<size_t>(begin) * w,
                     m.entity.begin() + static_cast<size_t>(end) * w);
    ft.column_spec.push_back({std::string("kge:") + to_string(m.variant),
                              LiteralKind::Numeric, w, false});
    ft.validate("topology features of " + m.types[ti]);
    out[m.types[ti]] = std::move(ft);
  }
  return out;
}

// Stochastic gradient descent over asserted edges with per-epoch shuffling;
// reverse edge types are derived, not asserted, and are excluded.
inline KgeResult train_kge(const HeteroGraph& g, KgeVariant variant,
                           const KgeTrainConfig& cfg) {
  cfg.validate();
  if (g.num_edges() == 0) throw DataError("KGE training needs at least one edge");
  KgeModel m = make_kge_skeleton(g, variant, cfg);
  KgeTriples ctx = collect_kge_triples(g, m);
  if (ctx.triples.empty()) throw DataError("KGE training needs at least one asserted edge");

  Rng rng(derive_seed(cfg.seed, "kge-init"));
  const int ew = m.entity_width(), rw = m.relation_width();
  const double limit = 6.0 / std::sqrt(static_cast<double>(cfg.d));
  m.entity.resize(static_cast<size_t>(m.num_entities()) * ew);
  for (double& x : m.entity) x = rng.uniform(-limit, limit);
  m.relation.resize(static_cast<size_t>(m.num_relations()) * rw);
  if (variant == KgeVariant::RotatE) {
    constexpr double pi = 3.14159265358979323846;
    for (double& x : m.relation) x = rng.uniform(-pi, pi);
  } else {
    for (double& x : m.relation) x = rng.uniform(-limit, limit);
  }

  auto renormalize_entities = [&]() {
    for (int e = 0; e < m.num_entities(); ++e) {
      double* row = m.entity.data() + static_cast<size_t>(e) * ew;
      double norm = 0.0;
      for (int i = 0; i < ew; ++i) norm += row[i] * row[i];
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (int i = 0; i < ew; ++i) row[i] /= norm;
    }
  };

  Rng sampler(derive_seed(cfg.seed, "kge-sample"));
  std::vector<int> order(ctx.triples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    sampler.shuffle(order);
    for (int idx : order) {
      const auto& pos = ctx.triples[idx];
      for (int k = 0; k < cfg.negatives; ++k) {
        NegativeSample neg = negative_sample(ctx, pos, sampler);

        // one tiny tape per sample; touched rows become leaf parameters
        std::map<int, Tensor> ent_rows;
        auto ent = [&](int id) -> Tensor {
          auto it = ent_rows.find(id);
          if (it != ent_rows.end()) return it->second;
          std::vector<double> v(m.entity.begin() + static_cast<size_t>(id) * ew,
                                m.entity.begin() + static_cast<size_t>(id + 1) * ew);
          Tensor t = make_param(1, ew, std::move(v));
          ent_rows.emplace(id, t);
          return t;
        };
        std::vector<double> rv(m.relation.begin() + static_cast<size_t>(pos[1]) * rw,
                               m.relation.begin() + static_cast<size_t>(pos[1] + 1) * rw);
        Tensor rel = make_param(1, rw, std::move(rv));

        Tape tp;
        Tensor sp = detail::kge_score(tp, variant, cfg.d, ent(pos[0]), rel, ent(pos[2]));
        Tensor sn = detail::kge_score(tp, variant, cfg.d, ent(neg.triple[0]), rel,
                                      ent(neg.triple[2]));
        Tensor loss = detail::kge_pair_loss(tp, variant, cfg.margin, sp, sn);
        double lv = loss.scalar();
        if (!std::isfinite(lv))
          throw NumericError("non-finite KGE loss at epoch " + std::to_string(epoch) +
                             " (lr " + format_double(cfg.lr, "%g") + ")");
        tp.backward(loss);

        for (auto& [id, t] : ent_rows) {
          const auto& gr = t.grad();
          double* row = m.entity.data() + static_cast<size_t>(id) * ew;
          for (int i = 0; i < ew; ++i) row[i] = t.values()[i] - cfg.lr * gr[i];
        }
        const auto& gr = rel.grad();
        double* row = m.relation.data() + static_cast<size_t>(pos[1]) * rw;
        for (int i = 0; i < rw; ++i) row[i] = rel.values()[i] - cfg.lr * gr[i];
      }
    }
    if (variant == KgeVariant::TransE) renormalize_entities();
  }

  KgeResult out;
  out.x_t = kge_feature_tables(m);
  out.model = std::move(m);
  return out;
}

// Filtered tail-prediction MRR over the given triples: candidates are all
// entities of the relation's tail type, known positives other than the true
// tail removed, ties counted half.
inline double filtered_mrr_tail(const KgeModel& m, const KgeTriples& ctx,
                                const std::vector<std::array<int, 3>>& eval) {
  if (eval.empty()) throw DataError("filtered MRR needs evaluation triples");
  double sum = 0.0;
  for (const auto& [h, r, t] : eval) {
    const auto& rel = ctx.relations[r];
    double true_score = score_triple(m, h, r, t);
    long better = 0, ties = 0;
    for (int c = 0; c < rel.tail_count; ++c) {
      int cand = rel.tail_offset + c;
      if (cand == t || ctx.is_positive(h, r, cand)) continue;
      double s = score_triple(m, h, r, cand);
      if (s > true_score)
        ++better;
      else if (s == true_score)
        ++ties;
    }
    double rank = 1.0 + static_cast<double>(better) + static_cast<double>(ties) / 2.0;
    sum += 1.0 / rank;
  }
  return sum / static_cast<double>(eval.size());
}

}  // namespace rdf2rec
