#pragma once

#include "rdf2rec/hetero_graph.hpp"
#include "rdf2rec/tensor.hpp"

namespace rdf2rec {

enum class Arch { SAGE, GAT, HGT };

inline const char* to_string(Arch a) {
  switch (a) {
    case Arch::SAGE: return "sage";
    case Arch::GAT: return "gat";
    case Arch::HGT: return "hgt";
  }
  return "?";
}

inline Arch arch_from_string(std::string_view s) {
  if (s == "sage") return Arch::SAGE;
  if (s == "gat") return Arch::GAT;
  if (s == "hgt") return Arch::HGT;
  throw ConfigError("unknown encoder '" + std::string(s) + "' (expected sage|gat|hgt)");
}

enum class SageAggregator { Mean, Pool };

struct EncoderConfig {
  Arch architecture = Arch::SAGE;
  int layers = 2;
  int hidden_dim = 64;
  int heads = 2;
  double leaky_slope = 0.2;
  SageAggregator aggregator = SageAggregator::Mean;
  uint64_t seed = 0;

  void validate() const {
    if (layers < 0 || hidden_dim < 1 || heads < 1)
      throw ConfigError("encoder config values must be positive");
    if ((architecture == Arch::GAT || architecture == Arch::HGT) && hidden_dim % heads != 0)
      throw ConfigError("hidden_dim " + std::to_string(hidden_dim) +
                        " must be divisible by heads " + std::to_string(heads));
  }
};

// Edge arrays the encoder message-passes over. Edge types are kept in sorted
// key order so accumulation order is deterministic.
struct MessageGraph {
  struct EType {
    EdgeKey key;
    std::vector<int> src, dst;
  };
  std::vector<EType> etypes;
  std::map<std::string, int> num_nodes;

  static MessageGraph from_graph(const HeteroGraph& g) {
    MessageGraph mg;
    for (const auto& [tn, nt] : g.node_types)
      mg.num_nodes[tn] = static_cast<int>(nt.members.size());
    for (const auto& [key, et] : g.edge_types) {
      EType e;
      e.key = key;
      e.src.reserve(et.edges.size());
      e.dst.reserve(et.edges.size());
      for (auto [s, d] : et.edges) {
        e.src.push_back(s);
        e.dst.push_back(d);
      }
      mg.etypes.push_back(std::move(e));
    }
    return mg;
  }

  const EType* find(const EdgeKey& key) const {
    for (const auto& e : etypes)
      if (e.key == key) return &e;
    return nullptr;
  }
  EType* find(const EdgeKey& key) {
    for (auto& e : etypes)
      if (e.key == key) return &e;
    return nullptr;
  }
};

namespace detail {

struct SageEdgeParams {
  Tensor W;                 // H x H
  Tensor W_pool, b_pool;    // pool aggregator transform
};
struct SageNodeParams {
  Tensor W_self, b;
};
struct GatEdgeParams {
  std::vector<Tensor> W;      // per head, H x dh
  std::vector<Tensor> a_src;  // per head, dh x 1
  std::vector<Tensor> a_dst;  // per head, dh x 1
};
struct GatNodeParams {
  std::vector<Tensor> W_self;  // per head, H x dh; only for types without a
                               // same-type incoming edge type
};
struct HgtNodeParams {
  std::vector<Tensor> K, bK, Q, bQ, V, bV;  // per head
  Tensor Out, b_out;
};
struct HgtEdgeParams {
  std::vector<Tensor> W_att, W_msg, mu;  // per head
};

}  // namespace detail

// Heterogeneous encoder: homogeneous architectures lifted by per-edge-type
// message functions and per-node-type updates, cross-edge-type sum.
class HeteroEncoder {
 public:
  static HeteroEncoder init(const MessageGraph& g, const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    HeteroEncoder enc;
    enc.cfg_ = cfg;
    const int H = cfg.hidden_dim;
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string lp = "enc.l" + std::to_string(l) + ".";
      const bool final_layer = (l == cfg.layers - 1);
      switch (cfg.architecture) {
        case Arch::SAGE: {
          std::map<EdgeKey, detail::SageEdgeParams> ep;
          for (const auto& et : g.etypes) {
            detail::SageEdgeParams p;
            p.W = glorot_param(H, H, rng, lp + et.key.str() + ".W");
            if (cfg.aggregator == SageAggregator::Pool) {
              p.W_pool = glorot_param(H, H, rng, lp + et.key.str() + ".W_pool");
              p.b_pool = zeros_param(1, H, lp + et.key.str() + ".b_pool");
            }
            ep.emplace(et.key, std::move(p));
          }
          std::map<std::string, detail::SageNodeParams> np;
          for (const auto& [tn, n] : g.num_nodes) {
            detail::SageNodeParams p;
            p.W_self = glorot_param(H, H, rng, lp + tn + ".W_self");
            p.b = zeros_param(1, H, lp + tn + ".b");
            np.emplace(tn, std::move(p));
          }
          enc.sage_edge_.push_back(std::move(ep));
          enc.sage_node_.push_back(std::move(np));
          break;
        }
        case Arch::GAT: {
          const int dh = final_layer ? H : H / cfg.heads;
          std::map<EdgeKey, detail::GatEdgeParams> ep;
          for (const auto& et : g.etypes) {
            detail::GatEdgeParams p;
            for (int h = 0; h < cfg.heads; ++h) {
              std::string hp = lp + et.key.str() + ".h" + std::to_string(h);
              p.W.push_back(glorot_param(H, dh, rng, hp + ".W"));
              p.a_src.push_back(glorot_param(dh, 1, rng, hp + ".a_src"));
              p.a_dst.push_back(glorot_param(dh, 1, rng, hp + ".a_dst"));
            }
            ep.emplace(et.key, std::move(p));
          }
          std::map<std::string, detail::GatNodeParams> np;
          for (const auto& [tn, n] : g.num_nodes) {
            if (has_self_loop_etype(g, tn)) continue;
            detail::GatNodeParams p;
            for (int h = 0; h < cfg.heads; ++h)
              p.W_self.push_back(
                  glorot_param(H, dh, rng, lp + tn + ".h" + std::to_string(h) + ".W_self"));
            np.emplace(tn, std::move(p));
          }
          enc.gat_edge_.push_back(std::move(ep));
          enc.gat_node_.push_back(std::move(np));
          break;
        }
        case Arch::HGT: {
          const int dh = H / cfg.heads;
          std::map<std::string, detail::HgtNodeParams> np;
          for (const auto& [tn, n] : g.num_nodes) {
            detail::HgtNodeParams p;
            for (int h = 0; h < cfg.heads; ++h) {
              std::string hp = lp + tn + ".h" + std::to_string(h);
              p.K.push_back(glorot_param(H, dh, rng, hp + ".K"));
              p.bK.push_back(zeros_param(1, dh, hp + ".bK"));
              p.Q.push_back(glorot_param(H, dh, rng, hp + ".Q"));
              p.bQ.push_back(zeros_param(1, dh, hp + ".bQ"));
              p.V.push_back(glorot_param(H, dh, rng, hp + ".V"));
              p.bV.push_back(zeros_param(1, dh, hp + ".bV"));
            }
            p.Out = glorot_param(H, H, rng, lp + tn + ".Out");
            p.b_out = zeros_param(1, H, lp + tn + ".b_out");
            np.emplace(tn, std::move(p));
          }
          std::map<EdgeKey, detail::HgtEdgeParams> ep;
          for (const auto& et : g.etypes) {
            detail::HgtEdgeParams p;
            for (int h = 0; h < cfg.heads; ++h) {
              std::string hp = lp + et.key.str() + ".h" + std::to_string(h);
              p.W_att.push_back(glorot_param(dh, dh, rng, hp + ".W_att"));
              p.W_msg.push_back(glorot_param(dh, dh, rng, hp + ".W_msg"));
              p.mu.push_back(make_param(1, 1, {1.0}, hp + ".mu"));  // prior, starts at 1
            }
            ep.emplace(et.key, std::move(p));
          }
          enc.hgt_node_.push_back(std::move(np));
          enc.hgt_edge_.push_back(std::move(ep));
          break;
        }
      }
    }
    return enc;
  }

  // h_v = GNN(x_v); output width hidden_dim for every node type.
  std::map<std::string, Tensor> forward(Tape& tp, const MessageGraph& g,
                                        const std::map<std::string, Tensor>& x0) const {
    std::map<std::string, Tensor> x = x0;
    for (int l = 0; l < cfg_.layers; ++l) {
      switch (cfg_.architecture) {
        case Arch::SAGE: x = sage_layer(tp, g, x, l); break;
        case Arch::GAT: x = gat_layer(tp, g, x, l); break;
        case Arch::HGT: x = hgt_layer(tp, g, x, l); break;
      }
    }
    return x;
  }

  std::vector<Tensor> params() const {
    std::vector<Tensor> out;
    for (const auto& layer : sage_edge_)
      for (const auto& [k, p] : layer) {
        out.push_back(p.W);
        if (p.W_pool.valid()) {
          out.push_back(p.W_pool);
          out.push_back(p.b_pool);
        }
      }
    for (const auto& layer : sage_node_)
      for (const auto& [k, p] : layer) {
        out.push_back(p.W_self);
        out.push_back(p.b);
      }
    for (const auto& layer : gat_edge_)
      for (const auto& [k, p] : layer)
        for (int h = 0; h < static_cast<int>(p.W.size()); ++h) {
          out.push_back(p.W[h]);
          out.push_back(p.a_src[h]);
          out.push_back(p.a_dst[h]);
        }
    for (const auto& layer : gat_node_)
      for (const auto& [k, p] : layer)
        for (const auto& w : p.W_self) out.push_back(w);
    for (const auto& layer : hgt_node_)
      for (const auto& [k, p] : layer) {
        for (int h = 0; h < static_cast<int>(p.K.size()); ++h) {
          out.push_back(p.K[h]);
          out.push_back(p.bK[h]);
          out.push_back(p.Q[h]);
          out.push_back(p.bQ[h]);
          out.push_back(p.V[h]);
          out.push_back(p.bV[h]);
        }
        out.push_back(p.Out);
        out.push_back(p.b_out);
      }
    for (const auto& layer : hgt_edge_)
      for (const auto& [k, p] : layer)
        for (int h = 0; h < static_cast<int>(p.W_att.size()); ++h) {
          out.push_back(p.W_att[h]);
          out.push_back(p.W_msg[h]);
          out.push_back(p.mu[h]);
        }
    return out;
  }

  const EncoderConfig& config() const { return cfg_; }

  static bool has_self_loop_etype(const MessageGraph& g, const std::string& type) {
    for (const auto& et : g.etypes)
      if (et.key.dst == type && et.key.src == type) return true;
    return false;
  }

 private:
  // GraphSAGE with full-neighborhood aggregation:
  // h_B = sigma(W_self x_B + sum_r W_r m_r + b)
  std::map<std::string, Tensor> sage_layer(Tape& tp, const MessageGraph& g,
                                           const std::map<std::string, Tensor>& x,
                                           int l) const {
    const bool final_layer = (l == cfg_.layers - 1);
    std::map<std::string, Tensor> out;
    for (const auto& [tn, xB] : x) {
      const auto& np = sage_node_[l].at(tn);
      Tensor acc = tp.add(tp.matmul(xB, np.W_self), np.b);
      const int nB = g.num_nodes.at(tn);
      for (const auto& et : g.etypes) {
        if (et.key.dst != tn || et.src.empty()) continue;
        const auto& ep = sage_edge_[l].at(et.key);
        Tensor gathered = tp.gather_rows(x.at(et.key.src), et.src);
        Tensor m;
        if (cfg_.aggregator == SageAggregator::Mean) {
          m = tp.mean_segments(gathered, et.dst, nB);
        } else {
          Tensor transformed = tp.relu(tp.add(tp.matmul(gathered, ep.W_pool), ep.b_pool));
          m = tp.max_segments(transformed, et.dst, nB);
        }
        acc = tp.add(acc, tp.matmul(m, ep.W));
      }
      out[tn] = final_layer ? acc : tp.relu(acc);
    }
    return out;
  }

  // GAT lifted per edge type: masked attention softmax-normalized per
  // destination within each edge type; self-loops inside same-type edge
  // types, W_self x_v otherwise. Heads concatenate on hidden layers and
  // average on the final one; hidden layers use ELU.
  std::map<std::string, Tensor> gat_layer(Tape& tp, const MessageGraph& g,
                                          const std::map<std::string, Tensor>& x,
                                          int l) const {
    const bool final_layer = (l == cfg_.layers - 1);
    std::map<std::string, Tensor> out;
    for (const auto& [tn, xB] : x) {
      const int nB = g.num_nodes.at(tn);
      std::vector<Tensor> heads;
      for (int h = 0; h < cfg_.heads; ++h) {
        Tensor head_acc;
        for (const auto& et : g.etypes) {
          if (et.key.dst != tn) continue;
          bool self_loops = (et.key.src == et.key.dst);
          if (et.src.empty() && !self_loops) continue;
          std::vector<int> src = et.src, dst = et.dst;
          if (self_loops)
            for (int v = 0; v < nB; ++v) {
              src.push_back(v);
              dst.push_back(v);
            }
          const auto& ep = gat_edge_[l].at(et.key);
          Tensor WxA = tp.matmul(x.at(et.key.src), ep.W[h]);
          Tensor WxB = self_loops ? WxA : tp.matmul(xB, ep.W[h]);
          Tensor s_src = tp.matmul(WxA, ep.a_src[h]);  // nA x 1
          Tensor s_dst = tp.matmul(WxB, ep.a_dst[h]);  // nB x 1
          Tensor e = tp.leaky_relu(
              tp.add(tp.gather_rows(s_src, src), tp.gather_rows(s_dst, dst)),
              cfg_.leaky_slope);
          Tensor attn = tp.softmax_segments(e, dst, nB);
          Tensor msgs = tp.multiply(tp.gather_rows(WxA, src), attn);
          Tensor agg = tp.scatter_add_rows(msgs, dst, nB);
          head_acc = head_acc.valid() ? tp.add(head_acc, agg) : agg;
        }
        auto self_it = gat_node_[l].find(tn);
        if (self_it != gat_node_[l].end()) {
          Tensor self_term = tp.matmul(xB, self_it->second.W_self[h]);
          head_acc = head_acc.valid() ? tp.add(head_acc, self_term) : self_term;
        }
        if (!head_acc.valid())
          head_acc = make_zeros(nB, final_layer ? cfg_.hidden_dim
                                                : cfg_.hidden_dim / cfg_.heads);
        heads.push_back(head_acc);
      }
      Tensor combined;
      if (final_layer) {
        combined = heads[0];
        for (int h = 1; h < cfg_.heads; ++h) combined = tp.add(combined, heads[h]);
        combined = tp.scale(combined, 1.0 / cfg_.heads);
      } else {
        combined = heads[0];
        for (int h = 1; h < cfg_.heads; ++h) combined = tp.concat_cols(combined, heads[h]);
        combined = tp.elu(combined);
      }
      out[tn] = combined;
    }
    return out;
  }

  // HGT: meta-relation attention with type-specific K/Q/V maps, joint softmax
  // across all in-edges of a destination, identity residual. K/Q/V
  // projections are computed once per (type, head) and shared across the
  // edge types touching that type.
  std::map<std::string, Tensor> hgt_layer(Tape& tp, const MessageGraph& g,
                                          const std::map<std::string, Tensor>& x,
                                          int l) const {
    const int H = cfg_.hidden_dim;
    const int dh = H / cfg_.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::map<std::string, std::vector<Tensor>> k_cache, v_cache, q_cache;
    for (const auto& [tn, xT] : x) {
      const auto& np = hgt_node_[l].at(tn);
      auto& kc = k_cache[tn];
      auto& vc = v_cache[tn];
      auto& qc = q_cache[tn];
      for (int h = 0; h < cfg_.heads; ++h) {
        kc.push_back(tp.add(tp.matmul(xT, np.K[h]), np.bK[h]));
        vc.push_back(tp.add(tp.matmul(xT, np.V[h]), np.bV[h]));
        qc.push_back(tp.add(tp.matmul(xT, np.Q[h]), np.bQ[h]));
      }
    }
    std::map<std::string, Tensor> out;
    for (const auto& [tn, xB] : x) {
      const int nB = g.num_nodes.at(tn);
      const auto& np = hgt_node_[l].at(tn);
      std::vector<const MessageGraph::EType*> in_types;
      for (const auto& et : g.etypes)
        if (et.key.dst == tn && !et.src.empty()) in_types.push_back(&et);

      Tensor agg_heads;
      for (int h = 0; h < cfg_.heads; ++h) {
        // W_att / W_msg are applied at node level before gathering edge rows;
        // right-multiplication commutes with the gather
        Tensor logits;
        std::vector<Tensor> etype_msgs;
        std::vector<int> all_dst;
        const Tensor& q_all = q_cache.at(tn)[h];  // nB x dh
        for (const auto* et : in_types) {
          const auto& ep = hgt_edge_[l].at(et->key);
          Tensor kw = tp.matmul(k_cache.at(et->key.src)[h], ep.W_att[h]);
          Tensor lg = tp.rowsum(
              tp.multiply(tp.gather_rows(kw, et->src), tp.gather_rows(q_all, et->dst)));
          lg = tp.scale(tp.multiply(lg, ep.mu[h]), inv_sqrt);
          Tensor vw = tp.matmul(v_cache.at(et->key.src)[h], ep.W_msg[h]);
          etype_msgs.push_back(tp.gather_rows(vw, et->src));
          logits = logits.valid() ? tp.concat_rows(logits, lg) : lg;
          all_dst.insert(all_dst.end(), et->dst.begin(), et->dst.end());
        }
        Tensor agg;
        if (logits.valid()) {
          Tensor attn = tp.softmax_segments(logits, all_dst, nB);  // joint across types
          int offset = 0;
          for (size_t i = 0; i < in_types.size(); ++i) {
            const int m = static_cast<int>(in_types[i]->dst.size());
            Tensor weighted =
                tp.multiply(etype_msgs[i], tp.slice_rows(attn, offset, offset + m));
            Tensor part = tp.scatter_add_rows(weighted, in_types[i]->dst, nB);
            agg = agg.valid() ? tp.add(agg, part) : part;
            offset += m;
          }
        } else {
          agg = make_zeros(nB, dh);
        }
        agg_heads = agg_heads.valid() ? tp.concat_cols(agg_heads, agg) : agg;
      }
      out[tn] = tp.add(tp.add(tp.matmul(agg_heads, np.Out), np.b_out), xB);
    }
    return out;
  }

  EncoderConfig cfg_;
  std::vector<std::map<EdgeKey, detail::SageEdgeParams>> sage_edge_;
  std::vector<std::map<std::string, detail::SageNodeParams>> sage_node_;
  std::vector<std::map<EdgeKey, detail::GatEdgeParams>> gat_edge_;
  std::vector<std::map<std::string, detail::GatNodeParams>> gat_node_;
  std::vector<std::map<std::string, detail::HgtNodeParams>> hgt_node_;
  std::vector<std::map<EdgeKey, detail::HgtEdgeParams>> hgt_edge_;
};

}  // namespace rdf2rec
