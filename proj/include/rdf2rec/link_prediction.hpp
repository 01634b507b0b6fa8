#pragma once

#include "rdf2rec/encoders.hpp"
#include "rdf2rec/evaluation_metrics.hpp"
#include "rdf2rec/feature_init.hpp"

namespace rdf2rec {

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
  void validate() const {
    if (train <= 0 || val <= 0 || test <= 0)
      throw ConfigError("split ratios must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
      throw ConfigError("split ratios must sum to 1");
  }
};

using Edge = std::pair<int, int>;

// Transductive supervised split of one target edge type. The message graph
// carries all non-target edge types in full, the sup_train portion of the
// target type, and reverse counterparts of exactly those edges.
struct TrainSplit {
  EdgeKey target;
  std::vector<Edge> sup_train, sup_val, sup_test;
  std::vector<Edge> neg_val, neg_test;  // fixed 1:1 negatives
  MessageGraph message;
  int num_target_dst = 0;  // tail candidate count for negative corruption
  std::unordered_set<uint64_t> positive_set;  // all target positives

  static uint64_t code(int s, int d) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(s)) << 32) |
           static_cast<uint32_t>(d);
  }
  bool is_positive(int s, int d) const { return positive_set.count(code(s, d)) > 0; }
};

inline TrainSplit split_edges(const HeteroGraph& g, const EdgeKey& target,
                              SplitRatios ratios, uint64_t seed) {
  ratios.validate();
  auto it = g.edge_types.find(target);
  if (it == g.edge_types.end())
    throw ConfigError("target edge type '" + target.str() + "' does not exist");
  if (it->second.reverse)
    throw ConfigError("target edge type '" + target.str() + "' is a derived reverse type");
  const auto& edges = it->second.edges;
  const int n = static_cast<int>(edges.size());
  if (n < 10)
    throw ConfigError("target edge type '" + target.str() + "' has " + std::to_string(n) +
                      " edges; need at least 10 for a meaningful split");

  TrainSplit split;
  split.target = target;
  split.num_target_dst = static_cast<int>(g.node_types.at(target.dst).members.size());
  for (auto [s, d] : edges) split.positive_set.insert(TrainSplit::code(s, d));

  Rng rng(derive_seed(seed, "edge-split"));
  std::vector<int> order = rng.permutation(n);
  const int n_val = static_cast<int>(std::floor(ratios.val * n));
  const int n_test = static_cast<int>(std::floor(ratios.test * n));
  const int n_train = n - n_val - n_test;  // floor remainder goes to train
  for (int i = 0; i < n; ++i) {
    const Edge& e = edges[order[i]];
    if (i < n_train)
      split.sup_train.push_back(e);
    else if (i < n_train + n_val)
      split.sup_val.push_back(e);
    else
      split.sup_test.push_back(e);
  }

  // fixed evaluation negatives: tail corruption, absent from all positives
  auto draw_negatives = [&](const std::vector<Edge>& positives, std::vector<Edge>& out) {
    for (const Edge& e : positives) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        int tail = rng.uniform_int(split.num_target_dst);
        if (!split.is_positive(e.first, tail)) {
          out.emplace_back(e.first, tail);
          break;
        }
      }
    }
    if (out.size() != positives.size())
      throw DataError("could not draw enough evaluation negatives for '" + target.str() + "'");
  };
  draw_negatives(split.sup_val, split.neg_val);
  draw_negatives(split.sup_test, split.neg_test);

  // message graph: target type reduced to sup_train, its reverse counterpart
  // reduced to the same edges, everything else in full
  split.message = MessageGraph::from_graph(g);
  EdgeKey rev_key{target.dst, reverse_rel_label(target.rel), target.src};
  for (auto& et : split.message.etypes) {
    if (et.key == target) {
      et.src.clear();
      et.dst.clear();
      for (const Edge& e : split.sup_train) {
        et.src.push_back(e.first);
        et.dst.push_back(e.second);
      }
    } else if (et.key == rev_key) {
      et.src.clear();
      et.dst.clear();
      for (const Edge& e : split.sup_train) {
        et.src.push_back(e.second);
        et.dst.push_back(e.first);
      }
    }
  }
  return split;
}

// Decoder and loss (plain forms; the training loop uses the tensor-engine
// equivalents so gradients flow).
inline double dot_score(std::span<const double> hu, std::span<const double> hv) {
  if (hu.size() != hv.size())
    throw ShapeError("dot_score: widths " + std::to_string(hu.size()) + " vs " +
                     std::to_string(hv.size()));
  double s = 0.0;
  for (size_t i = 0; i < hu.size(); ++i) s += hu[i] * hv[i];
  return s;
}

inline double bce_loss(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size())
    throw ShapeError("bce_loss: lengths differ");
  if (scores.empty()) throw ShapeError("bce_loss: empty input");
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    double s = scores[i], y = labels[i];
    total += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
  }
  return total / static_cast<double>(scores.size());
}

struct TrainConfig {
  int epochs = 50;
  double lr = 1e-3;  // Adam
  int negatives = 1;  // per positive, resampled each epoch
  int patience = 10;  // early stopping on validation AUC
  double threshold = 0.5;
  uint64_t seed = 0;

  void validate() const {
    if (epochs < 0 || lr <= 0 || negatives < 1 || patience < 1)
      throw ConfigError("train config values must be positive");
    if (threshold <= 0.0 || threshold >= 1.0)
      throw ConfigError("decision threshold must lie in (0,1)");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
};

// Strategy stage + encoder with one parameter list; holds best-validation
// parameter values after training.
struct RecModel {
  FeatureModel features;
  HeteroEncoder encoder;
  std::vector<Tensor> parameters;

  std::map<std::string, Tensor> forward(Tape& tp, const MessageGraph& g) const {
    auto x0 = features.forward(tp);
    return encoder.forward(tp, g, x0);
  }

  std::vector<std::vector<double>> snapshot() const {
    std::vector<std::vector<double>> out;
    out.reserve(parameters.size());
    for (const auto& p : parameters) out.push_back(p.values());
    return out;
  }
  void restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != parameters.size())
      throw DataError("parameter snapshot does not match model");
    for (size_t i = 0; i < snap.size(); ++i) {
      if (snap[i].size() != parameters[i].size())
        throw DataError("parameter '" + parameters[i].name() + "' has mismatched size");
      parameters[i].values() = snap[i];
    }
  }
};

inline RecModel build_rec_model(const HeteroGraph& g, const MessageGraph& mg,
                                const InitStrategy& strategy, const EncoderConfig& encoder_cfg,
                                uint64_t seed) {
  RecModel model;
  Rng rng(derive_seed(seed, "model-init"));
  model.features = FeatureModel::build(g, strategy, encoder_cfg.hidden_dim, rng);
  model.encoder = HeteroEncoder::init(mg, encoder_cfg, rng);
  model.parameters = model.features.params();
  auto ep = model.encoder.params();
  model.parameters.insert(model.parameters.end(), ep.begin(), ep.end());
  return model;
}

struct TrainResult {
  RecModel model;
  std::vector<EpochRecord> curve;
  double best_val_auc = 0.0;
  int best_epoch = -1;
};

namespace detail {

inline std::vector<double> pair_scores(const std::map<std::string, Tensor>& h,
                                       const EdgeKey& target,
                                       const std::vector<Edge>& pairs) {
  const Tensor& hs = h.at(target.src);
  const Tensor& hd = h.at(target.dst);
  const int w = hs.cols();
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const Edge& e : pairs) {
    std::span<const double> a(hs.values().data() + static_cast<size_t>(e.first) * w, w);
    std::span<const double> b(hd.values().data() + static_cast<size_t>(e.second) * w, w);
    out.push_back(dot_score(a, b));
  }
  return out;
}

}  // namespace detail

// Full-graph training: per epoch, resample 1:1 training negatives, BCE on
// supervision positives+negatives, Adam over every learnable, track the best
// validation AUC and stop on patience.
inline TrainResult train(const HeteroGraph& g, const TrainSplit& split,
                         const InitStrategy& strategy, const EncoderConfig& encoder_cfg,
                         const TrainConfig& cfg) {
  cfg.validate();
  encoder_cfg.validate();
  TrainResult result;
  result.model = build_rec_model(g, split.message, strategy, encoder_cfg, cfg.seed);
  RecModel& model = result.model;

  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  AdamState adam(adam_cfg);
  Rng neg_rng(derive_seed(cfg.seed, "train-negatives"));

  auto best = model.snapshot();
  double best_auc = -1.0;
  int best_epoch = -1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // resampled training negatives, tail corruption against all positives
    std::vector<Edge> pairs = split.sup_train;
    std::vector<double> labels(split.sup_train.size(), 1.0);
    for (const Edge& e : split.sup_train)
      for (int k = 0; k < cfg.negatives; ++k)
        for (int attempt = 0; attempt < 1000; ++attempt) {
          int tail = neg_rng.uniform_int(split.num_target_dst);
          if (!split.is_positive(e.first, tail)) {
            pairs.emplace_back(e.first, tail);
            labels.push_back(0.0);
            break;
          }
        }

    Tape tp;
    auto h = model.forward(tp, split.message);
    const Tensor& hs = h.at(split.target.src);
    const Tensor& hd = h.at(split.target.dst);
    std::vector<int> si, di;
    si.reserve(pairs.size());
    di.reserve(pairs.size());
    for (const Edge& e : pairs) {
      si.push_back(e.first);
      di.push_back(e.second);
    }
    Tensor scores = tp.rowsum(tp.multiply(tp.gather_rows(hs, si), tp.gather_rows(hd, di)));
    Tensor loss = tp.bce_with_logits(scores,
                                     make_const(static_cast<int>(labels.size()), 1, labels));
    double train_loss = loss.scalar();
    if (!std::isfinite(train_loss))
      throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));

    // validation AUC of the parameters that produced this forward
    std::vector<double> probs = detail::pair_scores(h, split.target, split.sup_val);
    auto negs = detail::pair_scores(h, split.target, split.neg_val);
    probs.insert(probs.end(), negs.begin(), negs.end());
    for (double& p : probs) p = Tape::stable_sigmoid(p);
    std::vector<double> vl(split.sup_val.size(), 1.0);
    vl.insert(vl.end(), split.neg_val.size(), 0.0);
    double val_auc = compute_auc(probs, vl);

    result.curve.push_back({epoch, train_loss, val_auc});
    if (val_auc > best_auc) {
      best_auc = val_auc;
      best_epoch = epoch;
      best = model.snapshot();
    }

    zero_grad(model.parameters);
    tp.backward(loss);
    adam.step(model.parameters);
    model.features.clamp();
    tp.clear();

    if (epoch - best_epoch >= cfg.patience) break;
  }

  if (best_epoch >= 0) model.restore(best);
  result.best_val_auc = best_auc;
  result.best_epoch = best_epoch;
  return result;
}

// sigmoid(dot) per pair using the trained parameters; deterministic.
inline std::vector<double> predict(const RecModel& model, const MessageGraph& mg,
                                   const EdgeKey& target, const std::vector<Edge>& pairs) {
  Tape tp;
  auto h = model.forward(tp, mg);
  std::vector<double> out = detail::pair_scores(h, target, pairs);
  for (double& p : out) p = Tape::stable_sigmoid(p);
  return out;
}

// Node-id pairs resolved through the graph's locator; unknown ids are named.
inline std::vector<double> predict_iris(
    const RecModel& model, const HeteroGraph& g, const MessageGraph& mg, const EdgeKey& target,
    const std::vector<std::pair<std::string, std::string>>& iri_pairs) {
  std::vector<Edge> pairs;
  for (const auto& [u, v] : iri_pairs) {
    auto ui = g.node_locator.find(u);
    auto vi = g.node_locator.find(v);
    if (ui == g.node_locator.end()) throw DataError("unknown node '" + u + "'");
    if (vi == g.node_locator.end()) throw DataError("unknown node '" + v + "'");
    if (ui->second.first != target.src)
      throw DataError("node '" + u + "' has type " + ui->second.first + ", expected " +
                      target.src);
    if (vi->second.first != target.dst)
      throw DataError("node '" + v + "' has type " + vi->second.first + ", expected " +
                      target.dst);
    pairs.emplace_back(ui->second.second, vi->second.second);
  }
  return predict(model, mg, target, pairs);
}

}  // namespace rdf2rec
