#pragma once

#include "rdf2rec/link_prediction.hpp"

namespace rdf2rec {

enum class ScenarioMode { Full, Bipartite, Homogeneous };

inline const char* to_string(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::Full: return "full";
    case ScenarioMode::Bipartite: return "bipartite";
    case ScenarioMode::Homogeneous: return "homogeneous";
  }
  return "?";
}

inline ScenarioMode scenario_mode_from_string(std::string_view s) {
  if (s == "full") return ScenarioMode::Full;
  if (s == "bipartite") return ScenarioMode::Bipartite;
  if (s == "homogeneous") return ScenarioMode::Homogeneous;
  throw ConfigError("unknown setting '" + std::string(s) +
                    "' (expected full|bipartite|homogeneous)");
}

struct ScenarioSpec {
  std::string name;
  ScenarioMode mode = ScenarioMode::Full;
  EdgeKey target;
};

// Subgraph per recommendation setting; node sets and feature tables of
// retained types are carried over unchanged (indices stable).
inline HeteroGraph extract_scenario(const HeteroGraph& g, const ScenarioSpec& spec) {
  if (!g.has_edge_type(spec.target))
    throw ConfigError("scenario target '" + spec.target.str() + "' not present in graph");
  if (spec.mode == ScenarioMode::Full) return g;

  std::set<std::string> keep_types;
  if (spec.mode == ScenarioMode::Bipartite) {
    keep_types = {spec.target.src, spec.target.dst};
  } else {
    if (spec.target.src != spec.target.dst)
      throw ConfigError("homogeneous setting needs a self-type target edge, got '" +
                        spec.target.str() + "'");
    keep_types = {spec.target.src};
  }

  HeteroGraph out;
  for (const std::string& tn : keep_types) {
    out.node_types[tn] = g.node_types.at(tn);
    auto ci = g.content_features.find(tn);
    if (ci != g.content_features.end()) out.content_features[tn] = ci->second;
    auto ti = g.topology_features.find(tn);
    if (ti != g.topology_features.end()) out.topology_features[tn] = ti->second;
  }
  EdgeKey rev{spec.target.dst, reverse_rel_label(spec.target.rel), spec.target.src};
  for (const auto& [key, et] : g.edge_types)
    if (key == spec.target || key == rev) out.edge_types[key] = et;
  out.rebuild_locator();
  return out;
}

struct SweepConfig {
  uint64_t master_seed = 0;
  int seeds = 1;  // runs per cell
  SplitRatios ratios;
  TrainConfig train;
  EncoderConfig encoder;  // architecture replaced per cell
};

struct SweepRun {
  uint64_t seed = 0;
  MetricsReport metrics;
  int best_epoch = -1;
};

struct SweepCell {
  ScenarioSpec scenario;
  Arch encoder = Arch::SAGE;
  InitTag strategy = InitTag::one_hot;
  bool feasible = true;
  std::string reason;  // when infeasible
  std::vector<SweepRun> runs;

  double mean_auc() const {
    double s = 0;
    for (const auto& r : runs) s += r.metrics.auc;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }
  double mean_f1() const {
    double s = 0;
    for (const auto& r : runs) s += r.metrics.f1;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }
};

namespace detail {

inline bool graph_has_nld(const HeteroGraph& g) {
  for (const auto& [tn, nt] : g.node_types)
    if (nt.has_nld()) return true;
  return false;
}

inline std::string cell_label(const ScenarioSpec& sc, Arch enc, InitTag st) {
  return sc.name + "|" + to_string(sc.mode) + "|" + to_string(enc) + "|" + to_string(st);
}

}  // namespace detail

// One trained run of a single cell; returns test metrics at the configured
// threshold plus rank AUC.
inline SweepRun run_cell_once(const HeteroGraph& scenario_graph, const ScenarioSpec& spec,
                              Arch encoder, InitTag strategy, const SweepConfig& cfg,
                              uint64_t split_seed, uint64_t model_seed,
                              TrainResult* out_result = nullptr) {
  TrainSplit split = split_edges(scenario_graph, spec.target, cfg.ratios, split_seed);
  EncoderConfig ec = cfg.encoder;
  ec.architecture = encoder;
  ec.seed = model_seed;
  TrainConfig tc = cfg.train;
  tc.seed = model_seed;
  InitStrategy is;
  is.tag = strategy;
  TrainResult tr = train(scenario_graph, split, is, ec, tc);

  std::vector<Edge> pairs = split.sup_test;
  pairs.insert(pairs.end(), split.neg_test.begin(), split.neg_test.end());
  std::vector<double> labels(split.sup_test.size(), 1.0);
  labels.insert(labels.end(), split.neg_test.size(), 0.0);
  std::vector<double> probs = predict(tr.model, split.message, spec.target, pairs);

  SweepRun run;
  run.seed = model_seed;
  run.metrics = compute_threshold_metrics(probs, labels, cfg.train.threshold);
  run.metrics.auc = compute_auc(probs, labels);
  run.best_epoch = tr.best_epoch;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    derive_seed(model_seed, detail::cell_label(spec, encoder, strategy))));
  run.metrics.config_fingerprint = buf;
  if (out_result) *out_result = std::move(tr);
  return run;
}

struct SweepResult {
  std::vector<SweepCell> cells;  // sorted by (scenario, setting, encoder, strategy)

  const SweepCell* find(const std::string& scenario, ScenarioMode mode, Arch enc,
                        InitTag st) const {
    for (const auto& c : cells)
      if (c.scenario.name == scenario && c.scenario.mode == mode && c.encoder == enc &&
          c.strategy == st)
        return &c;
    return nullptr;
  }
};

// One row per (scenario, encoder, strategy, seed); infeasible cells are
// reported in the markdown table and sweep manifest, not the CSV.
inline std::string sweep_csv(const SweepResult& result) {
  std::string out = "scenario,setting,encoder,strategy,seed,f1,precision,recall,auc\n";
  for (const auto& cell : result.cells) {
    if (!cell.feasible) continue;
    for (const auto& run : cell.runs) {
      out += cell.scenario.name;
      out += ',';
      out += to_string(cell.scenario.mode);
      out += ',';
      out += to_string(cell.encoder);
      out += ',';
      out += to_string(cell.strategy);
      out += ',';
      out += std::to_string(run.seed);
      char buf[128];
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f\n", run.metrics.f1,
                    run.metrics.precision, run.metrics.recall, run.metrics.auc);
      out += buf;
    }
  }
  return out;
}

// Markdown table mirroring the paper layout: row blocks per graph setting,
// strategy rows, four-metric column groups per encoder.
inline std::string sweep_markdown(const SweepResult& result,
                                  const std::vector<Arch>& encoders,
                                  const std::vector<InitTag>& strategies) {
  std::string out;
  std::vector<std::pair<std::string, ScenarioMode>> scenarios;
  for (const auto& c : result.cells) {
    std::pair<std::string, ScenarioMode> sc{c.scenario.name, c.scenario.mode};
    if (std::find(scenarios.begin(), scenarios.end(), sc) == scenarios.end())
      scenarios.push_back(sc);
  }
  std::sort(scenarios.begin(), scenarios.end());
  std::string current;
  for (const auto& [name, mode] : scenarios) {
    if (name != current) {
      out += "# Scenario: " + name + "\n\n";
      current = name;
    }
    out += "## Setting: " + std::string(to_string(mode)) + "\n\n";
    out += "| Feature Initialization |";
    for (Arch a : encoders)
      out += std::string(" ") + to_string(a) + " F1 | Pre | Re | AUC |";
    out += "\n|---|";
    for (size_t i = 0; i < encoders.size() * 4; ++i) out += "---|";
    out += "\n";
    for (InitTag st : strategies) {
      out += "| " + std::string(to_string(st)) + " |";
      for (Arch a : encoders) {
        const SweepCell* cell = result.find(name, mode, a, st);
        if (!cell || !cell->feasible || cell->runs.empty()) {
          out += " - | - | - | - |";
          continue;
        }
        double f1 = 0, pre = 0, re = 0, auc = 0;
        for (const auto& r : cell->runs) {
          f1 += r.metrics.f1;
          pre += r.metrics.precision;
          re += r.metrics.recall;
          auc += r.metrics.auc;
        }
        double n = static_cast<double>(cell->runs.size());
        char buf[128];
        std::snprintf(buf, sizeof(buf), " %.3f | %.3f | %.3f | %.3f |", f1 / n, pre / n,
                      re / n, auc / n);
        out += buf;
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

// Sweep over (scenario x encoder x strategy): per-cell seeds derived from the
// master seed; split seeds shared across cells of a scenario so comparisons
// see the same data. Infeasible cells are marked and skipped.
inline SweepResult run_sweep(const HeteroGraph& g, const std::vector<ScenarioSpec>& scenarios,
                             const std::vector<Arch>& encoders,
                             const std::vector<InitTag>& strategies, const SweepConfig& cfg) {
  SweepResult result;
  for (const ScenarioSpec& spec : scenarios) {
    HeteroGraph scenario_graph = extract_scenario(g, spec);
    bool has_nld = detail::graph_has_nld(scenario_graph);
    bool has_topology = !scenario_graph.topology_features.empty();
    for (Arch enc : encoders) {
      for (InitTag st : strategies) {
        SweepCell cell;
        cell.scenario = spec;
        cell.encoder = enc;
        cell.strategy = st;
        if (enc == Arch::HGT && spec.mode == ScenarioMode::Homogeneous) {
          cell.feasible = false;
          cell.reason = "single meta-relation degenerates HGT on homogeneous graphs";
        } else if (st == InitTag::cb_nld && !has_nld) {
          cell.feasible = false;
          cell.reason = "no NLD properties in the scenario graph";
        } else if (needs_topology(st) && !has_topology) {
          throw MissingDependency("strategy " + std::string(to_string(st)) +
                                  " requires topology embeddings; run embed first");
        }
        if (cell.feasible) {
          for (int i = 0; i < cfg.seeds; ++i) {
            uint64_t split_seed = derive_seed(
                cfg.master_seed,
                spec.name + "|" + to_string(spec.mode) + "|split|" + std::to_string(i));
            uint64_t model_seed = derive_seed(
                cfg.master_seed, detail::cell_label(spec, enc, st) + "|" + std::to_string(i));
            cell.runs.push_back(
                run_cell_once(scenario_graph, spec, enc, st, cfg, split_seed, model_seed));
          }
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  std::sort(result.cells.begin(), result.cells.end(), [](const SweepCell& a, const SweepCell& b) {
    auto ka = std::make_tuple(a.scenario.name, std::string(to_string(a.scenario.mode)),
                              std::string(to_string(a.encoder)),
                              std::string(to_string(a.strategy)));
    auto kb = std::make_tuple(b.scenario.name, std::string(to_string(b.scenario.mode)),
                              std::string(to_string(b.encoder)),
                              std::string(to_string(b.strategy)));
    return ka < kb;
  });
  return result;
}

}  // namespace rdf2rec
