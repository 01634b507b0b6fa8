#pragma once

#include <cstdlib>
#include <iostream>

#include "rdf2rec/config.hpp"
#include "rdf2rec/dataset_io.hpp"
#include "rdf2rec/synthetic.hpp"

namespace rdf2rec {

struct EmptyResult : std::runtime_error { using std::runtime_error::runtime_error; };

// Exit-code contract: 0 success, 2 input/parse, 3 empty result, 4 malformed
// dataset, 5 missing dependency.
enum ExitCode {
  kOk = 0,
  kInputError = 2,
  kEmptyResult = 3,
  kMalformedDataset = 4,
  kMissingDependency = 5,
};

template <typename F>
int run_command(F&& body, std::ostream& err = std::cerr) {
  try {
    body();
    return kOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const EmptyResult& e) {
    err << "error: " << e.what() << "\n";
    return kEmptyResult;
  } catch (const MissingDependency& e) {
    err << "error: " << e.what() << "\n";
    return kMissingDependency;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kMalformedDataset;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// RDF2REC_SEED provides the master-seed default for every command.
inline uint64_t default_master_seed() {
  const char* env = std::getenv("RDF2REC_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw ConfigError("RDF2REC_SEED must be an unsigned integer, got '" + std::string(env) +
                      "'");
  return static_cast<uint64_t>(v);
}

// --- generate ----------------------------------------------------------------

struct GenerateOptions {
  std::string profile = "scholarly";
  uint64_t seed = 0;
  fs::path out;
};

inline void cmd_generate(const GenerateOptions& opt) {
  SyntheticResult result = generate_synthetic(opt.profile, opt.seed);
  if (!opt.out.parent_path().empty()) fs::create_directories(opt.out.parent_path());
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + opt.out.string());
  serialize_ntriples(result.store, out);
  out.close();
  detail::write_file(fs::path(opt.out.string() + ".communities.tsv"),
                     result.communities_tsv());
  json manifest = {{"command", "generate"},
                   {"profile", opt.profile},
                   {"seed", opt.seed},
                   {"output", opt.out.string()},
                   {"triples", result.store.size()},
                   {"communities_sidecar", opt.out.string() + ".communities.tsv"}};
  detail::write_file(fs::path(opt.out.string() + ".manifest.json"), manifest.dump(2) + "\n");
}

// --- convert -------------------------------------------------------------------

struct ConvertOptions {
  fs::path input;
  fs::path out_dir;
  bool strict = true;
  fs::path text_embeddings;  // optional external text-vector TSV
  RunConfig config;
};

inline void cmd_convert(const ConvertOptions& opt) {
  std::ifstream in(opt.input, std::ios::binary);
  if (!in) throw ConfigError("cannot read input file " + opt.input.string());
  TripleStore store = parse_ntriples(in, opt.strict ? ParseMode::Strict : ParseMode::Lenient);
  if (store.empty()) throw EmptyResult("input contains no triples");

  Schemas schemas = infer_schema(store, opt.config.schema);
  BuildReport report;
  HeteroGraph g = build_hetero_graph(store, schemas, &report);
  if (g.node_types.empty() || g.edge_types.empty())
    throw EmptyResult("conversion produced an empty graph (no typed nodes or no edges)");
  encode_literal_features(g, store, opt.config.feature);
  if (!opt.text_embeddings.empty()) {
    std::ifstream tsv(opt.text_embeddings);
    if (!tsv) throw MissingDependency("cannot read " + opt.text_embeddings.string());
    import_external_embeddings(g, tsv, store, opt.config.feature);
  }
  write_dataset(g, opt.out_dir, opt.config.to_json(), report,
                static_cast<long>(store.skipped.size()));
}

// --- embed ---------------------------------------------------------------------

struct EmbedOptions {
  fs::path dataset_dir;
  RunConfig config;
};

inline void cmd_embed(const EmbedOptions& opt) {
  HeteroGraph g = load_dataset(opt.dataset_dir);
  KgeResult result = train_kge(g, opt.config.kge_variant, opt.config.kge);
  write_kge(result.model, g, opt.dataset_dir, opt.config.to_json());
}

// --- train / evaluate ------------------------------------------------------------

struct TrainOptions {
  fs::path dataset_dir;
  fs::path out_dir;  // defaults to dataset_dir/runs
  RunConfig config;
};

namespace detail {

inline json metrics_json(const MetricsReport& m) {
  return {{"f1", m.f1},          {"precision", m.precision},
          {"recall", m.recall},  {"auc", m.auc},
          {"tp", m.tp},          {"fp", m.fp},
          {"tn", m.tn},          {"fn", m.fn},
          {"fingerprint", m.config_fingerprint}};
}

inline fs::path runs_dir(const TrainOptions& opt) {
  return opt.out_dir.empty() ? opt.dataset_dir / "runs" : opt.out_dir;
}

inline std::string run_name(const RunConfig& cfg) {
  return cfg.scenario_name + "_" + to_string(cfg.setting) + "_" +
         to_string(cfg.encoder.architecture) + "_" + to_string(cfg.init) + "_" +
         std::to_string(cfg.seed);
}

}  // namespace detail

inline fs::path cmd_train(const TrainOptions& opt) {
  RunConfig cfg = opt.config;
  cfg.propagate_seed();
  HeteroGraph g = load_dataset(opt.dataset_dir);
  if (needs_topology(cfg.init)) load_topology_features(g, opt.dataset_dir);

  ScenarioSpec spec{cfg.scenario_name, cfg.setting, resolve_target(g, cfg.target)};
  HeteroGraph scenario_graph = extract_scenario(g, spec);
  SweepConfig sc;
  sc.master_seed = cfg.seed;
  sc.ratios = cfg.ratios;
  sc.train = cfg.train;
  sc.encoder = cfg.encoder;
  uint64_t split_seed =
      derive_seed(cfg.seed, spec.name + "|" + to_string(spec.mode) + "|split|0");
  TrainResult tr;
  SweepRun run = run_cell_once(scenario_graph, spec, cfg.encoder.architecture, cfg.init, sc,
                               split_seed, cfg.seed, &tr);

  fs::path dir = detail::runs_dir(opt);
  fs::create_directories(dir);
  std::string name = detail::run_name(cfg);
  fs::path checkpoint = dir / ("checkpoint_" + name + ".json");
  detail::write_file(checkpoint, checkpoint_json(tr.model.parameters).dump() + "\n");

  json curve = json::array();
  for (const auto& rec : tr.curve)
    curve.push_back(
        {{"epoch", rec.epoch}, {"train_loss", rec.train_loss}, {"val_auc", rec.val_auc}});
  TrainSplit split = split_edges(scenario_graph, spec.target, cfg.ratios, split_seed);
  json manifest = {{"command", "train"},
                   {"dataset", opt.dataset_dir.string()},
                   {"config", cfg.to_json()},
                   {"target", spec.target.str()},
                   {"split_seed", split_seed},
                   {"split_sizes",
                    {{"train", split.sup_train.size()},
                     {"val", split.sup_val.size()},
                     {"test", split.sup_test.size()}}},
                   {"curve", curve},
                   {"best_epoch", tr.best_epoch},
                   {"best_val_auc", tr.best_val_auc},
                   {"metrics", detail::metrics_json(run.metrics)},
                   {"checkpoint", checkpoint.string()}};
  fs::path run_path = dir / ("run_" + name + ".json");
  detail::write_file(run_path, manifest.dump(2) + "\n");
  return run_path;
}

struct EvaluateOptions {
  fs::path run_manifest;
};

// Rebuilds the run from its manifest, restores the checkpoint, and recomputes
// the test metrics.
inline MetricsReport cmd_evaluate(const EvaluateOptions& opt) {
  if (!fs::exists(opt.run_manifest))
    throw MissingDependency("missing run manifest " + opt.run_manifest.string());
  json manifest;
  try {
    manifest = json::parse(detail::read_file(opt.run_manifest));
  } catch (const json::exception& e) {
    throw DataError("malformed run manifest: " + std::string(e.what()));
  }
  fs::path checkpoint = manifest.at("checkpoint").get<std::string>();
  if (!fs::exists(checkpoint))
    throw MissingDependency("missing checkpoint " + checkpoint.string());

  RunConfig cfg;
  const json& cj = manifest.at("config");
  cfg.init = init_tag_from_string(cj.at("run").at("init").get<std::string>());
  cfg.scenario_name = cj.at("run").at("scenario").get<std::string>();
  cfg.setting = scenario_mode_from_string(cj.at("run").at("setting").get<std::string>());
  cfg.seed = cj.at("run").at("seed").get<uint64_t>();
  cfg.encoder.architecture =
      arch_from_string(cj.at("encoder").at("architecture").get<std::string>());
  cfg.encoder.layers = cj.at("encoder").at("layers").get<int>();
  cfg.encoder.hidden_dim = cj.at("encoder").at("hidden_dim").get<int>();
  cfg.encoder.heads = cj.at("encoder").at("heads").get<int>();
  cfg.encoder.leaky_slope = cj.at("encoder").at("leaky_slope").get<double>();
  cfg.encoder.aggregator = cj.at("encoder").at("aggregator").get<std::string>() == "pool"
                               ? SageAggregator::Pool
                               : SageAggregator::Mean;
  cfg.ratios.train = cj.at("split").at("train").get<double>();
  cfg.ratios.val = cj.at("split").at("val").get<double>();
  cfg.ratios.test = cj.at("split").at("test").get<double>();
  cfg.train.threshold = cj.at("train").at("threshold").get<double>();
  cfg.propagate_seed();

  HeteroGraph g = load_dataset(manifest.at("dataset").get<std::string>());
  if (needs_topology(cfg.init))
    load_topology_features(g, manifest.at("dataset").get<std::string>());
  ScenarioSpec spec{cfg.scenario_name, cfg.setting,
                    EdgeKey::from_str(manifest.at("target").get<std::string>())};
  HeteroGraph scenario_graph = extract_scenario(g, spec);
  TrainSplit split = split_edges(scenario_graph, spec.target, cfg.ratios,
                                 manifest.at("split_seed").get<uint64_t>());

  InitStrategy strategy{cfg.init};
  EncoderConfig ec = cfg.encoder;
  ec.seed = cfg.seed;
  RecModel model = build_rec_model(scenario_graph, split.message, strategy, ec, cfg.seed);
  json ckpt = json::parse(detail::read_file(checkpoint));
  restore_checkpoint(model.parameters, ckpt);

  std::vector<Edge> pairs = split.sup_test;
  pairs.insert(pairs.end(), split.neg_test.begin(), split.neg_test.end());
  std::vector<double> labels(split.sup_test.size(), 1.0);
  labels.insert(labels.end(), split.neg_test.size(), 0.0);
  std::vector<double> probs = predict(model, split.message, spec.target, pairs);
  MetricsReport m = compute_threshold_metrics(probs, labels, cfg.train.threshold);
  m.auc = compute_auc(probs, labels);
  m.config_fingerprint = manifest.at("metrics").at("fingerprint").get<std::string>();
  return m;
}

// --- sweep ---------------------------------------------------------------------

struct SweepOptions {
  fs::path dataset_dir;
  fs::path out_dir;  // defaults to dataset_dir
  std::vector<ScenarioMode> settings = {ScenarioMode::Full, ScenarioMode::Bipartite};
  std::vector<Arch> encoders = {Arch::SAGE, Arch::GAT, Arch::HGT};
  std::vector<InitTag> strategies = all_init_tags();
  RunConfig config;
};

inline SweepResult cmd_sweep(const SweepOptions& opt) {
  RunConfig cfg = opt.config;
  cfg.propagate_seed();
  HeteroGraph g = load_dataset(opt.dataset_dir);
  bool topo = false;
  for (InitTag st : opt.strategies) topo |= needs_topology(st);
  if (topo) load_topology_features(g, opt.dataset_dir);

  EdgeKey target = resolve_target(g, cfg.target);
  std::vector<ScenarioSpec> scenarios;
  for (ScenarioMode mode : opt.settings)
    scenarios.push_back({cfg.scenario_name, mode, target});

  SweepConfig sc;
  sc.master_seed = cfg.seed;
  sc.seeds = cfg.seeds;
  sc.ratios = cfg.ratios;
  sc.train = cfg.train;
  sc.encoder = cfg.encoder;
  SweepResult result = run_sweep(g, scenarios, opt.encoders, opt.strategies, sc);

  fs::path dir = opt.out_dir.empty() ? opt.dataset_dir : opt.out_dir;
  fs::create_directories(dir / "runs");
  detail::write_file(dir / "results.csv", sweep_csv(result));
  detail::write_file(dir / "results.md", sweep_markdown(result, opt.encoders, opt.strategies));

  json cells = json::array();
  for (const auto& cell : result.cells) {
    json cj = {{"scenario", cell.scenario.name},
               {"setting", to_string(cell.scenario.mode)},
               {"encoder", to_string(cell.encoder)},
               {"strategy", to_string(cell.strategy)},
               {"feasible", cell.feasible}};
    if (!cell.feasible) cj["reason"] = cell.reason;
    json runs = json::array();
    for (const auto& run : cell.runs) {
      runs.push_back({{"seed", run.seed},
                      {"best_epoch", run.best_epoch},
                      {"metrics", detail::metrics_json(run.metrics)}});
      json run_manifest = {{"command", "sweep-cell"},
                           {"dataset", opt.dataset_dir.string()},
                           {"config", cfg.to_json()},
                           {"scenario", cell.scenario.name},
                           {"setting", to_string(cell.scenario.mode)},
                           {"target", cell.scenario.target.str()},
                           {"encoder", to_string(cell.encoder)},
                           {"strategy", to_string(cell.strategy)},
                           {"seed", run.seed},
                           {"metrics", detail::metrics_json(run.metrics)}};
      std::string name = cell.scenario.name + "_" +
                         std::string(to_string(cell.scenario.mode)) + "_" +
                         to_string(cell.encoder) + "_" + to_string(cell.strategy) + "_" +
                         std::to_string(run.seed);
      detail::write_file(dir / "runs" / ("run_" + name + ".json"), run_manifest.dump(2) + "\n");
    }
    cj["runs"] = runs;
    cells.push_back(cj);
  }
  json manifest = {{"command", "sweep"},
                   {"dataset", opt.dataset_dir.string()},
                   {"config", cfg.to_json()},
                   {"target", target.str()},
                   {"cells", cells}};
  detail::write_file(dir / "sweep.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace rdf2rec
