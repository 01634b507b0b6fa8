// rdf2rec: RDF knowledge graphs -> heterogeneous graph datasets -> GNN
// link-prediction recommenders.
//
//   rdf2rec generate --profile scholarly --seed 7 --out kg.nt
//   rdf2rec convert kg.nt --out dataset/
//   rdf2rec embed dataset/ --kge-model transe --kge-dim 64
//   rdf2rec train dataset/ --init comb_waddition --encoder sage --setting full
//   rdf2rec evaluate --run dataset/runs/run_....json
//   rdf2rec sweep dataset/ --seeds 5

#include <CLI11.hpp>

#include "rdf2rec/commands.hpp"

using namespace rdf2rec;

namespace {

// shared config plumbing: --config file first, then flag overrides
struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value pairs collected from flags

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "flat key = value configuration file");
    auto add_key = [this, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
      cmd->add_option_function<std::string>(
          flag, [this, key](const std::string& v) { overrides.push_back(key + "=" + v); },
          help);
    };
    add_key("--seed", "seed", "master seed (default: RDF2REC_SEED or 0)");
    add_key("--cat_threshold", "cat_threshold", "categorical one-hot width bound");
    add_key("--keep_untyped", "keep_untyped", "keep untyped resources as __untyped__");
    add_key("--nld_properties", "nld_properties", "comma list of NLD predicate IRIs");
    add_key("--symmetric_predicates", "symmetric_predicates",
            "comma list of symmetric predicate IRIs");
    add_key("--class_pins", "class_pins", "comma list of <class-iri>=<type-name>");
    add_key("--nld_min_mean_length", "nld_min_mean_length",
            "auto-NLD mean lexical length bound");
    add_key("--text_dim", "text_dim", "built-in text embedding width");
    add_key("--kge-model,--kge_model", "kge_model", "transe|distmult|complex|rotate");
    add_key("--kge-dim,--kge_dim,--dim", "kge_dim", "KGE embedding dimension");
    add_key("--kge-epochs,--kge_epochs", "kge_epochs", "KGE training epochs");
    add_key("--kge-lr,--kge_lr", "kge_lr", "KGE learning rate");
    add_key("--kge-negatives,--kge_negatives", "kge_negatives", "KGE negatives per positive");
    add_key("--kge-margin,--kge_margin", "kge_margin", "margin for TransE/RotatE");
    add_key("--encoder", "encoder", "sage|gat|hgt");
    add_key("--layers", "layers", "encoder layers");
    add_key("--heads", "heads", "attention heads (gat/hgt)");
    add_key("--hidden-dim,--hidden_dim", "hidden_dim", "hidden width");
    add_key("--leaky-slope,--leaky_slope", "leaky_slope", "GAT LeakyReLU slope");
    add_key("--aggregator", "aggregator", "sage aggregator: mean|pool");
    add_key("--epochs", "epochs", "training epochs");
    add_key("--lr", "lr", "Adam learning rate");
    add_key("--negatives", "negatives", "training negatives per positive");
    add_key("--patience", "patience", "early-stopping patience");
    add_key("--threshold", "threshold", "decision threshold");
    add_key("--train-ratio,--train_ratio", "train_ratio", "train split fraction");
    add_key("--val-ratio,--val_ratio", "val_ratio", "validation split fraction");
    add_key("--test-ratio,--test_ratio", "test_ratio", "test split fraction");
    add_key("--init", "init", "feature initialization strategy");
    add_key("--scenario", "scenario", "scenario label");
    add_key("--setting", "setting", "full|bipartite|homogeneous");
    add_key("--target", "target", "target edge type src__rel__dst");
    add_key("--seeds", "seeds", "seeds per sweep cell");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    cfg.seed = default_master_seed();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot read config file " + config_file);
      std::ostringstream ss;
      ss << in.rdbuf();
      cfg.apply(parse_config_text(ss.str()));
    }
    for (const std::string& kv : overrides) {
      size_t eq = kv.find('=');
      cfg.apply_key(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.propagate_seed();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RDF knowledge graphs to GNN link-prediction recommenders"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "emit a synthetic RDF knowledge graph");
  GenerateOptions gen_opt;
  std::string gen_seed;
  generate->add_option("--profile", gen_opt.profile, "scholarly|tasks");
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out", gen_opt.out, "output .nt path")->required();

  auto* convert = app.add_subcommand("convert", "RDF N-Triples to a heterogeneous dataset");
  ConvertOptions conv_opt;
  ConfigArgs conv_cfg;
  std::string strict_flag = "true";
  convert->add_option("input", conv_opt.input, ".nt input file")->required();
  convert->add_option("--out", conv_opt.out_dir, "dataset output directory")->required();
  convert->add_option("--strict", strict_flag, "fail on first malformed line (default true)");
  convert->add_option("--text-embeddings", conv_opt.text_embeddings,
                      "external text-vector TSV (node_iri\\tv1..vd)");
  conv_cfg.attach(convert);

  auto* embed = app.add_subcommand("embed", "train topology embeddings (KGE)");
  EmbedOptions embed_opt;
  ConfigArgs embed_cfg;
  embed->add_option("dataset", embed_opt.dataset_dir, "dataset directory")->required();
  embed_cfg.attach(embed);

  auto* train_cmd = app.add_subcommand("train", "train one link-prediction configuration");
  TrainOptions train_opt;
  ConfigArgs train_cfg;
  train_cmd->add_option("dataset", train_opt.dataset_dir, "dataset directory")->required();
  train_cmd->add_option("--out", train_opt.out_dir, "run output directory (default runs/)");
  train_cfg.attach(train_cmd);

  auto* evaluate = app.add_subcommand("evaluate", "recompute test metrics from a run manifest");
  EvaluateOptions eval_opt;
  evaluate->add_option("--run", eval_opt.run_manifest, "run_*.json manifest")->required();

  auto* sweep = app.add_subcommand("sweep", "train every (setting x encoder x strategy) cell");
  SweepOptions sweep_opt;
  ConfigArgs sweep_cfg;
  std::string settings_csv = "full,bipartite", encoders_csv = "sage,gat,hgt", inits_csv;
  sweep->add_option("dataset", sweep_opt.dataset_dir, "dataset directory")->required();
  sweep->add_option("--out", sweep_opt.out_dir, "results directory (default dataset dir)");
  sweep->add_option("--settings", settings_csv, "comma list of graph settings");
  sweep->add_option("--encoders", encoders_csv, "comma list of encoders");
  sweep->add_option("--inits", inits_csv, "comma list of init strategies (default all ten)");
  sweep_cfg.attach(sweep);

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    return run_command([&] {
      gen_opt.seed = gen_seed.empty() ? default_master_seed()
                                      : std::strtoull(gen_seed.c_str(), nullptr, 10);
      cmd_generate(gen_opt);
    });
  }
  if (convert->parsed()) {
    return run_command([&] {
      conv_opt.config = conv_cfg.resolve();
      if (strict_flag == "false" || strict_flag == "0" || strict_flag == "no")
        conv_opt.strict = false;
      cmd_convert(conv_opt);
    });
  }
  if (embed->parsed()) {
    return run_command([&] {
      embed_opt.config = embed_cfg.resolve();
      cmd_embed(embed_opt);
    });
  }
  if (train_cmd->parsed()) {
    return run_command([&] {
      train_opt.config = train_cfg.resolve();
      fs::path manifest = cmd_train(train_opt);
      std::cout << manifest.string() << "\n";
    });
  }
  if (evaluate->parsed()) {
    return run_command([&] {
      MetricsReport m = cmd_evaluate(eval_opt);
      std::printf("f1=%.6f precision=%.6f recall=%.6f auc=%.6f\n", m.f1, m.precision,
                  m.recall, m.auc);
    });
  }
  if (sweep->parsed()) {
    return run_command([&] {
      sweep_opt.config = sweep_cfg.resolve();
      sweep_opt.settings.clear();
      for (const auto& s : split(settings_csv, ','))
        if (!s.empty()) sweep_opt.settings.push_back(scenario_mode_from_string(trim(s)));
      sweep_opt.encoders.clear();
      for (const auto& s : split(encoders_csv, ','))
        if (!s.empty()) sweep_opt.encoders.push_back(arch_from_string(trim(s)));
      if (!inits_csv.empty()) {
        sweep_opt.strategies.clear();
        for (const auto& s : split(inits_csv, ','))
          if (!s.empty()) sweep_opt.strategies.push_back(init_tag_from_string(trim(s)));
      }
      cmd_sweep(sweep_opt);
    });
  }
  return kInputError;
}
