#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "rdf2rec/commands.hpp"
#include "testutil.hpp"

using namespace rdf2rec;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("rdf2rec_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// generate the toy scholarly KG once per binary run
const fs::path& shared_dataset() {
  static TempDir dir("shared");
  static bool ready = false;
  if (!ready) {
    GenerateOptions gen;
    gen.profile = "scholarly";
    gen.seed = 7;
    gen.out = dir.path / "kg.nt";
    cmd_generate(gen);
    ConvertOptions conv;
    conv.input = gen.out;
    conv.out_dir = dir.path / "dataset";
    cmd_convert(conv);
    ready = true;
  }
  static fs::path dataset = dir.path / "dataset";
  return dataset;
}

}  // namespace

TEST_CASE("generate: deterministic bytes and planted structure") {
  TempDir dir("generate");
  GenerateOptions opt;
  opt.profile = "scholarly";
  opt.seed = 7;
  opt.out = dir.path / "a.nt";
  cmd_generate(opt);
  opt.out = dir.path / "b.nt";
  cmd_generate(opt);
  std::string a = slurp(dir.path / "a.nt"), b = slurp(dir.path / "b.nt");
  CHECK(a == b);
  CHECK(fs::exists(dir.path / "a.nt.manifest.json"));

  // planted-structure check via the sidecar community labels
  std::map<std::string, int> community;
  for (const auto& line : split(slurp(dir.path / "a.nt.communities.tsv"), '\n')) {
    auto fields = split(line, '\t');
    if (fields.size() == 2 && fields[0] != "node_iri")
      community[fields[0]] = std::atoi(fields[1].c_str());
  }
  REQUIRE(community.size() > 100);
  TripleStore store = parse_ntriples(slurp(dir.path / "a.nt"));
  long within = 0, cross = 0, within_pairs = 0, cross_pairs = 0;
  std::set<std::string> works, authors;
  for (const auto& t : store.triples()) {
    if (t.predicate.lexical.find("hasAuthor") == std::string::npos) continue;
    (community.at(t.subject.lexical) == community.at(t.object.lexical) ? within : cross)++;
  }
  for (const auto& [iri, c] : community)
    (iri.find("/work/") != std::string::npos ? works : authors).insert(iri);
  for (const auto& w : works)
    for (const auto& a2 : authors)
      (community.at(w) == community.at(a2) ? within_pairs : cross_pairs)++;
  double within_rate = static_cast<double>(within) / static_cast<double>(within_pairs);
  double cross_rate = static_cast<double>(cross) / static_cast<double>(cross_pairs);
  INFO("within rate " << within_rate << " cross rate " << cross_rate);
  CHECK(within_rate >= 10.0 * cross_rate);

  GenerateOptions bad;
  bad.profile = "nope";
  bad.out = dir.path / "x.nt";
  CHECK(run_command([&] { cmd_generate(bad); }) == kInputError);
}

TEST_CASE("convert: smoke test on the generated KG") {
  const fs::path& dataset = shared_dataset();
  CHECK(fs::exists(dataset / "schema.json"));
  CHECK(fs::exists(dataset / "report.json"));
  CHECK(fs::exists(dataset / "nodes_Work.csv"));
  CHECK(fs::exists(dataset / "nodes_Author.csv"));
  CHECK(fs::exists(dataset / "edges_Work__hasAuthor__Author.csv"));
  CHECK(fs::exists(dataset / "edges_Author__hasAuthor_rev__Work.csv"));

  // generated file passes conversion with zero dropped triples
  json report = json::parse(slurp(dataset / "report.json"));
  CHECK(report.at("triples_dropped").get<long>() == 0);
  CHECK(report.at("untyped_resources_dropped").get<long>() == 0);
  CHECK(report.at("skipped_lines").get<long>() == 0);
  CHECK(report.contains("config"));  // resolved config echoed

  // dataset round-trips through the loader
  HeteroGraph g = load_dataset(dataset);
  CHECK(g.node_types.size() == 4);
  CHECK(g.node_types.at("Work").has_nld());    // abstract
  CHECK(g.node_types.at("Author").has_nld());  // affiliation
  CHECK_FALSE(g.node_types.at("Venue").has_nld());
}

TEST_CASE("convert: exit codes for bad input") {
  TempDir dir("convert");
  ConvertOptions missing;
  missing.input = dir.path / "absent.nt";
  missing.out_dir = dir.path / "d";
  CHECK(run_command([&] { cmd_convert(missing); }) == kInputError);

  // strict vs lenient on a file with one bad line
  fs::path mixed = dir.path / "mixed.nt";
  detail::write_file(mixed,
                     "<http://x/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/T> .\n"
                     "<http://x/b> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/T> .\n"
                     "not a triple\n"
                     "<http://x/a> <http://x/r> <http://x/b> .\n");
  ConvertOptions strict;
  strict.input = mixed;
  strict.out_dir = dir.path / "d1";
  CHECK(run_command([&] { cmd_convert(strict); }) == kInputError);
  ConvertOptions lenient = strict;
  lenient.out_dir = dir.path / "d2";
  lenient.strict = false;
  CHECK(run_command([&] { cmd_convert(lenient); }) == kOk);
  json report = json::parse(slurp(dir.path / "d2" / "report.json"));
  CHECK(report.at("skipped_lines").get<long>() == 1);

  // a literal-only graph is empty after conversion
  fs::path empty = dir.path / "empty.nt";
  detail::write_file(empty,
                     "<http://x/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/T> .\n"
                     "<http://x/a> <http://x/p> \"v\" .\n");
  ConvertOptions empty_opt;
  empty_opt.input = empty;
  empty_opt.out_dir = dir.path / "d3";
  CHECK(run_command([&] { cmd_convert(empty_opt); }) == kEmptyResult);
}

TEST_CASE("embed: shapes, complex widening, byte determinism") {
  TempDir dir("embed");
  fs::copy(shared_dataset(), dir.path / "ds", fs::copy_options::recursive);

  EmbedOptions opt;
  opt.dataset_dir = dir.path / "ds";
  opt.config.kge.d = 16;
  opt.config.kge.epochs = 3;
  cmd_embed(opt);
  std::string tsv = slurp(dir.path / "ds" / "embeddings_Author.tsv");
  auto first = split(split(tsv, '\n')[0], '\t');
  CHECK(first.size() == 1 + 16);  // transe: d value columns

  opt.config.kge_variant = KgeVariant::ComplEx;
  cmd_embed(opt);
  tsv = slurp(dir.path / "ds" / "embeddings_Author.tsv");
  first = split(split(tsv, '\n')[0], '\t');
  CHECK(first.size() == 1 + 32);  // complex widening: 2d

  std::string again = slurp(dir.path / "ds" / "embeddings_Author.tsv");
  cmd_embed(opt);
  CHECK(slurp(dir.path / "ds" / "embeddings_Author.tsv") == again);  // same seed, same bytes

  EmbedOptions bad;
  bad.dataset_dir = dir.path / "not_a_dataset";
  CHECK(run_command([&] { cmd_embed(bad); }) == kMalformedDataset);
}

TEST_CASE("train: run manifest with four metrics; evaluate reproduces them") {
  TempDir dir("train");
  fs::copy(shared_dataset(), dir.path / "ds", fs::copy_options::recursive);
  TrainOptions opt;
  opt.dataset_dir = dir.path / "ds";
  opt.config.init = InitTag::one_hot;
  opt.config.encoder.architecture = Arch::SAGE;
  opt.config.setting = ScenarioMode::Full;
  opt.config.train.epochs = 4;
  opt.config.seed = 3;
  opt.config.propagate_seed();
  fs::path manifest_path = cmd_train(opt);
  REQUIRE(fs::exists(manifest_path));
  json manifest = json::parse(slurp(manifest_path));
  const json& m = manifest.at("metrics");
  for (const char* k : {"f1", "precision", "recall", "auc"}) {
    CHECK(m.contains(k));
    CHECK(m.at(k).get<double>() >= 0.0);
    CHECK(m.at(k).get<double>() <= 1.0);
  }
  CHECK(manifest.at("config").at("run").at("init").get<std::string>() == "one_hot");
  REQUIRE(fs::exists(fs::path(manifest.at("checkpoint").get<std::string>())));

  EvaluateOptions ev;
  ev.run_manifest = manifest_path;
  MetricsReport r = cmd_evaluate(ev);
  CHECK(r.f1 == Catch::Approx(m.at("f1").get<double>()).margin(1e-12));
  CHECK(r.auc == Catch::Approx(m.at("auc").get<double>()).margin(1e-12));

  // missing checkpoint -> exit 5
  fs::remove(fs::path(manifest.at("checkpoint").get<std::string>()));
  CHECK(run_command([&] { cmd_evaluate(ev); }) == kMissingDependency);
  EvaluateOptions gone;
  gone.run_manifest = dir.path / "nope.json";
  CHECK(run_command([&] { cmd_evaluate(gone); }) == kMissingDependency);
}

TEST_CASE("train: tb strategy without embeddings names the missing file") {
  TempDir dir("train_tb");
  fs::copy(shared_dataset(), dir.path / "ds", fs::copy_options::recursive);
  TrainOptions opt;
  opt.dataset_dir = dir.path / "ds";
  opt.config.init = InitTag::tb;
  opt.config.train.epochs = 1;
  std::ostringstream err;
  int code = run_command([&] { cmd_train(opt); }, err);
  CHECK(code == kMissingDependency);
  CHECK(err.str().find("embeddings_") != std::string::npos);
}

TEST_CASE("sweep: seed fan-out and deterministic csv bytes") {
  TempDir dir("sweep");
  fs::copy(shared_dataset(), dir.path / "ds", fs::copy_options::recursive);
  SweepOptions opt;
  opt.dataset_dir = dir.path / "ds";
  opt.settings = {ScenarioMode::Full};
  opt.encoders = {Arch::SAGE};
  opt.strategies = {InitTag::one_hot, InitTag::cb_literal};
  opt.config.seeds = 3;
  opt.config.seed = 11;
  opt.config.train.epochs = 2;
  opt.config.encoder.hidden_dim = 16;
  cmd_sweep(opt);
  std::string csv = slurp(dir.path / "ds" / "results.csv");
  auto lines = split(csv, '\n');
  REQUIRE(lines[0] == "scenario,setting,encoder,strategy,seed,f1,precision,recall,auc");
  long rows = 0;
  std::set<std::string> seeds_seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++rows;
    seeds_seen.insert(split(lines[i], ',')[4]);
  }
  CHECK(rows == 2 * 3);           // strategies x seeds
  CHECK(seeds_seen.size() == 6);  // distinct derived per-cell seeds

  // same master seed -> byte-identical outputs
  cmd_sweep(opt);
  CHECK(slurp(dir.path / "ds" / "results.csv") == csv);
  CHECK(fs::exists(dir.path / "ds" / "results.md"));
  CHECK(fs::exists(dir.path / "ds" / "sweep.json"));
  CHECK(fs::exists(dir.path / "ds" / "runs"));
}

TEST_CASE("config file parsing with flag-style overrides") {
  FlatConfig flat = parse_config_text(
      "# comment\n"
      "[encoder]\n"
      "encoder = gat\n"
      "hidden_dim = 32\n"
      "[train]\n"
      "epochs = 9\n");
  RunConfig cfg;
  cfg.apply(flat);
  CHECK(cfg.encoder.architecture == Arch::GAT);
  CHECK(cfg.encoder.hidden_dim == 32);
  CHECK(cfg.train.epochs == 9);
  cfg.apply_key("hidden_dim", "64");  // a CLI flag of the same name wins
  CHECK(cfg.encoder.hidden_dim == 64);
  CHECK_THROWS_AS(cfg.apply_key("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("broken line\n"), ConfigError);

  // resolved config echo carries every section
  json echo = cfg.to_json();
  for (const char* k : {"schema", "feature", "kge", "encoder", "train", "split", "run"})
    CHECK(echo.contains(k));
}

TEST_CASE("RDF2REC_SEED provides the master-seed default") {
  ::setenv("RDF2REC_SEED", "4242", 1);
  CHECK(default_master_seed() == 4242);
  ::setenv("RDF2REC_SEED", "junk", 1);
  CHECK_THROWS_AS(default_master_seed(), ConfigError);
  ::unsetenv("RDF2REC_SEED");
  CHECK(default_master_seed() == 0);
}

TEST_CASE("tasks profile generates a 4-type dataset with a dataset-task target") {
  TempDir dir("tasks");
  GenerateOptions gen;
  gen.profile = "tasks";
  gen.seed = 5;
  gen.out = dir.path / "kg.nt";
  cmd_generate(gen);
  ConvertOptions conv;
  conv.input = gen.out;
  conv.out_dir = dir.path / "ds";
  cmd_convert(conv);
  HeteroGraph g = load_dataset(dir.path / "ds");
  CHECK(g.node_types.size() == 4);
  CHECK(g.node_types.count("Dataset") == 1);
  CHECK(g.node_types.count("Task") == 1);
  EdgeKey target = resolve_target(g, "Dataset__benchmarks__Task");
  CHECK(g.edge_types.at(target).edges.size() >= 10);
}

TEST_CASE("external text embeddings flow through convert") {
  TempDir dir("ext");
  fs::path nt = dir.path / "kg.nt";
  detail::write_file(
      nt,
      "<http://x/w1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/W> .\n"
      "<http://x/w2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/W> .\n"
      "<http://x/w1> <http://x/abstract> \"a long natural language description here ok\" .\n"
      "<http://x/w2> <http://x/abstract> \"another long natural language description ok\" .\n"
      "<http://x/w1> <http://x/rel> <http://x/w2> .\n");
  fs::path tsv = dir.path / "vec.tsv";
  detail::write_file(tsv, "http://x/w1\t0.25\t0.5\t1\nhttp://x/w2\t1\t0\t0\n");
  ConvertOptions opt;
  opt.input = nt;
  opt.out_dir = dir.path / "ds";
  opt.text_embeddings = tsv;
  cmd_convert(opt);
  HeteroGraph g = load_dataset(dir.path / "ds");
  const FeatureTable& xc = g.content_features.at("W");
  CHECK(xc.dim == 3);
  CHECK(xc.at(0, 0) == 0.25);
  CHECK(xc.column_spec.back().source == "external_text");
}
