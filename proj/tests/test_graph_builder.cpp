#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rdf2rec/features.hpp"
#include "rdf2rec/hetero_graph.hpp"
#include "testutil.hpp"

using namespace rdf2rec;

static const char* kType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

TEST_CASE("infer_schema: one edge between two node types") {
  std::string nt = std::string() +
      "<http://x/a> <" + kType + "> <http://x/Author> .\n" +
      "<http://x/w> <" + kType + "> <http://x/Work> .\n" +
      "<http://x/w> <http://x/hasAuthor> <http://x/a> .\n";
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  REQUIRE(schemas.node_types.size() == 2);
  CHECK(schemas.node_types.count("Author") == 1);
  CHECK(schemas.node_types.count("Work") == 1);
  REQUIRE(schemas.edge_types.size() == 1);
  EdgeKey expected{"Work", "hasAuthor", "Author"};
  CHECK(schemas.edge_types.begin()->first == expected);
}

TEST_CASE("infer_schema: single short string value stays a String attribute") {
  std::string nt = std::string() +
      "<http://x/w> <" + kType + "> <http://x/Work> .\n" +
      "<http://x/w> <http://x/title> \"x\" .\n";
  auto schemas = infer_schema(parse_ntriples(nt));
  const auto& props = schemas.node_types.at("Work").attribute_properties;
  REQUIRE(props.size() == 1);
  CHECK(props[0].predicate == "http://x/title");
  CHECK(props[0].kind == LiteralKind::String);
}

TEST_CASE("infer_schema: repeated bounded values become Categorical") {
  std::ostringstream nt;
  for (int i = 0; i < 10; ++i) {
    nt << "<http://x/w" << i << "> <" << kType << "> <http://x/Work> .\n";
    nt << "<http://x/w" << i << "> <http://x/venue> \"" << (i % 3 == 0 ? "acl" : "pldi")
       << "\" .\n";
  }
  auto schemas = infer_schema(parse_ntriples(nt.str()));
  const auto& props = schemas.node_types.at("Work").attribute_properties;
  REQUIRE(props.size() == 1);
  CHECK(props[0].kind == LiteralKind::Categorical);
}

TEST_CASE("infer_schema: multi-typed resource joins the least-frequent class") {
  std::ostringstream nt;
  for (int i = 0; i < 10; ++i)
    nt << "<http://x/a" << i << "> <" << kType << "> <http://x/Author> .\n";
  for (int i = 0; i < 100; ++i)
    nt << "<http://x/p" << i << "> <" << kType << "> <http://x/Person> .\n";
  nt << "<http://x/dual> <" << kType << "> <http://x/Author> .\n";
  nt << "<http://x/dual> <" << kType << "> <http://x/Person> .\n";
  auto store = parse_ntriples(nt.str());
  auto schemas = infer_schema(store);

  // frequency-count oracle over the toy store: Author is declared by fewer
  // distinct subjects than Person
  std::map<std::string, std::set<std::string>> counts;
  for (const auto& t : store.triples())
    if (t.predicate.lexical == kType) counts[t.object.lexical].insert(t.subject.lexical);
  REQUIRE(counts["http://x/Author"].size() < counts["http://x/Person"].size());

  CHECK(schemas.resource_type.at("http://x/dual") == "Author");
  // tie case: equal frequency falls back to the lexicographically smaller IRI
  std::string tie = std::string() +
      "<http://x/r1> <" + kType + "> <http://x/B> .\n" +
      "<http://x/r1> <" + kType + "> <http://x/A> .\n";
  auto tied = infer_schema(parse_ntriples(tie));
  CHECK(tied.resource_type.at("http://x/r1") == "A");
}

TEST_CASE("infer_schema: untyped resources are dropped or kept by config") {
  std::string nt = std::string() +
      "<http://x/w> <" + kType + "> <http://x/Work> .\n" +
      "<http://x/w> <http://x/link> <http://x/mystery> .\n";
  auto dropped = infer_schema(parse_ntriples(nt));
  CHECK(dropped.untyped_dropped == 1);
  CHECK(dropped.resource_type.count("http://x/mystery") == 0);

  SchemaConfig keep;
  keep.keep_untyped = true;
  auto kept = infer_schema(parse_ntriples(nt), keep);
  CHECK(kept.untyped_dropped == 0);
  CHECK(kept.resource_type.at("http://x/mystery") == std::string(kUntypedTypeName));
}

TEST_CASE("build: reverse edge types and dedup") {
  std::string nt = std::string() +
      "<http://x/a> <" + kType + "> <http://x/Author> .\n" +
      "<http://x/w> <" + kType + "> <http://x/Work> .\n" +
      "<http://x/w> <http://x/hasAuthor> <http://x/a> .\n" +
      "<http://x/w> <http://x/hasAuthor> <http://x/a> .\n";  // duplicate triple
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  BuildReport report;
  auto g = build_hetero_graph(store, schemas, &report);
  EdgeKey fwd{"Work", "hasAuthor", "Author"};
  EdgeKey rev{"Author", "hasAuthor_rev", "Work"};
  REQUIRE(g.edge_types.count(fwd) == 1);
  REQUIRE(g.edge_types.count(rev) == 1);
  CHECK(g.edge_types.at(fwd).edges.size() == 1);
  CHECK(g.edge_types.at(rev).edges.size() == 1);
  CHECK(g.edge_types.at(rev).reverse);
  CHECK(report.duplicate_edges_removed == 1);
}

TEST_CASE("build: hand-counted degrees on the figure-2 store") {
  auto store = testutil::figure2_store();
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  const auto& edges = g.edge_types.at({"Work", "hasAuthor", "Author"}).edges;
  CHECK(edges.size() == 6);  // 3 works x 2 of 4 authors
  std::map<int, int> out_degree;
  for (auto [s, d] : edges) ++out_degree[s];
  for (auto [w, deg] : out_degree) CHECK(deg == 2);
  // reverse-edge symmetry
  const auto& rev = g.edge_types.at({"Author", "hasAuthor_rev", "Work"}).edges;
  REQUIRE(rev.size() == edges.size());
  std::set<std::pair<int, int>> fwd_set(edges.begin(), edges.end());
  for (auto [s, d] : rev) CHECK(fwd_set.count({d, s}) == 1);
}

TEST_CASE("build: symmetric self-type predicate skips the reverse type") {
  std::string nt = std::string() +
      "<http://x/a> <" + kType + "> <http://x/Author> .\n" +
      "<http://x/b> <" + kType + "> <http://x/Author> .\n" +
      "<http://x/a> <http://x/coauthor> <http://x/b> .\n" +
      "<http://x/b> <http://x/coauthor> <http://x/a> .\n";
  auto store = parse_ntriples(nt);
  SchemaConfig cfg;
  cfg.symmetric_predicates.insert("http://x/coauthor");
  auto schemas = infer_schema(store, cfg);
  auto g = build_hetero_graph(store, schemas);
  CHECK(g.edge_types.count({"Author", "coauthor", "Author"}) == 1);
  CHECK(g.edge_types.count({"Author", "coauthor_rev", "Author"}) == 0);
}

TEST_CASE("mixed predicates split into edges and attributes per occurrence") {
  std::string nt = std::string() +
      "<http://x/a> <" + kType + "> <http://x/Author> .\n" +
      "<http://x/w> <" + kType + "> <http://x/Work> .\n" +
      "<http://x/w> <http://x/about> <http://x/a> .\n" +
      "<http://x/w> <http://x/about> \"graph learning studies\" .\n";
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  CHECK(g.edge_types.at({"Work", "about", "Author"}).edges.size() == 1);
  const auto& props = schemas.node_types.at("Work").attribute_properties;
  REQUIRE(props.size() == 1);
  CHECK(props[0].predicate == "http://x/about");
}

TEST_CASE("encode: boolean, numeric and degenerate columns") {
  std::string nt = std::string() +
      "<http://x/w1> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w2> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w3> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w1> <http://x/open> \"true\"^^<http://www.w3.org/2001/XMLSchema#boolean> .\n" +
      "<http://x/w2> <http://x/open> \"false\"^^<http://www.w3.org/2001/XMLSchema#boolean> .\n" +
      "<http://x/w3> <http://x/open> \"true\"^^<http://www.w3.org/2001/XMLSchema#boolean> .\n" +
      "<http://x/w1> <http://x/year> \"0\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w2> <http://x/year> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w3> <http://x/year> \"10\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w1> <http://x/zeta> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w2> <http://x/zeta> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w3> <http://x/zeta> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n";
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  encode_literal_features(g, store);
  const FeatureTable& ft = g.content_features.at("W");
  REQUIRE(ft.dim == 3);  // open, year, zeta sorted by predicate IRI
  // open: (1,0,1)
  CHECK(ft.at(0, 0) == 1.0);
  CHECK(ft.at(1, 0) == 0.0);
  CHECK(ft.at(2, 0) == 1.0);
  // year min-max: (0, 0.5, 1)
  CHECK(ft.at(0, 1) == Catch::Approx(0.0));
  CHECK(ft.at(1, 1) == Catch::Approx(0.5));
  CHECK(ft.at(2, 1) == Catch::Approx(1.0));
  // zeta degenerate range: all 0.5
  for (int i = 0; i < 3; ++i) CHECK(ft.at(i, 2) == 0.5);
}

TEST_CASE("encode: missing values use column mean, 0.5, zeros") {
  std::string nt = std::string() +
      "<http://x/w1> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w2> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w3> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w1> <http://x/year> \"10\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w2> <http://x/year> \"20\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n" +
      "<http://x/w1> <http://x/open> \"true\"^^<http://www.w3.org/2001/XMLSchema#boolean> .\n";
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  encode_literal_features(g, store);
  const FeatureTable& ft = g.content_features.at("W");
  REQUIRE(ft.dim == 2);
  // open column first (predicate IRI order): w2/w3 missing -> 0.5
  CHECK(ft.at(0, 0) == 1.0);
  CHECK(ft.at(1, 0) == 0.5);
  CHECK(ft.at(2, 0) == 0.5);
  // year scaled to {0,1}; w3 missing -> mean of scaled observed = 0.5
  CHECK(ft.at(0, 1) == Catch::Approx(0.0));
  CHECK(ft.at(1, 1) == Catch::Approx(1.0));
  CHECK(ft.at(2, 1) == Catch::Approx(0.5));
}

TEST_CASE("encode: categorical one-hot with missing row all-zero") {
  std::ostringstream nt;
  for (int i = 0; i < 6; ++i)
    nt << "<http://x/w" << i << "> <" << kType << "> <http://x/W> .\n";
  const char* vals[] = {"a", "b", "a", "c", "b"};
  for (int i = 0; i < 5; ++i)
    nt << "<http://x/w" << i << "> <http://x/cat> \"" << vals[i] << "\" .\n";
  auto store = parse_ntriples(nt.str());
  auto schemas = infer_schema(store);
  REQUIRE(schemas.node_types.at("W").attribute_properties[0].kind == LiteralKind::Categorical);
  auto g = build_hetero_graph(store, schemas);
  encode_literal_features(g, store);
  const FeatureTable& ft = g.content_features.at("W");
  REQUIRE(ft.dim == 3);  // categories a, b, c
  CHECK(ft.at(0, 0) == 1.0);  // "a"
  CHECK(ft.at(1, 1) == 1.0);  // "b"
  CHECK(ft.at(3, 2) == 1.0);  // "c"
  for (int j = 0; j < 3; ++j) CHECK(ft.at(5, j) == 0.0);  // missing
  for (int i = 0; i < 5; ++i) {
    double sum = 0;
    for (int j = 0; j < 3; ++j) sum += ft.at(i, j);
    CHECK(sum == 1.0);
  }
}

TEST_CASE("encode: datetime scaled, string block width, empty type flag") {
  std::string nt = std::string() +
      "<http://x/w1> <" + kType + "> <http://x/W> .\n" +
      "<http://x/w2> <" + kType + "> <http://x/W> .\n" +
      "<http://x/e1> <" + kType + "> <http://x/Empty> .\n" +
      "<http://x/w1> <http://x/when> \"2000-01-01\"^^<http://www.w3.org/2001/XMLSchema#date> .\n" +
      "<http://x/w2> <http://x/when> \"2010-01-01\"^^<http://www.w3.org/2001/XMLSchema#date> .\n" +
      "<http://x/w1> <http://x/abstract> \"an unusually long natural language description here\" .\n" +
      "<http://x/w2> <http://x/abstract> \"another unusually long natural language description\" .\n" +
      "<http://x/e1> <http://x/rel> <http://x/w1> .\n";
  auto store = parse_ntriples(nt);
  auto schemas = infer_schema(store);
  CHECK(schemas.node_types.at("W").attribute_properties[0].kind == LiteralKind::String);
  CHECK(schemas.node_types.at("W").attribute_properties[0].nld);  // mean length >= 20
  CHECK(schemas.node_types.at("W").attribute_properties[1].kind == LiteralKind::DateTime);
  auto g = build_hetero_graph(store, schemas);
  FeatureConfig fc;
  fc.text_dim = 16;
  encode_literal_features(g, store, fc);
  const FeatureTable& ft = g.content_features.at("W");
  CHECK(ft.dim == 16 + 1);
  CHECK(ft.at(0, 16) == Catch::Approx(0.0));
  CHECK(ft.at(1, 16) == Catch::Approx(1.0));
  const FeatureTable& empty = g.content_features.at("Empty");
  CHECK(empty.content_empty);
  CHECK(empty.dim == 1);
  CHECK(empty.at(0, 0) == 0.0);
}

TEST_CASE("embed_text: determinism and unit norm") {
  auto a = embed_text("Graph Neural Networks", 64, 7);
  auto b = embed_text("Graph Neural Networks", 64, 7);
  CHECK(a == b);
  double norm = 0;
  for (double x : a) norm += x * x;
  CHECK(std::sqrt(norm) == Catch::Approx(1.0).margin(1e-9));
  auto c = embed_text("Graph Neural Networks", 64, 8);
  CHECK(a != c);  // seed changes the embedding
  auto zero = embed_text("", 64, 7);
  for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("embed_text: unrelated strings are nearly orthogonal on average") {
  Rng rng(1234);
  double total = 0.0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    auto words = [&]() {
      std::string s;
      int n = 3 + rng.uniform_int(6);
      for (int k = 0; k < n; ++k) {
        if (k) s += ' ';
        s += testutil::random_token(rng, 3, 9);
      }
      return s;
    };
    auto a = embed_text(words(), 64, 7);
    auto b = embed_text(words(), 64, 7);
    double dot = 0;
    for (int j = 0; j < 64; ++j) dot += a[j] * b[j];
    total += std::abs(dot);
  }
  CHECK(total / pairs < 0.2);
}

TEST_CASE("import_external_embeddings replaces string blocks") {
  auto store = testutil::figure2_store();
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  FeatureConfig fc;
  fc.text_dim = 8;
  encode_literal_features(g, store, fc);
  REQUIRE(g.content_features.at("Work").dim == 8);

  SECTION("full coverage changes the block width") {
    std::string tsv =
        "http://x/w1\t1\t0\t0\t0\t0\t0\t0\t1\n"
        "http://x/w2\t0\t1\t0\t0\t0\t0\t0\t1\n"
        "http://x/w3\t0\t0\t1\t0\t0\t0\t0\t1\n";
    // width 8 external file on a different width: exercise both cases
    std::istringstream in(tsv);
    auto report = import_external_embeddings(g, in, store, fc);
    CHECK(report.rows_applied == 3);
    const FeatureTable& ft = g.content_features.at("Work");
    CHECK(ft.dim == 8);
    CHECK(ft.at(0, 0) == 1.0);
    CHECK(ft.at(1, 1) == 1.0);
    CHECK(ft.at(2, 2) == 1.0);
    CHECK(ft.column_spec.back().source == "external_text");
  }

  SECTION("narrower external width rebuilds the block") {
    std::string tsv = "http://x/w1\t0.5\t0.25\nhttp://x/w2\t0.1\t0.2\n";
    std::istringstream in(tsv);
    auto report = import_external_embeddings(g, in, store, fc);
    const FeatureTable& ft = g.content_features.at("Work");
    CHECK(ft.dim == 2);
    CHECK(ft.at(0, 0) == 0.5);
    // unlisted node keeps a built-in embedding at the new width
    auto builtin = embed_text("t three", 2, fc.seed);
    CHECK(ft.at(2, 0) == Catch::Approx(builtin[0]));
    CHECK(ft.at(2, 1) == Catch::Approx(builtin[1]));
  }

  SECTION("empty file leaves the graph unchanged") {
    auto before = g.content_features.at("Work").values;
    std::istringstream in("");
    auto report = import_external_embeddings(g, in, store, fc);
    CHECK(report.rows_applied == 0);
    CHECK(g.content_features.at("Work").values == before);
  }

  SECTION("inconsistent dimension names the offending row") {
    std::istringstream in("http://x/w1\t1\t2\t3\nhttp://x/w2\t1\t2\n");
    try {
      import_external_embeddings(g, in, store, fc);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }

  SECTION("unknown IRI is skipped with a warning") {
    std::istringstream in("http://x/unknown\t1\t2\n");
    auto report = import_external_embeddings(g, in, store, fc);
    CHECK(report.rows_applied == 0);
    REQUIRE(report.unknown_iris.size() == 1);
  }
}

TEST_CASE("determinism: identical inputs give bit-identical graphs and features") {
  auto build = []() {
    Rng rng(55);
    auto store = testutil::random_store(rng, 400);
    // add types for a subset of subjects so some resources stay untyped
    TripleStore typed;
    int i = 0;
    for (const auto& t : store.triples()) {
      typed.add(t);
      if (t.subject.kind == TermKind::IRI && ++i % 2 == 0)
        typed.add({t.subject, TermValue::iri(kType),
                   TermValue::iri(i % 4 == 0 ? "http://x/A" : "http://x/B")});
    }
    auto schemas = infer_schema(typed);
    auto g = build_hetero_graph(typed, schemas);
    encode_literal_features(g, typed);
    return g;
  };
  auto g1 = build();
  auto g2 = build();
  REQUIRE(g1.node_types.size() == g2.node_types.size());
  for (const auto& [tn, nt] : g1.node_types) {
    CHECK(g2.node_types.at(tn).members == nt.members);
    CHECK(g2.content_features.at(tn).values == g1.content_features.at(tn).values);
  }
  REQUIRE(g1.edge_types.size() == g2.edge_types.size());
  for (const auto& [key, et] : g1.edge_types)
    CHECK(g2.edge_types.at(key).edges == et.edges);
}

TEST_CASE("feature shape invariant: rows equal member counts") {
  auto store = testutil::figure2_store();
  auto schemas = infer_schema(store);
  auto g = build_hetero_graph(store, schemas);
  encode_literal_features(g, store);
  for (const auto& [tn, nt] : g.node_types) {
    REQUIRE(g.content_features.count(tn) == 1);
    CHECK(g.content_features.at(tn).rows == static_cast<int>(nt.members.size()));
    g.content_features.at(tn).validate("x_c of " + tn);
  }
}
