#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "rdf2rec/kge.hpp"
#include "testutil.hpp"

using namespace rdf2rec;

namespace {

// Hand-built model over one node type; entity/relation rows given directly.
KgeModel tiny_model(KgeVariant variant, int d, std::vector<std::vector<double>> entities,
                    std::vector<std::vector<double>> relations) {
  KgeModel m;
  m.variant = variant;
  m.d = d;
  m.types = {"item"};
  m.type_offset = {0, static_cast<int>(entities.size())};
  for (size_t i = 0; i < relations.size(); ++i)
    m.relation_keys.push_back({"item", "r" + std::to_string(i), "item"});
  for (auto& e : entities) m.entity.insert(m.entity.end(), e.begin(), e.end());
  for (auto& r : relations) m.relation.insert(m.relation.end(), r.begin(), r.end());
  return m;
}

}  // namespace

TEST_CASE("TransE scores") {
  auto m = tiny_model(KgeVariant::TransE, 2, {{1, 0}, {1, 1}, {0, 0}}, {{0, 1}, {3, 4}});
  CHECK(score_triple(m, 0, 0, 1) == Catch::Approx(0.0));    // exact translation
  CHECK(score_triple(m, 2, 1, 2) == Catch::Approx(-5.0));   // 3-4-5 norm
}

TEST_CASE("DistMult score and symmetry") {
  auto m = tiny_model(KgeVariant::DistMult, 2, {{1, 2}, {2, 1}}, {{1, 1}});
  CHECK(score_triple(m, 0, 0, 1) == Catch::Approx(4.0));
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(4), t(4), r(4);
    for (auto* v : {&h, &t, &r})
      for (double& x : *v) x = rng.uniform(-2, 2);
    auto mm = tiny_model(KgeVariant::DistMult, 4, {h, t}, {r});
    CHECK(score_triple(mm, 0, 0, 1) == score_triple(mm, 1, 0, 0));  // exact
  }
}

TEST_CASE("TransE translation invariance") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(5), t(5), r(5), c(5);
    for (auto* v : {&h, &t, &r, &c})
      for (double& x : *v) x = rng.uniform(-2, 2);
    std::vector<double> h2 = h, t2 = t;
    for (int i = 0; i < 5; ++i) {
      h2[i] += c[i];
      t2[i] += c[i];
    }
    auto m1 = tiny_model(KgeVariant::TransE, 5, {h, t}, {r});
    auto m2 = tiny_model(KgeVariant::TransE, 5, {h2, t2}, {r});
    CHECK(std::abs(score_triple(m1, 0, 0, 1) - score_triple(m2, 0, 0, 1)) <= 1e-9);
  }
}

TEST_CASE("RotatE with zero phases degenerates to negative distance") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(8), t(8);
    for (auto* v : {&h, &t})
      for (double& x : *v) x = rng.uniform(-2, 2);
    auto m = tiny_model(KgeVariant::RotatE, 4, {h, t}, {{0, 0, 0, 0}});
    double dist = 0.0;
    for (int i = 0; i < 8; ++i) dist += (h[i] - t[i]) * (h[i] - t[i]);
    CHECK(score_triple(m, 0, 0, 1) == Catch::Approx(-std::sqrt(dist)));
  }
}

TEST_CASE("ComplEx score matches a direct complex evaluation") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3;
    std::vector<double> h(2 * d), t(2 * d), r(2 * d);
    for (auto* v : {&h, &t, &r})
      for (double& x : *v) x = rng.uniform(-2, 2);
    auto m = tiny_model(KgeVariant::ComplEx, d, {h, t}, {r});
    double expected = 0.0;
    for (int i = 0; i < d; ++i) {
      std::complex<double> hv(h[i], h[d + i]), rv(r[i], r[d + i]), tv(t[i], t[d + i]);
      expected += (hv * rv * std::conj(tv)).real();
    }
    CHECK(score_triple(m, 0, 0, 1) == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("negative sampling respects types and finds the single hole") {
  // head type {a,b}, tail type {c,d}; positives all combinations except (b,d)
  HeteroGraph g;
  NodeTypeSchema heads, tails;
  heads.type_name = "h";
  heads.add_member("http://x/a");
  heads.add_member("http://x/b");
  tails.type_name = "t";
  tails.add_member("http://x/c");
  tails.add_member("http://x/d");
  g.node_types["h"] = heads;
  g.node_types["t"] = tails;
  EdgeTypeSchema et;
  et.key = {"h", "r", "t"};
  et.predicate_iri = "http://x/r";
  et.edges = {{0, 0}, {0, 1}, {1, 0}};
  g.edge_types[et.key] = et;
  g.rebuild_locator();

  KgeTrainConfig cfg;
  KgeModel m = make_kge_skeleton(g, KgeVariant::TransE, cfg);
  KgeTriples ctx = collect_kge_triples(g, m);

  Rng rng(5);
  // from (b,c) the only reachable non-positive is (b,d)
  std::array<int, 3> pos{1, 0, 2};  // b, r, c (tail ids offset by head count)
  auto neg = negative_sample(ctx, pos, rng);
  CHECK_FALSE(neg.false_negative_possible);
  CHECK(neg.triple == std::array<int, 3>{1, 0, 3});

  // from (a,c) every single-side corruption is positive -> flagged
  auto stuck = negative_sample(ctx, {0, 0, 2}, rng);
  CHECK(stuck.false_negative_possible);

  // corrupted triples keep endpoint types
  for (int i = 0; i < 500; ++i) {
    auto s = negative_sample(ctx, pos, rng);
    CHECK(s.triple[1] == 0);
    CHECK(s.triple[0] >= 0);
    CHECK(s.triple[0] < 2);
    CHECK(s.triple[2] >= 2);
    CHECK(s.triple[2] < 4);
  }
}

TEST_CASE("head/tail corruption ratio is balanced") {
  HeteroGraph g = testutil::planted_kge_graph();
  KgeTrainConfig cfg;
  KgeModel m = make_kge_skeleton(g, KgeVariant::TransE, cfg);
  KgeTriples ctx = collect_kge_triples(g, m);
  Rng rng(11);
  int heads = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto& pos = ctx.triples[rng.uniform_int(static_cast<int>(ctx.triples.size()))];
    auto neg = negative_sample(ctx, pos, rng);
    if (neg.triple[0] != pos[0]) ++heads;
  }
  double ratio = static_cast<double>(heads) / draws;
  CHECK(ratio == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("finite-difference check for each KGE loss") {
  for (KgeVariant variant : {KgeVariant::TransE, KgeVariant::DistMult, KgeVariant::ComplEx,
                             KgeVariant::RotatE}) {
    INFO(to_string(variant));
    double worst = 0.0;
    const int d = 4;
    const int w = (variant == KgeVariant::ComplEx || variant == KgeVariant::RotatE) ? 2 * d : d;
    const int rw = variant == KgeVariant::ComplEx ? 2 * d : d;
    for (int trial = 0; trial < 25; ++trial) {
      Rng rng(derive_seed(trial, to_string(variant)));
      Tensor h = testutil::random_param(1, w, rng, "h");
      Tensor t = testutil::random_param(1, w, rng, "t");
      Tensor h2 = testutil::random_param(1, w, rng, "h2");
      Tensor t2 = testutil::random_param(1, w, rng, "t2");
      Tensor r = testutil::random_param(1, rw, rng, "r");
      std::vector<Tensor> params{h, t, h2, t2, r};
      auto f = [&](Tape& tp) {
        Tensor sp = detail::kge_score(tp, variant, d, h, r, t);
        Tensor sn = detail::kge_score(tp, variant, d, h2, r, t2);
        return detail::kge_pair_loss(tp, variant, 1.0, sp, sn);
      };
      worst = std::max(worst, testutil::fd_max_rel_error(f, params));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("training separates positives from uniform negatives on a toy KG") {
  // 4 entities, relation r with the exact pattern a->b, c->d
  HeteroGraph g;
  NodeTypeSchema nt;
  nt.type_name = "e";
  for (int i = 0; i < 4; ++i) nt.add_member("http://x/e" + std::to_string(i));
  g.node_types["e"] = nt;
  EdgeTypeSchema et;
  et.key = {"e", "r", "e"};
  et.predicate_iri = "http://x/r";
  et.edges = {{0, 1}, {2, 3}};
  g.edge_types[et.key] = et;
  g.rebuild_locator();

  KgeTrainConfig cfg;
  cfg.d = 8;
  cfg.epochs = 60;
  cfg.seed = 1;
  auto res = train_kge(g, KgeVariant::TransE, cfg);
  auto ctx = collect_kge_triples(g, res.model);
  double pos_mean = 0.0;
  for (const auto& [h, r, t] : ctx.triples) pos_mean += score_triple(res.model, h, r, t);
  pos_mean /= static_cast<double>(ctx.triples.size());
  double neg_mean = 0.0;
  int count = 0;
  for (int h = 0; h < 4; ++h)
    for (int t = 0; t < 4; ++t) {
      if (ctx.is_positive(h, 0, t)) continue;
      neg_mean += score_triple(res.model, h, 0, t);
      ++count;
    }
  neg_mean /= count;
  CHECK(pos_mean > neg_mean);
}

TEST_CASE("zero epochs returns the seeded initialization") {
  HeteroGraph g = testutil::planted_kge_graph();
  KgeTrainConfig cfg;
  cfg.d = 6;
  cfg.epochs = 0;
  cfg.seed = 9;
  auto res = train_kge(g, KgeVariant::TransE, cfg);
  Rng rng(derive_seed(9, "kge-init"));
  const double limit = 6.0 / std::sqrt(6.0);
  for (size_t i = 0; i < res.model.entity.size(); ++i)
    CHECK(res.model.entity[i] == rng.uniform(-limit, limit));
}

TEST_CASE("same seed gives a bit-identical model") {
  HeteroGraph g = testutil::planted_kge_graph();
  KgeTrainConfig cfg;
  cfg.d = 8;
  cfg.epochs = 5;
  cfg.seed = 77;
  auto a = train_kge(g, KgeVariant::DistMult, cfg);
  auto b = train_kge(g, KgeVariant::DistMult, cfg);
  CHECK(a.model.entity == b.model.entity);
  CHECK(a.model.relation == b.model.relation);
}

TEST_CASE("x_t feature tables slice the entity matrix per type") {
  HeteroGraph g = testutil::planted_bipartite_graph(6, 8);
  KgeTrainConfig cfg;
  cfg.d = 4;
  cfg.epochs = 2;
  auto res = train_kge(g, KgeVariant::ComplEx, cfg);
  REQUIRE(res.x_t.count("user") == 1);
  REQUIRE(res.x_t.count("item") == 1);
  CHECK(res.x_t["user"].rows == 6);
  CHECK(res.x_t["item"].rows == 8);
  CHECK(res.x_t["user"].dim == 8);  // complex widening: 2d
  int id = res.model.entity_id("user", 3);
  for (int j = 0; j < 8; ++j)
    CHECK(res.x_t["user"].at(3, j) == res.model.entity_row(id)[j]);
}

TEST_CASE("filtered MRR reaches 0.9 on the planted toy KG") {
  double total = 0.0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    HeteroGraph g = testutil::planted_kge_graph();
    KgeTrainConfig cfg;
    cfg.seed = seed;
    auto res = train_kge(g, KgeVariant::TransE, cfg);
    auto ctx = collect_kge_triples(g, res.model);
    total += filtered_mrr_tail(res.model, ctx, ctx.triples);
  }
  INFO("5-seed mean filtered MRR: " << total / 5.0);
  CHECK(total / 5.0 >= 0.9);
}
