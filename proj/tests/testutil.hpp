#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rdf2rec/common.hpp"
#include "rdf2rec/hetero_graph.hpp"
#include "rdf2rec/rdf.hpp"
#include "rdf2rec/tensor.hpp"

namespace testutil {

using namespace rdf2rec;

// Central finite-difference check: rebuilds the loss via `f` for nudged
// parameter entries and compares against analytic gradients from backward().
// Returns the maximum relative error over all parameter entries.
inline double fd_max_rel_error(const std::function<Tensor(Tape&)>& f,
                               std::vector<Tensor> params, double eps = 1e-5) {
  Tape tape;
  Tensor loss = f(tape);
  zero_grad(params);
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) analytic.push_back(p.grad());
  tape.clear();

  auto eval = [&]() {
    Tape t;
    double v = f(t).scalar();
    t.clear();
    return v;
  };

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& v = params[pi].values();
    for (size_t i = 0; i < v.size(); ++i) {
      double save = v[i];
      v[i] = save + eps;
      double up = eval();
      v[i] = save - eps;
      double down = eval();
      v[i] = save;
      double fd = (up - down) / (2.0 * eps);
      double a = analytic[pi][i];
      double denom = std::max({1e-6, std::abs(a), std::abs(fd)});
      worst = std::max(worst, std::abs(a - fd) / denom);
    }
  }
  return worst;
}

inline Tensor random_const(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(r) * c);
  for (double& x : v) x = rng.uniform(lo, hi);
  return make_const(r, c, std::move(v));
}

inline Tensor random_param(int r, int c, Rng& rng, std::string name = "p",
                           double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(r) * c);
  for (double& x : v) x = rng.uniform(lo, hi);
  return make_param(r, c, std::move(v), std::move(name));
}

// Keeps values away from activation kinks so central differences stay clean.
inline void nudge_from_zero(Tensor& t, double margin = 5e-3) {
  for (double& x : t.values())
    if (std::abs(x) < margin) x += (x >= 0 ? margin : -margin);
}

// ---------------------------------------------------------------------------
// Random N-Triples corpus covering all term kinds and escape forms.

inline std::string random_token(Rng& rng, int min_len = 3, int max_len = 10) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  int len = min_len + rng.uniform_int(max_len - min_len + 1);
  std::string out;
  for (int i = 0; i < len; ++i) out.push_back(alphabet[rng.uniform_int(36)]);
  return out;
}

inline std::string random_literal_text(Rng& rng) {
  std::string out;
  int n = 1 + rng.uniform_int(24);
  for (int i = 0; i < n; ++i) {
    switch (rng.uniform_int(12)) {
      case 0: out.push_back('"'); break;
      case 1: out.push_back('\\'); break;
      case 2: out.push_back('\n'); break;
      case 3: out.push_back('\t'); break;
      case 4: out.push_back('\r'); break;
      case 5: out += "\xc3\xa9"; break;        // e-acute
      case 6: out += "\xe6\x97\xa5"; break;    // CJK
      default: out.push_back(static_cast<char>('a' + rng.uniform_int(26)));
    }
  }
  return out;
}

inline TermValue random_resource(Rng& rng) {
  if (rng.uniform_int(5) == 0) return TermValue::blank("b" + random_token(rng));
  return TermValue::iri("http://example.org/" + random_token(rng) + "/" + random_token(rng));
}

inline TermValue random_object(Rng& rng) {
  switch (rng.uniform_int(5)) {
    case 0:
    case 1: return random_resource(rng);
    case 2: return TermValue::literal(random_literal_text(rng));
    case 3: return TermValue::literal(random_literal_text(rng), {},
                                      rng.coin() ? "en" : "de-DE");
    default:
      return TermValue::literal(std::to_string(rng.uniform_int(1000)),
                                std::string(kXsdInteger));
  }
}

inline TripleStore random_store(Rng& rng, int statements) {
  TripleStore s;
  for (int i = 0; i < statements; ++i) {
    Triple t;
    t.subject = random_resource(rng);
    t.predicate = TermValue::iri("http://example.org/p/" + random_token(rng, 2, 6));
    t.object = random_object(rng);
    s.add(std::move(t));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Toy stores and graphs reused across suites.

inline TripleStore figure2_store() {
  // work --hasAuthor--> author plus a couple of literals
  std::string nt =
      "<http://x/w1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Work> .\n"
      "<http://x/w2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Work> .\n"
      "<http://x/w3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Work> .\n"
      "<http://x/a1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Author> .\n"
      "<http://x/a2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Author> .\n"
      "<http://x/a3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Author> .\n"
      "<http://x/a4> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Author> .\n"
      "<http://x/w1> <http://x/hasAuthor> <http://x/a1> .\n"
      "<http://x/w1> <http://x/hasAuthor> <http://x/a2> .\n"
      "<http://x/w2> <http://x/hasAuthor> <http://x/a2> .\n"
      "<http://x/w2> <http://x/hasAuthor> <http://x/a3> .\n"
      "<http://x/w3> <http://x/hasAuthor> <http://x/a3> .\n"
      "<http://x/w3> <http://x/hasAuthor> <http://x/a4> .\n"
      "<http://x/w1> <http://x/title> \"t one\" .\n"
      "<http://x/w2> <http://x/title> \"t two\" .\n"
      "<http://x/w3> <http://x/title> \"t three\" .\n";
  return parse_ntriples(nt);
}

// 20 entities in two blocks with two bijective relations: r0 pairs block
// members i -> i+10, r1 pairs i+10 -> i.
inline HeteroGraph planted_kge_graph() {
  HeteroGraph g;
  NodeTypeSchema nt;
  nt.type_name = "item";
  nt.class_iri = "http://toy/Item";
  for (int i = 0; i < 20; ++i) nt.add_member("http://toy/i" + std::to_string(i));
  g.node_types["item"] = nt;
  EdgeTypeSchema r0;
  r0.key = {"item", "r0", "item"};
  r0.predicate_iri = "http://toy/r0";
  for (int i = 0; i < 10; ++i) r0.edges.emplace_back(i, i + 10);
  EdgeTypeSchema r1;
  r1.key = {"item", "r1", "item"};
  r1.predicate_iri = "http://toy/r1";
  for (int i = 0; i < 10; ++i) r1.edges.emplace_back(i + 10, i);
  g.edge_types[r0.key] = r0;
  g.edge_types[r1.key] = r1;
  for (const EdgeKey& k : {r0.key, r1.key}) {
    EdgeTypeSchema rev;
    rev.key = {k.dst, k.rel + "_rev", k.src};
    rev.predicate_iri = g.edge_types[k].predicate_iri;
    rev.reverse = true;
    for (auto [s, d] : g.edge_types[k].edges) rev.edges.emplace_back(d, s);
    g.edge_types[rev.key] = rev;
  }
  g.rebuild_locator();
  return g;
}

// Bipartite users/items graph with two planted communities; the positive
// class is exactly the within-community pairs.
inline HeteroGraph planted_bipartite_graph(int users = 40, int items = 40) {
  HeteroGraph g;
  NodeTypeSchema ut, it;
  ut.type_name = "user";
  it.type_name = "item";
  for (int i = 0; i < users; ++i) ut.add_member("http://toy/u" + std::to_string(i));
  for (int i = 0; i < items; ++i) it.add_member("http://toy/v" + std::to_string(i));
  g.node_types["user"] = ut;
  g.node_types["item"] = it;
  EdgeTypeSchema likes;
  likes.key = {"user", "likes", "item"};
  likes.predicate_iri = "http://toy/likes";
  for (int u = 0; u < users; ++u)
    for (int v = 0; v < items; ++v) {
      bool same = (u < users / 2) == (v < items / 2);
      if (same) likes.edges.emplace_back(u, v);
    }
  EdgeTypeSchema rev;
  rev.key = {"item", "likes_rev", "user"};
  rev.predicate_iri = likes.predicate_iri;
  rev.reverse = true;
  for (auto [s, d] : likes.edges) rev.edges.emplace_back(d, s);
  g.edge_types[likes.key] = likes;
  g.edge_types[rev.key] = rev;
  // content features: community-correlated 4-dim vectors plus noise
  Rng rng(99);
  for (auto* nt : {&g.node_types["user"], &g.node_types["item"]}) {
    FeatureTable ft;
    ft.rows = static_cast<int>(nt->members.size());
    ft.dim = 4;
    ft.values.assign(static_cast<size_t>(ft.rows) * 4, 0.0);
    for (int i = 0; i < ft.rows; ++i) {
      int comm = i < ft.rows / 2 ? 0 : 1;
      for (int j = 0; j < 4; ++j)
        ft.at(i, j) = (j % 2 == comm ? 1.0 : 0.0) + 0.1 * rng.uniform(-1.0, 1.0);
    }
    ft.column_spec.push_back({"toy", LiteralKind::Numeric, 4, false});
    g.content_features[nt->type_name] = std::move(ft);
  }
  g.rebuild_locator();
  return g;
}

}  // namespace testutil
