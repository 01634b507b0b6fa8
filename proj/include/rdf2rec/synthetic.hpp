#pragma once

#include "rdf2rec/rdf.hpp"

namespace rdf2rec {

// Desk-scale synthetic RDF generators with planted block structure. The
// scholarly profile mimics a publications KG (authors, works, venues,
// concepts), the tasks profile a papers/datasets/tasks/methods KG. Content
// literals draw from per-community vocabularies so text features carry the
// planted signal, as object properties do.
struct SyntheticConfig {
  int communities = 4;
  double p_within = 0.3;   // target-edge probability inside a community
  double p_cross = 0.02;   // across communities
  // scholarly profile sizes
  int authors = 88;
  int works = 160;
  int venues = 30;
  int concepts = 192;
  // tasks profile sizes
  int papers = 140;
  int datasets = 60;
  int tasks = 40;
  int methods = 60;
};

struct SyntheticResult {
  TripleStore store;
  // sidecar: node id -> planted community, for the block-structure check
  std::vector<std::pair<std::string, int>> communities;

  std::string communities_tsv() const {
    std::string out = "node_iri\tcommunity\n";
    for (const auto& [iri, c] : communities) out += iri + "\t" + std::to_string(c) + "\n";
    return out;
  }
};

namespace detail {

class WordPool {
 public:
  WordPool(Rng& rng, int communities, int words_per_pool) : communities_(communities) {
    static const char* syllables[] = {"ba", "ce", "di", "fo", "gu", "ha", "ki", "lo",
                                      "mu", "na", "pe", "qui", "ro", "sa", "ti", "vu",
                                      "wa", "xe", "yo", "zin", "tor", "mel", "gan", "pra"};
    const int ns = static_cast<int>(sizeof(syllables) / sizeof(syllables[0]));
    auto word = [&]() {
      std::string w;
      int parts = 2 + rng.uniform_int(2);
      for (int i = 0; i < parts; ++i) w += syllables[rng.uniform_int(ns)];
      return w;
    };
    auto fill = [&](std::vector<std::string>& pool) {
      pool.reserve(words_per_pool);
      for (int i = 0; i < words_per_pool; ++i) pool.push_back(word());
    };
    fill(generic_);
    pools_.resize(communities);
    for (auto& pool : pools_) fill(pool);
    subpools_.resize(static_cast<size_t>(communities) * kEras);
    for (auto& pool : subpools_) fill(pool);
  }

  static constexpr int kEras = 4;

  // community- and era-flavored text; era -1 skips the era pool
  std::string text(Rng& rng, int community, int words, int era = -1) const {
    std::string out;
    for (int i = 0; i < words; ++i) {
      if (i) out += ' ';
      double roll = rng.uniform();
      const std::vector<std::string>* pool;
      if (era >= 0 && roll < 0.65)
        pool = &subpools_[static_cast<size_t>(community) * kEras + era];
      else if (roll < 0.9)
        pool = &pools_[community];
      else
        pool = &generic_;
      out += (*pool)[rng.uniform_int(static_cast<int>(pool->size()))];
    }
    return out;
  }

  // vocabulary mixed across every community, for bridge entities
  std::string mixed_text(Rng& rng, int words) const {
    std::string out;
    for (int i = 0; i < words; ++i) {
      if (i) out += ' ';
      const auto& pool =
          rng.bernoulli(0.5) ? pools_[rng.uniform_int(communities_)] : generic_;
      out += pool[rng.uniform_int(static_cast<int>(pool.size()))];
    }
    return out;
  }

 private:
  int communities_;
  std::vector<std::string> generic_;
  std::vector<std::vector<std::string>> pools_;
  std::vector<std::vector<std::string>> subpools_;
};

inline TermValue xsd_literal(const std::string& lex, std::string_view dt) {
  return TermValue::literal(lex, std::string(dt));
}

}  // namespace detail

inline SyntheticResult generate_scholarly(uint64_t seed, const SyntheticConfig& cfg = {}) {
  SyntheticResult out;
  Rng rng(derive_seed(seed, "synthetic-scholarly"));
  detail::WordPool vocab(rng, cfg.communities, 40);
  const std::string base = "http://example.org/scholarly/";
  const std::string rdf_type(kRdfType);

  auto iri = [&](const std::string& kind, int i) {
    return base + kind + "/" + std::to_string(i);
  };
  auto add = [&](const std::string& s, const std::string& p, TermValue o) {
    out.store.add({TermValue::iri(s), TermValue::iri(p), std::move(o)});
  };
  auto add_type = [&](const std::string& s, const std::string& cls) {
    add(s, rdf_type, TermValue::iri(base + "class/" + cls));
  };

  // Planted structure: four communities, each refined by four eras and six
  // micro-topics. Work-author links favor matching (community, era, topic);
  // cross-community mass concentrates on bridge authors. Author literals
  // carry community and era; the topic lives only in the concept
  // neighborhood, so it is reachable in the full heterogeneous setting and
  // invisible to the bipartite one.
  constexpr int kTopics = 6;
  const int eras = detail::WordPool::kEras;
  auto era_of = [&](int x) { return (x / cfg.communities) % detail::WordPool::kEras; };
  auto topic_of = [&](int x) { return (x / (cfg.communities * eras)) % kTopics; };
  auto bridge_author = [&](int a) { return (a / cfg.communities) % 5 == 0; };

  // authors: name (short) + activeSince (numeric) + affiliation (NLD)
  for (int i = 0; i < cfg.authors; ++i) {
    std::string a = iri("author", i);
    int c = i % cfg.communities;
    int era = era_of(i);
    add_type(a, "Author");
    add(a, base + "prop/name", TermValue::literal(vocab.text(rng, c, 2)));
    add(a, base + "prop/activeSince",
        detail::xsd_literal(std::to_string(1998 + era * 6 + rng.uniform_int(7)),
                            "http://www.w3.org/2001/XMLSchema#integer"));
    int len = 9 + rng.uniform_int(5);
    add(a, base + "prop/affiliation",
        TermValue::literal(bridge_author(i) ? vocab.mixed_text(rng, len)
                                            : vocab.text(rng, c, len, era)));
    out.communities.emplace_back(a, c);
  }
  // venues: short name only (no NLD, exercises the nld-or-tb fallback)
  for (int i = 0; i < cfg.venues; ++i) {
    std::string v = iri("venue", i);
    add_type(v, "Venue");
    add(v, base + "prop/name", TermValue::literal(vocab.text(rng, i % cfg.communities, 2)));
  }
  // concepts: partitioned by (community, era, topic); descriptions carry the
  // era vocabulary
  for (int i = 0; i < cfg.concepts; ++i) {
    std::string cpt = iri("concept", i);
    int c = i % cfg.communities;
    int era = era_of(i);
    add_type(cpt, "Concept");
    add(cpt, base + "prop/description",
        TermValue::literal(vocab.text(rng, c, 10 + rng.uniform_int(6), era)));
  }
  // the concept ids covering a given (community, era, topic) cell
  auto concept_cell = [&](int c, int era, int topic) {
    std::vector<int> ids;
    for (int m = (topic * eras + era) * cfg.communities + c; m < cfg.concepts;
         m += cfg.communities * eras * kTopics)
      ids.push_back(m);
    if (ids.empty()) ids.push_back((era * cfg.communities + c) % cfg.concepts);
    return ids;
  };
  // works: title/abstract carry community vocabulary only; the work's era is
  // expressed through its concept links, so it is reachable in the full
  // heterogeneous setting and absent from the bipartite one. Year stays
  // uninformative for the era.
  for (int i = 0; i < cfg.works; ++i) {
    std::string w = iri("work", i);
    int c = i % cfg.communities;
    add_type(w, "Work");
    add(w, base + "prop/title",
        TermValue::literal(vocab.text(rng, c, 2 + rng.uniform_int(3))));
    add(w, base + "prop/abstract",
        TermValue::literal(vocab.text(rng, c, 12 + rng.uniform_int(8))));
    int year = 1998 + rng.uniform_int(26);
    add(w, base + "prop/year",
        detail::xsd_literal(std::to_string(year), "http://www.w3.org/2001/XMLSchema#integer"));
    bool open = rng.bernoulli(0.15 + 0.18 * c);
    add(w, base + "prop/openAccess",
        detail::xsd_literal(open ? "true" : "false", kXsdBoolean));
    out.communities.emplace_back(w, c);
  }

  // hasAuthor: within a community the edge weight rewards matching era and
  // matching topic; weights are calibrated numerically (with clipping) so the
  // realized within-community rate averages p_within exactly. Cross-community
  // probability concentrates on bridge authors and averages p_cross.
  {
    auto weight = [&](int w, int a) {
      double g = era_of(w) == era_of(a) ? 3.0 : 0.55;
      if (topic_of(w) == topic_of(a)) g *= 1.9;
      return g;
    };
    double lambda = 1.0;
    for (int iter = 0; iter < 20; ++iter) {
      double total = 0.0;
      long pairs = 0;
      for (int w = 0; w < cfg.works; ++w)
        for (int a = 0; a < cfg.authors; ++a) {
          if (w % cfg.communities != a % cfg.communities) continue;
          total += std::min(1.0, lambda * weight(w, a));
          ++pairs;
        }
      if (pairs == 0) break;
      double avg = total / static_cast<double>(pairs);
      if (std::abs(avg - cfg.p_within) < 1e-9) break;
      lambda *= cfg.p_within / avg;
    }
    for (int w = 0; w < cfg.works; ++w) {
      int cw = w % cfg.communities;
      for (int a = 0; a < cfg.authors; ++a) {
        double p;
        if (cw == a % cfg.communities)
          p = std::min(1.0, lambda * weight(w, a));
        else
          p = bridge_author(a) ? cfg.p_cross * 5.0 : 0.0;
        if (rng.bernoulli(p))
          add(iri("work", w), base + "prop/hasAuthor", TermValue::iri(iri("author", a)));
      }
    }
  }
  // cites: directed work-work links, mostly within (community, era)
  for (int w = 0; w < cfg.works; ++w) {
    int cw = w % cfg.communities;
    for (int v = 0; v < cfg.works; ++v) {
      if (v == w) continue;
      double p = (v % cfg.communities == cw)
                     ? (era_of(v) == era_of(w) ? 0.05 : 0.012)
                     : 0.002;
      if (rng.bernoulli(p))
        add(iri("work", w), base + "prop/cites", TermValue::iri(iri("work", v)));
    }
  }
  // hasConcept / expertIn: works and authors both link into their
  // (community, era, topic) concept cell, plus an occasional global one
  auto link_concepts = [&](const std::string& subject, const char* prop, int c, int era,
                           int topic) {
    auto cell = concept_cell(c, era, topic);
    std::set<int> chosen;
    chosen.insert(cell[rng.uniform_int(static_cast<int>(cell.size()))]);
    chosen.insert(cell[rng.uniform_int(static_cast<int>(cell.size()))]);
    if (rng.bernoulli(0.12)) chosen.insert(rng.uniform_int(cfg.concepts));
    for (int cpt : chosen)
      add(subject, base + std::string("prop/") + prop, TermValue::iri(iri("concept", cpt)));
  };
  for (int w = 0; w < cfg.works; ++w)
    link_concepts(iri("work", w), "hasConcept", w % cfg.communities, era_of(w), topic_of(w));
  for (int a = 0; a < cfg.authors; ++a)
    link_concepts(iri("author", a), "expertIn", a % cfg.communities, era_of(a), topic_of(a));
  // publishedIn: community venue pools
  for (int w = 0; w < cfg.works; ++w) {
    int cw = w % cfg.communities;
    int local = rng.uniform_int(std::max(1, cfg.venues / cfg.communities));
    int v = local * cfg.communities + cw;
    if (v >= cfg.venues) v = cw % cfg.venues;
    add(iri("work", w), base + "prop/publishedIn", TermValue::iri(iri("venue", v)));
  }
  // coauthor: author-author, denser within (community, era)
  for (int a = 0; a < cfg.authors; ++a) {
    int ca = a % cfg.communities;
    for (int b = a + 1; b < cfg.authors; ++b) {
      double p = (b % cfg.communities == ca)
                     ? (era_of(b) == era_of(a) ? 0.22 : 0.05)
                     : 0.004;
      if (rng.bernoulli(p))
        add(iri("author", a), base + "prop/coauthor", TermValue::iri(iri("author", b)));
    }
  }
  return out;
}

inline SyntheticResult generate_tasks(uint64_t seed, const SyntheticConfig& cfg = {}) {
  SyntheticResult out;
  Rng rng(derive_seed(seed, "synthetic-tasks"));
  detail::WordPool vocab(rng, cfg.communities, 40);
  const std::string base = "http://example.org/lpwc/";
  const std::string rdf_type(kRdfType);

  auto iri = [&](const std::string& kind, int i) {
    return base + kind + "/" + std::to_string(i);
  };
  auto add = [&](const std::string& s, const std::string& p, TermValue o) {
    out.store.add({TermValue::iri(s), TermValue::iri(p), std::move(o)});
  };
  auto add_type = [&](const std::string& s, const std::string& cls) {
    add(s, rdf_type, TermValue::iri(base + "class/" + cls));
  };

  for (int i = 0; i < cfg.datasets; ++i) {
    std::string d = iri("dataset", i);
    int c = i % cfg.communities;
    add_type(d, "Dataset");
    add(d, base + "prop/name", TermValue::literal(vocab.text(rng, c, 2)));
    add(d, base + "prop/description",
        TermValue::literal(vocab.text(rng, c, 10 + rng.uniform_int(6))));
    out.communities.emplace_back(d, c);
  }
  for (int i = 0; i < cfg.tasks; ++i) {
    std::string t = iri("task", i);
    int c = i % cfg.communities;
    add_type(t, "Task");
    add(t, base + "prop/label", TermValue::literal(vocab.text(rng, c, 2)));
    out.communities.emplace_back(t, c);
  }
  for (int i = 0; i < cfg.methods; ++i) {
    std::string m = iri("method", i);
    add_type(m, "Method");
    add(m, base + "prop/label", TermValue::literal(vocab.text(rng, i % cfg.communities, 2)));
  }
  for (int i = 0; i < cfg.papers; ++i) {
    std::string p = iri("paper", i);
    int c = i % cfg.communities;
    add_type(p, "Paper");
    add(p, base + "prop/title", TermValue::literal(vocab.text(rng, c, 3 + rng.uniform_int(3))));
    add(p, base + "prop/abstract",
        TermValue::literal(vocab.text(rng, c, 12 + rng.uniform_int(8))));
    add(p, base + "prop/year",
        detail::xsd_literal(std::to_string(2014 + rng.uniform_int(10)),
                            "http://www.w3.org/2001/XMLSchema#integer"));
  }

  // benchmarks: planted dataset-task block structure (the target edge type);
  // cross links concentrate on bridge tasks, rates as in the scholarly profile
  for (int d = 0; d < cfg.datasets; ++d) {
    int cd = d % cfg.communities;
    for (int t = 0; t < cfg.tasks; ++t) {
      bool bridge = (t / cfg.communities) % 5 == 0;
      double p = (t % cfg.communities == cd) ? cfg.p_within
                                             : (bridge ? cfg.p_cross * 5.0 : 0.0);
      if (rng.bernoulli(p))
        add(iri("dataset", d), base + "prop/benchmarks", TermValue::iri(iri("task", t)));
    }
  }
  for (int p = 0; p < cfg.papers; ++p) {
    int cp = p % cfg.communities;
    auto pick = [&](int n) {
      int local = rng.uniform_int(std::max(1, n / cfg.communities));
      int idx = local * cfg.communities + cp;
      return idx < n ? idx : cp % n;
    };
    add(iri("paper", p), base + "prop/usesDataset", TermValue::iri(iri("dataset", pick(cfg.datasets))));
    add(iri("paper", p), base + "prop/addressesTask", TermValue::iri(iri("task", pick(cfg.tasks))));
    add(iri("paper", p), base + "prop/implementsMethod",
        TermValue::iri(iri("method", pick(cfg.methods))));
    if (rng.bernoulli(0.4))
      add(iri("paper", p), base + "prop/usesDataset",
          TermValue::iri(iri("dataset", pick(cfg.datasets))));
  }
  return out;
}

inline SyntheticResult generate_synthetic(const std::string& profile, uint64_t seed,
                                          const SyntheticConfig& cfg = {}) {
  if (profile == "scholarly") return generate_scholarly(seed, cfg);
  if (profile == "tasks") return generate_tasks(seed, cfg);
  throw ConfigError("unknown profile '" + profile + "' (expected scholarly|tasks)");
}

}  // namespace rdf2rec
