#pragma once

#include <functional>
#include <istream>
#include <sstream>

#include "rdf2rec/hetero_graph.hpp"

namespace rdf2rec {

struct FeatureConfig {
  int text_dim = 64;
  uint64_t seed = 0;
};

// Deterministic feature-hashing text embedding: tokens plus character
// trigrams, signed-hash counted into dim buckets, unit-normalized.
inline std::vector<double> embed_text(std::string_view text, int dim, uint64_t seed) {
  if (dim < 1) throw ConfigError("embed_text: dim must be >= 1");
  std::vector<double> v(dim, 0.0);
  uint64_t salt = splitmix64(seed ^ 0x7f3a5c96d2e18b44ull);
  auto bump = [&](std::string_view token) {
    uint64_t h = splitmix64(fnv1a64(token) ^ salt);
    double sign = (h >> 63) ? 1.0 : -1.0;
    v[h % static_cast<uint64_t>(dim)] += sign;
  };
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    bump(token);
    if (token.size() >= 3)
      for (size_t i = 0; i + 3 <= token.size(); ++i)
        bump(std::string_view(token).substr(i, 3));
    token.clear();
  };
  for (unsigned char c : text) {
    bool word = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
    if (c >= 'A' && c <= 'Z') {
      c = static_cast<unsigned char>(c - 'A' + 'a');
      word = true;
    }
    if (word)
      token.push_back(static_cast<char>(c));
    else
      flush();
  }
  flush();
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

namespace detail {

// first-seen literal per (member, predicate)
using PropertyValues = std::vector<std::optional<std::string>>;

inline std::map<std::pair<std::string, std::string>, PropertyValues> collect_literals(
    const HeteroGraph& g, const TripleStore& store) {
  std::map<std::pair<std::string, std::string>, PropertyValues> out;
  for (const auto& [tn, nt] : g.node_types)
    for (const auto& ap : nt.attribute_properties)
      out[{tn, ap.predicate}].assign(nt.members.size(), std::nullopt);
  const std::string rdf_type(kRdfType);
  for (const Triple& t : store.triples()) {
    if (t.predicate.lexical == rdf_type || t.object.kind != TermKind::Literal) continue;
    auto loc = g.node_locator.find(t.subject.node_id());
    if (loc == g.node_locator.end()) continue;
    auto it = out.find({loc->second.first, t.predicate.lexical});
    if (it == out.end()) continue;
    auto& slot = it->second[loc->second.second];
    if (!slot) slot = t.object.lexical;
  }
  return out;
}

inline void scaled_numeric_column(const PropertyValues& vals,
                                  const std::function<std::optional<double>(const std::string&)>& parse,
                                  std::vector<double>& col) {
  const int n = static_cast<int>(vals.size());
  col.assign(n, 0.0);
  std::vector<std::pair<int, double>> observed;
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!vals[i]) continue;
    auto v = parse(*vals[i]);
    if (!v) continue;  // unparsable treated as missing
    if (observed.empty()) {
      lo = hi = *v;
    } else {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
    observed.emplace_back(i, *v);
  }
  if (observed.empty()) {
    col.assign(n, 0.5);
    return;
  }
  double mean = 0.0;
  for (auto& [i, v] : observed) {
    double scaled = (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
    col[i] = scaled;
    mean += scaled;
  }
  mean /= static_cast<double>(observed.size());
  std::vector<bool> have(n, false);
  for (auto& [i, v] : observed) have[i] = true;
  for (int i = 0; i < n; ++i)
    if (!have[i]) col[i] = mean;
}

}  // namespace detail

// Per node type, x_c = horizontal concatenation of per-property blocks:
// numeric/datetime min-max scaled, boolean {0,1}, categorical one-hot, string
// hashed text embeddings.
inline void encode_literal_features(HeteroGraph& g, const TripleStore& store,
                                    const FeatureConfig& config = {}) {
  auto literals = detail::collect_literals(g, store);
  for (auto& [tn, nt] : g.node_types) {
    const int n = static_cast<int>(nt.members.size());
    std::vector<std::vector<double>> blocks;  // column-major blocks (width x n flattened)
    std::vector<ColumnBlock> spec;

    for (const auto& ap : nt.attribute_properties) {
      const auto& vals = literals[{tn, ap.predicate}];
      switch (ap.kind) {
        case LiteralKind::Numeric: {
          std::vector<double> col;
          detail::scaled_numeric_column(vals, [](const std::string& s) -> std::optional<double> {
            if (!detail::sniff_numeric(s)) return std::nullopt;
            return std::strtod(s.c_str(), nullptr);
          }, col);
          blocks.push_back(std::move(col));
          spec.push_back({ap.predicate, ap.kind, 1, false});
          break;
        }
        case LiteralKind::DateTime: {
          std::vector<double> col;
          detail::scaled_numeric_column(vals, [](const std::string& s) {
            return detail::parse_datetime_epoch(s);
          }, col);
          blocks.push_back(std::move(col));
          spec.push_back({ap.predicate, ap.kind, 1, false});
          break;
        }
        case LiteralKind::Boolean: {
          std::vector<double> col(n, 0.5);
          for (int i = 0; i < n; ++i)
            if (vals[i]) col[i] = (*vals[i] == "true" || *vals[i] == "1") ? 1.0 : 0.0;
          blocks.push_back(std::move(col));
          spec.push_back({ap.predicate, ap.kind, 1, false});
          break;
        }
        case LiteralKind::Categorical: {
          std::set<std::string> cats;
          for (const auto& v : vals)
            if (v) cats.insert(*v);
          std::vector<std::string> order(cats.begin(), cats.end());
          std::map<std::string, int> pos;
          for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
          int w = std::max<int>(1, static_cast<int>(order.size()));
          std::vector<double> block(static_cast<size_t>(w) * n, 0.0);
          for (int i = 0; i < n; ++i)
            if (vals[i]) block[static_cast<size_t>(pos[*vals[i]]) * n + i] = 1.0;
          blocks.push_back(std::move(block));
          spec.push_back({ap.predicate, ap.kind, w, false});
          break;
        }
        case LiteralKind::String: {
          int w = config.text_dim;
          std::vector<double> block(static_cast<size_t>(w) * n, 0.0);
          for (int i = 0; i < n; ++i) {
            if (!vals[i]) continue;  // missing -> zero vector
            auto e = embed_text(*vals[i], w, config.seed);
            for (int j = 0; j < w; ++j) block[static_cast<size_t>(j) * n + i] = e[j];
          }
          blocks.push_back(std::move(block));
          spec.push_back({ap.predicate, ap.kind, w, ap.nld});
          break;
        }
      }
    }

    FeatureTable ft;
    ft.rows = n;
    ft.provenance = Provenance::Content;
    if (blocks.empty()) {
      ft.dim = 1;
      ft.values.assign(static_cast<size_t>(n), 0.0);
      ft.content_empty = true;
      ft.column_spec.push_back({"content_empty", LiteralKind::String, 1, false});
    } else {
      int dim = 0;
      for (const auto& b : spec) dim += b.width;
      ft.dim = dim;
      ft.values.assign(static_cast<size_t>(n) * dim, 0.0);
      int off = 0;
      for (size_t bi = 0; bi < blocks.size(); ++bi) {
        int w = spec[bi].width;
        for (int j = 0; j < w; ++j)
          for (int i = 0; i < n; ++i)
            ft.at(i, off + j) = blocks[bi][static_cast<size_t>(j) * n + i];
        off += w;
      }
      ft.column_spec = spec;
    }
    ft.validate("content features of " + tn);
    g.content_features[tn] = std::move(ft);
  }
}

struct ImportReport {
  int rows_applied = 0;
  std::vector<std::string> unknown_iris;
  std::set<std::string> types_touched;
};

// Replaces the String-block region of x_c with externally computed text
// vectors. Types with at least one listed node get a single external block of
// the file's width; unlisted nodes of those types fall back to the built-in
// hash embedding of their concatenated string-property text.
inline ImportReport import_external_embeddings(HeteroGraph& g, std::istream& in,
                                               const TripleStore& store,
                                               const FeatureConfig& config = {}) {
  ImportReport report;
  std::map<std::string, std::map<int, std::vector<double>>> by_type;  // type -> row -> vec
  int dim = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2)
      throw DataError("embeddings row " + std::to_string(lineno) + ": expected iri and values");
    int d = static_cast<int>(fields.size()) - 1;
    if (dim < 0) dim = d;
    if (d != dim)
      throw DataError("embeddings row " + std::to_string(lineno) + ": expected " +
                      std::to_string(dim) + " values, got " + std::to_string(d));
    auto loc = g.node_locator.find(fields[0]);
    if (loc == g.node_locator.end()) {
      report.unknown_iris.push_back(fields[0]);
      continue;
    }
    std::vector<double> vec(dim);
    for (int j = 0; j < dim; ++j) {
      if (!detail::sniff_numeric(fields[j + 1]))
        throw DataError("embeddings row " + std::to_string(lineno) + ": bad number '" +
                        fields[j + 1] + "'");
      vec[j] = std::strtod(fields[j + 1].c_str(), nullptr);
    }
    by_type[loc->second.first][loc->second.second] = std::move(vec);
    ++report.rows_applied;
  }
  if (by_type.empty()) return report;

  auto literals = detail::collect_literals(g, store);
  for (auto& [tn, rows] : by_type) {
    auto fit = g.content_features.find(tn);
    if (fit == g.content_features.end())
      throw DataError("embeddings reference type '" + tn + "' with no content features");
    FeatureTable& old = fit->second;
    const NodeTypeSchema& nt = g.node_types.at(tn);
    const int n = old.rows;

    FeatureTable next;
    next.rows = n;
    next.provenance = Provenance::Content;
    int off = 0;
    bool external_placed = false;
    std::vector<std::pair<int, int>> keep;  // (old offset, width) of non-string blocks
    int old_off = 0;
    for (const auto& b : old.column_spec) {
      if (b.kind != LiteralKind::String || b.source == "content_empty") {
        keep.emplace_back(old_off, b.width);
        next.column_spec.push_back(b);
      }
      old_off += b.width;
    }
    bool any_nld = false;
    for (const auto& ap : nt.attribute_properties)
      if (ap.kind == LiteralKind::String && ap.nld) any_nld = true;
    next.column_spec.push_back({"external_text", LiteralKind::String, dim, any_nld});
    next.dim = dim;
    for (const auto& [o, w] : keep) next.dim += w;
    next.values.assign(static_cast<size_t>(n) * next.dim, 0.0);

    for (int i = 0; i < n; ++i) {
      off = 0;
      for (const auto& [o, w] : keep) {
        for (int j = 0; j < w; ++j) next.at(i, off + j) = old.at(i, o + j);
        off += w;
      }
      auto rit = rows.find(i);
      if (rit != rows.end()) {
        for (int j = 0; j < dim; ++j) next.at(i, off + j) = rit->second[j];
      } else {
        // built-in fallback for unlisted nodes, at the external width
        std::string text;
        for (const auto& ap : nt.attribute_properties) {
          if (ap.kind != LiteralKind::String) continue;
          const auto& vals = literals[{tn, ap.predicate}];
          if (vals[i]) {
            if (!text.empty()) text += ' ';
            text += *vals[i];
          }
        }
        if (!text.empty()) {
          auto e = embed_text(text, dim, config.seed);
          for (int j = 0; j < dim; ++j) next.at(i, off + j) = e[j];
        }
      }
      external_placed = true;
    }
    (void)external_placed;
    next.validate("imported content features of " + tn);
    report.types_touched.insert(tn);
    old = std::move(next);
  }
  return report;
}

}  // namespace rdf2rec
