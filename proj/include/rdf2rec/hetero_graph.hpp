#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rdf2rec/rdf.hpp"

namespace rdf2rec {

enum class LiteralKind { String, Numeric, Boolean, Categorical, DateTime };

inline const char* to_string(LiteralKind k) {
  switch (k) {
    case LiteralKind::String: return "string";
    case LiteralKind::Numeric: return "numeric";
    case LiteralKind::Boolean: return "boolean";
    case LiteralKind::Categorical: return "categorical";
    case LiteralKind::DateTime: return "datetime";
  }
  return "?";
}

inline LiteralKind literal_kind_from_string(std::string_view s) {
  if (s == "string") return LiteralKind::String;
  if (s == "numeric") return LiteralKind::Numeric;
  if (s == "boolean") return LiteralKind::Boolean;
  if (s == "categorical") return LiteralKind::Categorical;
  if (s == "datetime") return LiteralKind::DateTime;
  throw DataError("unknown literal kind '" + std::string(s) + "'");
}

enum class Provenance { Content, Topology, OneHot, Combined };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Content: return "content";
    case Provenance::Topology: return "topology";
    case Provenance::OneHot: return "one_hot";
    case Provenance::Combined: return "combined";
  }
  return "?";
}

struct ColumnBlock {
  std::string source;  // predicate IRI, "kge:<variant>", "one_hot", ...
  LiteralKind kind = LiteralKind::String;
  int width = 0;
  bool nld = false;
};

struct FeatureTable {
  int rows = 0;
  int dim = 0;
  std::vector<double> values;  // rows x dim, row-major
  Provenance provenance = Provenance::Content;
  std::string strategy;  // set when provenance == Combined
  std::vector<ColumnBlock> column_spec;
  bool content_empty = false;

  double& at(int r, int c) { return values[static_cast<size_t>(r) * dim + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * dim + c]; }

  static FeatureTable zeros(int rows, int dim, Provenance prov) {
    FeatureTable t;
    t.rows = rows;
    t.dim = dim;
    t.values.assign(static_cast<size_t>(rows) * dim, 0.0);
    t.provenance = prov;
    return t;
  }

  // Invariants: finite entries, dim >= 1, block widths sum to dim.
  void validate(const std::string& context) const {
    if (dim < 1) throw DataError(context + ": feature dim must be >= 1");
    if (values.size() != static_cast<size_t>(rows) * dim)
      throw DataError(context + ": value count does not match rows x dim");
    for (double v : values)
      if (!std::isfinite(v)) throw DataError(context + ": non-finite feature value");
    if (!column_spec.empty()) {
      int w = 0;
      for (const auto& b : column_spec) w += b.width;
      if (w != dim) throw DataError(context + ": column_spec widths sum to " +
                                    std::to_string(w) + ", dim is " + std::to_string(dim));
    }
  }
};

struct AttributeProperty {
  std::string predicate;
  LiteralKind kind = LiteralKind::String;
  bool nld = false;
};

struct NodeTypeSchema {
  std::string type_name;
  std::string class_iri;                       // empty for __untyped__
  std::vector<std::string> members;            // node ids (IRI or "_:label"), first-seen order
  std::unordered_map<std::string, int> member_index;
  std::vector<AttributeProperty> attribute_properties;  // sorted by predicate IRI

  int add_member(const std::string& id) {
    auto [it, inserted] = member_index.emplace(id, static_cast<int>(members.size()));
    if (inserted) members.push_back(id);
    return it->second;
  }
  bool has_nld() const {
    for (const auto& a : attribute_properties)
      if (a.nld) return true;
    return false;
  }
};

struct EdgeKey {
  std::string src;
  std::string rel;
  std::string dst;

  std::string str() const { return src + "__" + rel + "__" + dst; }
  static EdgeKey from_str(const std::string& s) {
    size_t p1 = s.find("__");
    size_t p2 = s.rfind("__");
    if (p1 == std::string::npos || p2 == p1)
      throw ConfigError("edge key must look like src__rel__dst, got '" + s + "'");
    return EdgeKey{s.substr(0, p1), s.substr(p1 + 2, p2 - p1 - 2), s.substr(p2 + 2)};
  }
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey& a, const EdgeKey& b) {
    return std::tie(a.src, a.rel, a.dst) <=> std::tie(b.src, b.rel, b.dst);
  }
};

struct EdgeTypeSchema {
  EdgeKey key;
  std::string predicate_iri;
  std::vector<std::pair<int, int>> edges;  // deduplicated (src index, dst index)
  bool reverse = false;                    // derived _rev type
};

struct HeteroGraph {
  std::map<std::string, NodeTypeSchema> node_types;
  std::map<EdgeKey, EdgeTypeSchema> edge_types;
  std::map<std::string, FeatureTable> content_features;   // x_c
  std::map<std::string, FeatureTable> topology_features;  // x_t

  // node id -> (type, member index)
  std::unordered_map<std::string, std::pair<std::string, int>> node_locator;

  void rebuild_locator() {
    node_locator.clear();
    for (const auto& [name, nt] : node_types)
      for (size_t i = 0; i < nt.members.size(); ++i)
        node_locator.emplace(nt.members[i], std::make_pair(name, static_cast<int>(i)));
  }

  long num_nodes() const {
    long n = 0;
    for (const auto& [_, nt] : node_types) n += static_cast<long>(nt.members.size());
    return n;
  }
  long num_edges() const {
    long n = 0;
    for (const auto& [_, et] : edge_types) n += static_cast<long>(et.edges.size());
    return n;
  }
  bool has_edge_type(const EdgeKey& k) const { return edge_types.count(k) > 0; }
};

struct SchemaConfig {
  std::map<std::string, std::string> class_pins;     // class IRI -> type name
  std::set<std::string> nld_properties;              // predicate IRIs forced to NLD
  std::set<std::string> symmetric_predicates;        // skip _rev for self-type edges
  int cat_threshold = 32;
  bool keep_untyped = false;
  double nld_min_mean_length = 20.0;
};

inline constexpr const char* kUntypedTypeName = "__untyped__";

struct Schemas {
  std::map<std::string, NodeTypeSchema> node_types;
  std::map<EdgeKey, EdgeTypeSchema> edge_types;  // keys and predicates; edges empty
  std::unordered_map<std::string, std::string> resource_type;  // node id -> type name
  long untyped_dropped = 0;  // resources without a type, when keep_untyped is off
  SchemaConfig config;
};

namespace detail {

inline bool sniff_numeric(std::string_view s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::string tmp(s);
  double v = std::strtod(tmp.c_str(), &end);
  (void)v;
  return end == tmp.c_str() + tmp.size();
}

inline bool sniff_boolean(std::string_view s) { return s == "true" || s == "false"; }

inline bool sniff_date(std::string_view s) {
  // YYYY-MM-DD prefix (optionally followed by Thh:mm:ss...), or a bare year
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (s.size() == 4) return digit(s[0]) && digit(s[1]) && digit(s[2]) && digit(s[3]);
  if (s.size() < 10) return false;
  return digit(s[0]) && digit(s[1]) && digit(s[2]) && digit(s[3]) && s[4] == '-' &&
         digit(s[5]) && digit(s[6]) && s[7] == '-' && digit(s[8]) && digit(s[9]);
}

inline bool numeric_datatype(std::string_view dt) {
  if (!starts_with(dt, kXsd)) return false;
  std::string_view l = dt.substr(kXsd.size());
  return l == "integer" || l == "decimal" || l == "double" || l == "float" ||
         l == "long" || l == "int" || l == "short" || l == "byte" ||
         l == "nonNegativeInteger" || l == "positiveInteger" ||
         l == "negativeInteger" || l == "nonPositiveInteger" ||
         l == "unsignedLong" || l == "unsignedInt" || l == "unsignedShort" ||
         l == "unsignedByte";
}

inline bool datetime_datatype(std::string_view dt) {
  return dt == kXsdDateTime || dt == kXsdDate || dt == kXsdGYear;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

// Epoch seconds from an ISO-8601-ish lexical value; timezone offsets ignored.
inline std::optional<double> parse_datetime_epoch(std::string_view s) {
  auto num = [&](size_t pos, size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4);
  if (!y) return std::nullopt;
  int mo = 1, d = 1, hh = 0, mi = 0;
  double ss = 0.0;
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    auto m_ = num(5, 2), d_ = num(8, 2);
    if (!m_ || !d_) return std::nullopt;
    mo = *m_;
    d = *d_;
    if (s.size() >= 19 && s[10] == 'T' && s[13] == ':' && s[16] == ':') {
      auto h_ = num(11, 2), mi_ = num(14, 2), s_ = num(17, 2);
      if (h_ && mi_ && s_) {
        hh = *h_;
        mi = *mi_;
        ss = *s_;
      }
    }
  } else if (s.size() != 4) {
    return std::nullopt;
  }
  return static_cast<double>(days_from_civil(*y, mo, d)) * 86400.0 + hh * 3600.0 +
         mi * 60.0 + ss;
}

struct LiteralObservation {
  std::string lexical;
  std::string datatype;  // effective
};

}  // namespace detail

// Automatic schema extraction: node types from rdf:type objects, edge types
// from object-property occurrences grouped by endpoint types, attribute
// properties from datatype-property occurrences grouped by subject type.
inline Schemas infer_schema(const TripleStore& store, const SchemaConfig& config = {}) {
  Schemas out;
  out.config = config;
  const std::string rdf_type(kRdfType);

  // class frequency = number of distinct resources declaring the class
  std::map<std::string, std::set<std::string>> class_subjects;
  std::unordered_map<std::string, std::vector<std::string>> declared;  // node id -> classes
  for (const Triple& t : store.triples()) {
    if (t.predicate.lexical == rdf_type && t.object.kind == TermKind::IRI &&
        t.subject.is_resource()) {
      std::string id = t.subject.node_id();
      class_subjects[t.object.lexical].insert(id);
      declared[id].push_back(t.object.lexical);
    }
  }

  // resources = subjects and resource objects of non-type triples, plus
  // anything that declares a type
  std::vector<std::string> resource_order;
  std::unordered_set<std::string> seen;
  auto note = [&](const std::string& id) {
    if (seen.insert(id).second) resource_order.push_back(id);
  };
  for (const Triple& t : store.triples()) {
    if (t.predicate.lexical == rdf_type) {
      if (t.subject.is_resource()) note(t.subject.node_id());
      continue;
    }
    if (t.subject.is_resource()) note(t.subject.node_id());
    if (t.object.is_resource()) note(t.object.node_id());
  }

  // least-frequent declared class wins; ties break to the smaller IRI
  auto pick_class = [&](const std::vector<std::string>& classes) -> std::string {
    std::string best;
    size_t best_count = 0;
    for (const std::string& c : classes) {
      size_t n = class_subjects[c].size();
      if (best.empty() || n < best_count || (n == best_count && c < best)) {
        best = c;
        best_count = n;
      }
    }
    return best;
  };

  // type names: config pins win; otherwise sanitized local names with
  // deterministic suffixing on collision (classes visited in IRI order)
  std::map<std::string, std::string> class_to_type;
  {
    std::set<std::string> used_classes;
    for (const std::string& id : resource_order) {
      auto it = declared.find(id);
      if (it != declared.end() && !it->second.empty())
        used_classes.insert(pick_class(it->second));
    }
    std::set<std::string> taken{kUntypedTypeName};
    for (const std::string& cls : used_classes) {
      std::string name;
      auto pin = config.class_pins.find(cls);
      if (pin != config.class_pins.end())
        name = sanitize_identifier(pin->second);
      else
        name = sanitize_identifier(local_name(cls));
      std::string candidate = name;
      int suffix = 2;
      while (!taken.insert(candidate).second) candidate = name + "_" + std::to_string(suffix++);
      class_to_type[cls] = candidate;
    }
  }

  auto type_of = [&](const std::string& id) -> std::string {
    auto it = declared.find(id);
    if (it != declared.end() && !it->second.empty()) return class_to_type[pick_class(it->second)];
    return config.keep_untyped ? std::string(kUntypedTypeName) : std::string();
  };

  for (const std::string& id : resource_order) {
    std::string tn = type_of(id);
    if (tn.empty()) {
      ++out.untyped_dropped;
      continue;
    }
    out.resource_type[id] = tn;
    auto [it, inserted] = out.node_types.try_emplace(tn);
    if (inserted) {
      it->second.type_name = tn;
      for (const auto& [cls, name] : class_to_type)
        if (name == tn) it->second.class_iri = cls;
    }
    it->second.add_member(id);
  }

  // edge type keys from object-property occurrences; attribute observations
  // from literal occurrences (Mixed predicates contribute to both)
  std::map<std::pair<std::string, std::string>, std::vector<detail::LiteralObservation>>
      attr_values;  // (type, predicate) -> observations
  std::map<EdgeKey, std::string> edge_candidates;  // key -> predicate (detect collisions)
  std::map<std::pair<std::string, std::string>, std::set<std::string>> label_predicates;

  for (const Triple& t : store.triples()) {
    if (t.predicate.lexical == rdf_type) continue;
    if (t.object.kind == TermKind::Literal) {
      auto it = out.resource_type.find(t.subject.node_id());
      if (it == out.resource_type.end()) continue;
      attr_values[{it->second, t.predicate.lexical}].push_back(
          {t.object.lexical, std::string(t.object.effective_datatype())});
    } else {
      auto si = out.resource_type.find(t.subject.node_id());
      auto oi = out.resource_type.find(t.object.node_id());
      if (si == out.resource_type.end() || oi == out.resource_type.end()) continue;
      std::string label = sanitize_identifier(local_name(t.predicate.lexical));
      label_predicates[{si->second + "\x1f" + oi->second, label}].insert(t.predicate.lexical);
    }
  }

  // resolve duplicate relation labels per (src,dst) pair deterministically
  for (const auto& [pair_label, preds] : label_predicates) {
    auto sep = pair_label.first.find('\x1f');
    std::string src = pair_label.first.substr(0, sep);
    std::string dst = pair_label.first.substr(sep + 1);
    int suffix = 2;
    bool first = true;
    for (const std::string& pred : preds) {
      std::string rel = pair_label.second;
      if (!first) rel += "_" + std::to_string(suffix++);
      first = false;
      EdgeKey key{src, rel, dst};
      EdgeTypeSchema et;
      et.key = key;
      et.predicate_iri = pred;
      out.edge_types.emplace(key, std::move(et));
    }
  }

  // literal-kind inference per (type, predicate)
  for (const auto& [tp, obs] : attr_values) {
    const auto& [type_name, pred] = tp;
    bool all_dt_numeric = true, all_dt_bool = true, all_dt_date = true;
    bool all_lex_numeric = true, all_lex_bool = true, all_lex_date = true;
    std::set<std::string> distinct;
    double total_len = 0.0;
    for (const auto& o : obs) {
      all_dt_numeric &= detail::numeric_datatype(o.datatype);
      all_dt_bool &= (o.datatype == kXsdBoolean);
      all_dt_date &= detail::datetime_datatype(o.datatype);
      all_lex_numeric &= detail::sniff_numeric(o.lexical);
      all_lex_bool &= detail::sniff_boolean(o.lexical);
      all_lex_date &= detail::sniff_date(o.lexical);
      distinct.insert(o.lexical);
      total_len += static_cast<double>(o.lexical.size());
    }
    double mean_len = obs.empty() ? 0.0 : total_len / static_cast<double>(obs.size());

    AttributeProperty ap;
    ap.predicate = pred;
    bool forced_nld = config.nld_properties.count(pred) > 0;
    if (all_dt_bool || (!all_dt_numeric && !all_dt_date && all_lex_bool)) {
      ap.kind = LiteralKind::Boolean;
    } else if (all_dt_numeric || all_lex_numeric) {
      ap.kind = LiteralKind::Numeric;
    } else if (all_dt_date || all_lex_date) {
      ap.kind = LiteralKind::DateTime;
    } else if (forced_nld || mean_len >= config.nld_min_mean_length) {
      // prose-like values stay String (and are NLD sources)
      ap.kind = LiteralKind::String;
      ap.nld = true;
    } else if (static_cast<int>(distinct.size()) <= config.cat_threshold &&
               distinct.size() < obs.size()) {
      // a bounded, repeating value set reads as categorical; all-unique short
      // values stay String
      ap.kind = LiteralKind::Categorical;
    } else {
      ap.kind = LiteralKind::String;
    }
    out.node_types[type_name].attribute_properties.push_back(ap);
  }
  for (auto& [_, nt] : out.node_types)
    std::sort(nt.attribute_properties.begin(), nt.attribute_properties.end(),
              [](const auto& a, const auto& b) { return a.predicate < b.predicate; });

  return out;
}

struct BuildReport {
  long untyped_resources_dropped = 0;
  long triples_dropped = 0;  // object-property occurrences touching dropped resources
  long duplicate_edges_removed = 0;
  long reverse_edge_types_added = 0;
};

inline std::string reverse_rel_label(const std::string& rel) { return rel + "_rev"; }

// KG -> HG: edge lists populated and deduplicated, reverse edge types added
// for message passing.
inline HeteroGraph build_hetero_graph(const TripleStore& store, const Schemas& schemas,
                                      BuildReport* report = nullptr) {
  HeteroGraph g;
  g.node_types = schemas.node_types;
  g.rebuild_locator();
  BuildReport local;
  local.untyped_resources_dropped = schemas.untyped_dropped;

  // edge-type lookup: (src type, dst type, predicate) -> key
  std::map<std::tuple<std::string, std::string, std::string>, EdgeKey> by_pred;
  for (const auto& [key, et] : schemas.edge_types) {
    g.edge_types[key] = et;
    by_pred[{key.src, key.dst, et.predicate_iri}] = key;
  }

  std::map<EdgeKey, std::unordered_set<uint64_t>> seen;
  const std::string rdf_type(kRdfType);
  for (const Triple& t : store.triples()) {
    if (t.predicate.lexical == rdf_type || t.object.kind == TermKind::Literal) continue;
    auto si = g.node_locator.find(t.subject.node_id());
    auto oi = g.node_locator.find(t.object.node_id());
    if (si == g.node_locator.end() || oi == g.node_locator.end()) {
      ++local.triples_dropped;
      continue;
    }
    auto key_it = by_pred.find({si->second.first, oi->second.first, t.predicate.lexical});
    if (key_it == by_pred.end()) {
      ++local.triples_dropped;  // schema inferred from a different store
      continue;
    }
    int s = si->second.second, d = oi->second.second;
    uint64_t code = (static_cast<uint64_t>(static_cast<uint32_t>(s)) << 32) |
                    static_cast<uint32_t>(d);
    if (seen[key_it->second].insert(code).second)
      g.edge_types[key_it->second].edges.emplace_back(s, d);
    else
      ++local.duplicate_edges_removed;
  }

  // reverse edge types; skipped for declared-symmetric self-type relations
  std::vector<EdgeKey> base_keys;
  for (const auto& [key, _] : g.edge_types) base_keys.push_back(key);
  for (const EdgeKey& key : base_keys) {
    const EdgeTypeSchema& et = g.edge_types[key];
    if (key.src == key.dst && schemas.config.symmetric_predicates.count(et.predicate_iri))
      continue;
    EdgeKey rkey{key.dst, reverse_rel_label(key.rel), key.src};
    EdgeTypeSchema rev;
    rev.key = rkey;
    rev.predicate_iri = et.predicate_iri;
    rev.reverse = true;
    rev.edges.reserve(et.edges.size());
    for (auto [s, d] : et.edges) rev.edges.emplace_back(d, s);
    g.edge_types.emplace(rkey, std::move(rev));
    ++local.reverse_edge_types_added;
  }

  if (report) *report = local;
  return g;
}

}  // namespace rdf2rec
