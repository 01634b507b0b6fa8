#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rdf2rec/features.hpp"
#include "rdf2rec/hetero_graph.hpp"
#include "rdf2rec/kge.hpp"

namespace rdf2rec {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void check_csv_safe(const std::string& id) {
  if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos ||
      id.find('\r') != std::string::npos)
    throw DataError("node id '" + id + "' contains CSV delimiter characters");
}

}  // namespace detail

inline json column_spec_json(const std::vector<ColumnBlock>& spec) {
  json arr = json::array();
  for (const auto& b : spec)
    arr.push_back({{"source", b.source},
                   {"kind", to_string(b.kind)},
                   {"width", b.width},
                   {"nld", b.nld}});
  return arr;
}

inline std::vector<ColumnBlock> column_spec_from_json(const json& arr) {
  std::vector<ColumnBlock> out;
  for (const auto& b : arr)
    out.push_back({b.at("source").get<std::string>(),
                   literal_kind_from_string(b.at("kind").get<std::string>()),
                   b.at("width").get<int>(), b.at("nld").get<bool>()});
  return out;
}

// Dataset directory written by convert: per-type node CSVs with content
// features, per-edge-type CSVs, schema.json, report.json.
inline void write_dataset(const HeteroGraph& g, const fs::path& dir, const json& config_echo,
                          const BuildReport& report, long skipped_lines = 0) {
  fs::create_directories(dir);

  json schema;
  schema["node_types"] = json::array();
  for (const auto& [tn, nt] : g.node_types) {
    json attrs = json::array();
    for (const auto& ap : nt.attribute_properties)
      attrs.push_back({{"iri", ap.predicate}, {"kind", to_string(ap.kind)}, {"nld", ap.nld}});
    const FeatureTable& xc = g.content_features.at(tn);
    schema["node_types"].push_back({{"name", tn},
                                    {"class_iri", nt.class_iri},
                                    {"members", nt.members.size()},
                                    {"attributes", attrs},
                                    {"content_dim", xc.dim},
                                    {"content_empty", xc.content_empty},
                                    {"column_spec", column_spec_json(xc.column_spec)}});
  }
  schema["edge_types"] = json::array();
  for (const auto& [key, et] : g.edge_types)
    schema["edge_types"].push_back({{"src", key.src},
                                    {"rel", key.rel},
                                    {"dst", key.dst},
                                    {"predicate_iri", et.predicate_iri},
                                    {"count", et.edges.size()},
                                    {"reverse", et.reverse}});
  schema["counts"] = {{"nodes", g.num_nodes()}, {"edges", g.num_edges()}};
  schema["config"] = config_echo;
  detail::write_file(dir / "schema.json", schema.dump(2) + "\n");

  json rep = {{"skipped_lines", skipped_lines},
              {"untyped_resources_dropped", report.untyped_resources_dropped},
              {"triples_dropped", report.triples_dropped},
              {"duplicate_edges_removed", report.duplicate_edges_removed},
              {"reverse_edge_types_added", report.reverse_edge_types_added},
              {"config", config_echo}};
  detail::write_file(dir / "report.json", rep.dump(2) + "\n");

  for (const auto& [tn, nt] : g.node_types) {
    const FeatureTable& xc = g.content_features.at(tn);
    std::string csv = "node_id,iri";
    for (int j = 0; j < xc.dim; ++j) csv += ",c" + std::to_string(j);
    csv += "\n";
    for (size_t i = 0; i < nt.members.size(); ++i) {
      detail::check_csv_safe(nt.members[i]);
      csv += std::to_string(i);
      csv += ',';
      csv += nt.members[i];
      for (int j = 0; j < xc.dim; ++j) {
        csv += ',';
        csv += format_double(xc.at(static_cast<int>(i), j));
      }
      csv += '\n';
    }
    detail::write_file(dir / ("nodes_" + tn + ".csv"), csv);
  }
  for (const auto& [key, et] : g.edge_types) {
    std::string csv = "src,dst\n";
    for (auto [s, d] : et.edges)
      csv += std::to_string(s) + "," + std::to_string(d) + "\n";
    detail::write_file(dir / ("edges_" + key.str() + ".csv"), csv);
  }
}

// Rebuilds the HeteroGraph (members, attributes, edges, x_c) from a dataset
// directory. Throws DataError on malformed content.
inline HeteroGraph load_dataset(const fs::path& dir) {
  const fs::path schema_path = dir / "schema.json";
  if (!fs::exists(schema_path))
    throw DataError("not a dataset directory (missing " + schema_path.string() + ")");
  json schema;
  try {
    schema = json::parse(detail::read_file(schema_path));
  } catch (const json::exception& e) {
    throw DataError("malformed schema.json: " + std::string(e.what()));
  }

  HeteroGraph g;
  try {
    for (const auto& ntj : schema.at("node_types")) {
      NodeTypeSchema nt;
      nt.type_name = ntj.at("name").get<std::string>();
      nt.class_iri = ntj.at("class_iri").get<std::string>();
      for (const auto& a : ntj.at("attributes"))
        nt.attribute_properties.push_back(
            {a.at("iri").get<std::string>(),
             literal_kind_from_string(a.at("kind").get<std::string>()),
             a.at("nld").get<bool>()});
      const int dim = ntj.at("content_dim").get<int>();
      const size_t expected_members = ntj.at("members").get<size_t>();

      FeatureTable xc;
      xc.dim = dim;
      xc.provenance = Provenance::Content;
      xc.content_empty = ntj.at("content_empty").get<bool>();
      xc.column_spec = column_spec_from_json(ntj.at("column_spec"));

      const fs::path nodes_path = dir / ("nodes_" + nt.type_name + ".csv");
      std::ifstream in(nodes_path);
      if (!in) throw DataError("missing " + nodes_path.string());
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (static_cast<int>(fields.size()) != 2 + dim)
          throw DataError(nodes_path.string() + ": expected " + std::to_string(2 + dim) +
                          " fields, got " + std::to_string(fields.size()));
        nt.add_member(fields[1]);
        for (int j = 0; j < dim; ++j)
          xc.values.push_back(std::strtod(fields[2 + j].c_str(), nullptr));
      }
      xc.rows = static_cast<int>(nt.members.size());
      if (nt.members.size() != expected_members)
        throw DataError(nodes_path.string() + ": member count does not match schema.json");
      xc.validate("x_c of " + nt.type_name);
      g.content_features[nt.type_name] = std::move(xc);
      g.node_types[nt.type_name] = std::move(nt);
    }

    for (const auto& etj : schema.at("edge_types")) {
      EdgeTypeSchema et;
      et.key = {etj.at("src").get<std::string>(), etj.at("rel").get<std::string>(),
                etj.at("dst").get<std::string>()};
      et.predicate_iri = etj.at("predicate_iri").get<std::string>();
      et.reverse = etj.at("reverse").get<bool>();
      const fs::path edges_path = dir / ("edges_" + et.key.str() + ".csv");
      std::ifstream in(edges_path);
      if (!in) throw DataError("missing " + edges_path.string());
      std::string line;
      std::getline(in, line);
      const int src_count = static_cast<int>(g.node_types.at(et.key.src).members.size());
      const int dst_count = static_cast<int>(g.node_types.at(et.key.dst).members.size());
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 2) throw DataError(edges_path.string() + ": expected src,dst");
        int s = std::atoi(fields[0].c_str());
        int d = std::atoi(fields[1].c_str());
        if (s < 0 || s >= src_count || d < 0 || d >= dst_count)
          throw DataError(edges_path.string() + ": edge (" + fields[0] + "," + fields[1] +
                          ") out of range");
        et.edges.emplace_back(s, d);
      }
      if (et.edges.size() != etj.at("count").get<size_t>())
        throw DataError(edges_path.string() + ": edge count does not match schema.json");
      g.edge_types[et.key] = std::move(et);
    }
  } catch (const json::exception& e) {
    throw DataError("malformed schema.json: " + std::string(e.what()));
  }
  g.rebuild_locator();
  return g;
}

// --- KGE artifacts ----------------------------------------------------------

inline void write_kge(const KgeModel& m, const HeteroGraph& g, const fs::path& dir,
                      const json& config_echo) {
  json model;
  model["variant"] = to_string(m.variant);
  model["d"] = m.d;
  model["seed"] = m.seed;
  model["types"] = m.types;
  model["type_offset"] = m.type_offset;
  json rels = json::array();
  for (const auto& k : m.relation_keys) rels.push_back(k.str());
  model["relation_keys"] = rels;
  model["entity"] = m.entity;
  model["relation"] = m.relation;
  model["config"] = config_echo;
  detail::write_file(dir / "kge_model.json", model.dump() + "\n");

  const int w = m.entity_width();
  for (size_t ti = 0; ti < m.types.size(); ++ti) {
    const auto& members = g.node_types.at(m.types[ti]).members;
    std::string tsv;
    for (size_t i = 0; i < members.size(); ++i) {
      tsv += members[i];
      const double* row = m.entity_row(m.type_offset[ti] + static_cast<int>(i));
      for (int j = 0; j < w; ++j) {
        tsv += '\t';
        tsv += format_double(row[j]);
      }
      tsv += '\n';
    }
    detail::write_file(dir / ("embeddings_" + m.types[ti] + ".tsv"), tsv);
  }
}

inline KgeModel load_kge_model(const fs::path& dir) {
  const fs::path path = dir / "kge_model.json";
  if (!fs::exists(path)) throw MissingDependency("missing " + path.string());
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw DataError("malformed kge_model.json: " + std::string(e.what()));
  }
  KgeModel m;
  m.variant = kge_variant_from_string(j.at("variant").get<std::string>());
  m.d = j.at("d").get<int>();
  m.seed = j.at("seed").get<uint64_t>();
  m.types = j.at("types").get<std::vector<std::string>>();
  m.type_offset = j.at("type_offset").get<std::vector<int>>();
  for (const auto& k : j.at("relation_keys"))
    m.relation_keys.push_back(EdgeKey::from_str(k.get<std::string>()));
  m.entity = j.at("entity").get<std::vector<double>>();
  m.relation = j.at("relation").get<std::vector<double>>();
  return m;
}

// Loads per-type embeddings_<type>.tsv into graph.topology_features.
// Missing files are missing dependencies (exit-code 5 at the CLI).
inline void load_topology_features(HeteroGraph& g, const fs::path& dir) {
  std::string variant = "kge";
  if (fs::exists(dir / "kge_model.json")) {
    try {
      json j = json::parse(detail::read_file(dir / "kge_model.json"));
      variant = "kge:" + j.at("variant").get<std::string>();
    } catch (const json::exception&) {
    }
  }
  for (const auto& [tn, nt] : g.node_types) {
    const fs::path path = dir / ("embeddings_" + tn + ".tsv");
    if (!fs::exists(path))
      throw MissingDependency("missing topology embeddings file " + path.string() +
                              " (run the embed command first)");
    std::ifstream in(path);
    std::string line;
    int dim = -1;
    std::map<int, std::vector<double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split(line, '\t');
      if (fields.size() < 2)
        throw DataError(path.string() + " row " + std::to_string(lineno) + ": too few fields");
      auto it = nt.member_index.find(fields[0]);
      if (it == nt.member_index.end())
        throw DataError(path.string() + " row " + std::to_string(lineno) + ": unknown node '" +
                        fields[0] + "'");
      int d = static_cast<int>(fields.size()) - 1;
      if (dim < 0) dim = d;
      if (d != dim)
        throw DataError(path.string() + " row " + std::to_string(lineno) +
                        ": inconsistent dimension");
      std::vector<double> vec(d);
      for (int j = 0; j < d; ++j) vec[j] = std::strtod(fields[j + 1].c_str(), nullptr);
      rows[it->second] = std::move(vec);
    }
    if (rows.size() != nt.members.size())
      throw DataError(path.string() + ": covers " + std::to_string(rows.size()) + " of " +
                      std::to_string(nt.members.size()) + " nodes");
    FeatureTable xt;
    xt.rows = static_cast<int>(nt.members.size());
    xt.dim = dim;
    xt.provenance = Provenance::Topology;
    xt.values.reserve(static_cast<size_t>(xt.rows) * dim);
    for (int i = 0; i < xt.rows; ++i)
      xt.values.insert(xt.values.end(), rows.at(i).begin(), rows.at(i).end());
    xt.column_spec.push_back({variant, LiteralKind::Numeric, dim, false});
    xt.validate("x_t of " + tn);
    g.topology_features[tn] = std::move(xt);
  }
}

// --- model checkpoints --------------------------------------------------------

inline json checkpoint_json(const std::vector<Tensor>& params) {
  json arr = json::array();
  for (const auto& p : params)
    arr.push_back({{"name", p.name()},
                   {"rows", p.rows()},
                   {"cols", p.cols()},
                   {"values", p.values()}});
  return arr;
}

inline void restore_checkpoint(std::vector<Tensor>& params, const json& arr) {
  if (arr.size() != params.size())
    throw DataError("checkpoint has " + std::to_string(arr.size()) + " tensors, model has " +
                    std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& pj = arr.at(i);
    if (pj.at("name").get<std::string>() != params[i].name() ||
        pj.at("rows").get<int>() != params[i].rows() ||
        pj.at("cols").get<int>() != params[i].cols())
      throw DataError("checkpoint tensor '" + pj.at("name").get<std::string>() +
                      "' does not match model parameter '" + params[i].name() + "'");
    params[i].values() = pj.at("values").get<std::vector<double>>();
  }
}

}  // namespace rdf2rec
