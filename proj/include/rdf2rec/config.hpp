#pragma once

#include <json.hpp>

#include "rdf2rec/encoders.hpp"
#include "rdf2rec/evaluation.hpp"
#include "rdf2rec/features.hpp"
#include "rdf2rec/kge.hpp"
#include "rdf2rec/link_prediction.hpp"

namespace rdf2rec {

// Flat-key "key = value" configuration text with cosmetic [section] headers.
// Every key can be overridden by a CLI flag of the same name; the fully
// resolved configuration is echoed into every output manifest.
using FlatConfig = std::map<std::string, std::string>;

inline FlatConfig parse_config_text(const std::string& text) {
  FlatConfig out;
  int lineno = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
    if (sv.front() == '[') {
      if (sv.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      continue;  // sections only group keys visually
    }
    size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(sv.substr(0, eq)));
    std::string value(trim(sv.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

inline double parse_num(const std::string& v, const std::string& key) {
  if (!rdf2rec::detail::sniff_numeric(v))
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return std::strtod(v.c_str(), nullptr);
}

}  // namespace detail

struct RunConfig {
  SchemaConfig schema;
  FeatureConfig feature;
  KgeVariant kge_variant = KgeVariant::TransE;
  KgeTrainConfig kge;
  EncoderConfig encoder;
  TrainConfig train;
  SplitRatios ratios;
  InitTag init = InitTag::one_hot;
  std::string scenario_name = "main";
  ScenarioMode setting = ScenarioMode::Full;
  std::string target;  // src__rel__dst; empty = densest non-reverse edge type
  uint64_t seed = 0;
  int seeds = 1;

  // the seed propagates into every stage unless a stage pins its own
  void propagate_seed() {
    feature.seed = seed;
    kge.seed = seed;
    encoder.seed = seed;
    train.seed = seed;
  }

  void apply(const FlatConfig& flat) {
    for (const auto& [key, value] : flat) apply_key(key, value);
  }

  void apply_key(const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_num;
    if (key == "cat_threshold") schema.cat_threshold = static_cast<int>(parse_num(value, key));
    else if (key == "keep_untyped") schema.keep_untyped = parse_bool(value, key);
    else if (key == "nld_min_mean_length") schema.nld_min_mean_length = parse_num(value, key);
    else if (key == "nld_properties") {
      for (const auto& p : split(value, ','))
        if (!p.empty()) schema.nld_properties.insert(std::string(trim(p)));
    } else if (key == "symmetric_predicates") {
      for (const auto& p : split(value, ','))
        if (!p.empty()) schema.symmetric_predicates.insert(std::string(trim(p)));
    } else if (key == "class_pins") {
      for (const auto& pin : split(value, ',')) {
        if (pin.empty()) continue;
        size_t eq = pin.find('=');
        if (eq == std::string::npos)
          throw ConfigError("class_pins entries look like <class-iri>=<type-name>");
        schema.class_pins[std::string(trim(pin.substr(0, eq)))] =
            std::string(trim(pin.substr(eq + 1)));
      }
    } else if (key == "text_dim") feature.text_dim = static_cast<int>(parse_num(value, key));
    else if (key == "kge_model") kge_variant = kge_variant_from_string(value);
    else if (key == "kge_dim") kge.d = static_cast<int>(parse_num(value, key));
    else if (key == "kge_epochs") kge.epochs = static_cast<int>(parse_num(value, key));
    else if (key == "kge_lr") kge.lr = parse_num(value, key);
    else if (key == "kge_negatives") kge.negatives = static_cast<int>(parse_num(value, key));
    else if (key == "kge_margin") kge.margin = parse_num(value, key);
    else if (key == "encoder") encoder.architecture = arch_from_string(value);
    else if (key == "layers") encoder.layers = static_cast<int>(parse_num(value, key));
    else if (key == "heads") encoder.heads = static_cast<int>(parse_num(value, key));
    else if (key == "hidden_dim") encoder.hidden_dim = static_cast<int>(parse_num(value, key));
    else if (key == "leaky_slope") encoder.leaky_slope = parse_num(value, key);
    else if (key == "aggregator") {
      if (value == "mean") encoder.aggregator = SageAggregator::Mean;
      else if (value == "pool") encoder.aggregator = SageAggregator::Pool;
      else throw ConfigError("aggregator must be mean or pool, got '" + value + "'");
    } else if (key == "epochs") train.epochs = static_cast<int>(parse_num(value, key));
    else if (key == "lr") train.lr = parse_num(value, key);
    else if (key == "negatives") train.negatives = static_cast<int>(parse_num(value, key));
    else if (key == "patience") train.patience = static_cast<int>(parse_num(value, key));
    else if (key == "threshold") train.threshold = parse_num(value, key);
    else if (key == "train_ratio") ratios.train = parse_num(value, key);
    else if (key == "val_ratio") ratios.val = parse_num(value, key);
    else if (key == "test_ratio") ratios.test = parse_num(value, key);
    else if (key == "init") init = init_tag_from_string(value);
    else if (key == "scenario") scenario_name = value;
    else if (key == "setting") setting = scenario_mode_from_string(value);
    else if (key == "target") target = value;
    else if (key == "seed") seed = static_cast<uint64_t>(parse_num(value, key));
    else if (key == "seeds") seeds = static_cast<int>(parse_num(value, key));
    else throw ConfigError("unknown config key '" + key + "'");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema"] = {{"cat_threshold", schema.cat_threshold},
                   {"keep_untyped", schema.keep_untyped},
                   {"nld_min_mean_length", schema.nld_min_mean_length},
                   {"nld_properties", std::vector<std::string>(schema.nld_properties.begin(),
                                                               schema.nld_properties.end())},
                   {"symmetric_predicates",
                    std::vector<std::string>(schema.symmetric_predicates.begin(),
                                             schema.symmetric_predicates.end())},
                   {"class_pins", schema.class_pins}};
    j["feature"] = {{"text_dim", feature.text_dim}, {"seed", feature.seed}};
    j["kge"] = {{"model", to_string(kge_variant)}, {"dim", kge.d},
                {"epochs", kge.epochs},           {"lr", kge.lr},
                {"negatives", kge.negatives},     {"margin", kge.margin},
                {"seed", kge.seed}};
    const char* agg = encoder.aggregator == SageAggregator::Mean ? "mean" : "pool";
    j["encoder"] = {{"architecture", to_string(encoder.architecture)},
                    {"layers", encoder.layers},
                    {"hidden_dim", encoder.hidden_dim},
                    {"heads", encoder.heads},
                    {"leaky_slope", encoder.leaky_slope},
                    {"aggregator", agg},
                    {"seed", encoder.seed}};
    j["train"] = {{"epochs", train.epochs},       {"lr", train.lr},
                  {"negatives", train.negatives}, {"patience", train.patience},
                  {"threshold", train.threshold}, {"seed", train.seed}};
    j["split"] = {{"train", ratios.train}, {"val", ratios.val}, {"test", ratios.test}};
    j["run"] = {{"init", to_string(init)},
                {"scenario", scenario_name},
                {"setting", to_string(setting)},
                {"target", target},
                {"seed", seed},
                {"seeds", seeds}};
    return j;
  }
};

// The densest asserted edge type is the default link-prediction target.
inline EdgeKey resolve_target(const HeteroGraph& g, const std::string& requested) {
  if (!requested.empty()) {
    EdgeKey key = EdgeKey::from_str(requested);
    auto it = g.edge_types.find(key);
    if (it == g.edge_types.end())
      throw ConfigError("target edge type '" + requested + "' not found in dataset");
    if (it->second.reverse)
      throw ConfigError("target edge type '" + requested + "' is a derived reverse type");
    return key;
  }
  const EdgeTypeSchema* best = nullptr;
  for (const auto& [key, et] : g.edge_types) {
    if (et.reverse) continue;
    if (!best || et.edges.size() > best->edges.size()) best = &et;
  }
  if (!best) throw DataError("dataset has no asserted edge types");
  return best->key;
}

}  // namespace rdf2rec
