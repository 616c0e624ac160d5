#include <algorithm>
#include <set>

#include "json.hpp"
#include "mf/error.hpp"
#include "mf/miner.hpp"

namespace mf {

using nlohmann::json;

namespace {

json rules_to_json(const std::vector<AssociationRule>& rules) {
  json out = json::array();
  for (const auto& rule : rules)
    out.push_back({{"antecedent", rule.antecedent},
                   {"consequent", rule.consequent},
                   {"union_count", rule.union_count},
                   {"antecedent_count", rule.antecedent_count}});
  return out;
}

std::vector<ItemCode> itemset_from_json(const json& value) {
  auto items = value.get<std::vector<ItemCode>>();
  if (items.empty() || !std::is_sorted(items.begin(), items.end()) ||
      std::adjacent_find(items.begin(), items.end()) != items.end())
    throw SchemaError("rule itemsets must be non-empty and strictly ascending");
  return items;
}

std::vector<AssociationRule> rules_from_json(const json& value, std::uint64_t total,
                                             const MinerConfig& config) {
  std::vector<AssociationRule> rules;
  std::set<std::pair<std::vector<ItemCode>, std::vector<ItemCode>>> seen;
  for (const auto& entry : value) {
    AssociationRule rule;
    rule.antecedent = itemset_from_json(entry.at("antecedent"));
    rule.consequent = itemset_from_json(entry.at("consequent"));
    rule.union_count = entry.at("union_count").get<std::uint64_t>();
    rule.antecedent_count = entry.at("antecedent_count").get<std::uint64_t>();
    rule.total = total;

    std::vector<ItemCode> overlap;
    std::set_intersection(rule.antecedent.begin(), rule.antecedent.end(),
                          rule.consequent.begin(), rule.consequent.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) throw SchemaError("rule antecedent and consequent overlap");
    if (rule.union_count == 0 || rule.union_count > rule.antecedent_count ||
        rule.antecedent_count > total)
      throw SchemaError("rule counts are inconsistent");
    if (rule.support() < config.min_support || rule.confidence() < config.min_confidence)
      throw SchemaError("rule below the recorded thresholds");
    if (!seen.emplace(rule.antecedent, rule.consequent).second)
      throw SchemaError("duplicate rule");
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace

std::string rulebases_to_text(const RuleBases& rules) {
  const auto& config = rules.elements.config;
  json root;
  root["format"] = kRulesFormat;
  root["version"] = kRulesVersion;
  root["catalog_fingerprint"] = rules.elements.corpus_fingerprint;
  root["config"] = {{"min_support", config.min_support.to_string()},
                    {"min_confidence", config.min_confidence.to_string()},
                    {"max_itemset_size", config.max_itemset_size}};
  root["transaction_count"] = rules.elements.transaction_count;
  root["element_rules"] = rules_to_json(rules.elements.rules);
  root["interaction_rules"] = rules_to_json(rules.interactions.rules);
  return root.dump(2) + "\n";
}

RuleBases rulebases_from_text(std::string_view text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw SchemaError("rule file is not a JSON object");
  if (root.value("format", "") != kRulesFormat) throw SchemaError("not an mf-rules file");
  if (const auto version = root.value("version", ""); version != kRulesVersion)
    throw SchemaError("unsupported rules schema version '" + version + "' (expected " +
                      std::string(kRulesVersion) + ")");
  try {
    MinerConfig config;
    const auto& c = root.at("config");
    config.min_support = Fraction::parse(c.at("min_support").get<std::string>());
    config.min_confidence = Fraction::parse(c.at("min_confidence").get<std::string>());
    config.max_itemset_size = c.at("max_itemset_size").get<std::size_t>();
    try {
      config.validate();
    } catch (const InvalidConfig& e) {
      throw SchemaError(std::string("invalid recorded config: ") + e.what());
    }
    const auto fingerprint = root.at("catalog_fingerprint").get<std::string>();
    const auto total = root.at("transaction_count").get<std::uint64_t>();

    RuleBases out;
    out.elements = {ItemKind::Element,
                    rules_from_json(root.at("element_rules"), total, config), config,
                    fingerprint, total};
    out.interactions = {ItemKind::Interaction,
                        rules_from_json(root.at("interaction_rules"), total, config),
                        config, fingerprint, total};
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed rule file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("malformed rule file: ") + e.what());
  }
}

void save_rulebases(const RuleBases& rules, const std::filesystem::path& destination) {
  write_text_file(destination, rulebases_to_text(rules));
}

RuleBases load_rulebases(const std::filesystem::path& source) {
  return rulebases_from_text(read_text_file(source));
}

RuleBases load_rulebases(const std::filesystem::path& source, const Catalog& catalog) {
  RuleBases rules = load_rulebases(source);
  require_fingerprint(rules, catalog);
  return rules;
}

}  // namespace mf
