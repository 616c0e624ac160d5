#pragma once

// Apriori frequent-itemset mining and association-rule generation over the
// catalog's transaction tables.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mf/catalog.hpp"
#include "mf/fraction.hpp"

namespace mf {

struct MinerConfig {
  Fraction min_support{1, 1};
  Fraction min_confidence{1, 10};
  std::size_t max_itemset_size = 4;

  // Throws InvalidConfig unless 0 < min_support <= 1, 0 < min_confidence <= 1
  // and max_itemset_size >= 2.
  void validate() const;

  // min_support = 2 / corpus_size (capped at 1), min_confidence = 1/10,
  // max_itemset_size = 4.
  static MinerConfig defaults_for(std::size_t corpus_size);

  friend bool operator==(const MinerConfig&, const MinerConfig&) = default;
};

// Items are sorted ascending. Support is count / total.
struct Itemset {
  std::vector<ItemCode> items;
  std::uint64_t count = 0;
  std::uint64_t total = 0;

  Fraction support() const { return {count, total}; }

  friend bool operator==(const Itemset&, const Itemset&) = default;
};

// antecedent => consequent, both sorted and disjoint.
struct AssociationRule {
  std::vector<ItemCode> antecedent;
  std::vector<ItemCode> consequent;
  std::uint64_t union_count = 0;       // transactions containing A and B
  std::uint64_t antecedent_count = 0;  // transactions containing A
  std::uint64_t total = 0;

  Fraction support() const { return {union_count, total}; }
  Fraction confidence() const { return {union_count, antecedent_count}; }

  friend bool operator==(const AssociationRule&, const AssociationRule&) = default;
};

// Every itemset of size <= max_itemset_size whose support reaches
// min_support, with exact counts, ordered by (size, items). Transactions need
// not be sorted; duplicates inside a transaction are ignored.
// Throws EmptyTransactionList and InvalidConfig.
std::vector<Itemset> mine_frequent_itemsets(std::span<const Transaction> transactions,
                                            const MinerConfig& config);

// All rules A => B with A u B frequent, A n B empty, both non-empty and
// confidence >= min_confidence, ordered by (|A|, A, B). `frequent` must be
// downward closed (as produced by mine_frequent_itemsets); a missing subset
// throws InvalidArgument.
std::vector<AssociationRule> derive_rules(std::span<const Itemset> frequent,
                                          const MinerConfig& config);

struct RuleBase {
  ItemKind kind = ItemKind::Element;
  std::vector<AssociationRule> rules;
  MinerConfig config;
  std::string corpus_fingerprint;
  std::uint64_t transaction_count = 0;

  friend bool operator==(const RuleBase&, const RuleBase&) = default;
};

struct RuleBases {
  RuleBase elements;
  RuleBase interactions;

  const RuleBase& of(ItemKind kind) const {
    return kind == ItemKind::Element ? elements : interactions;
  }

  friend bool operator==(const RuleBases&, const RuleBases&) = default;
};

// Mines both tables of a non-empty catalog and stamps the catalog fingerprint.
RuleBases mine_rulebase(const Catalog& catalog, const MinerConfig& config);

// Throws RebuildRequired when the rule bases were mined from another catalog.
void require_fingerprint(const RuleBases& rules, const Catalog& catalog);

// rules.mfr persistence (JSON, versioned; see docs/file-formats.md).
inline constexpr std::string_view kRulesFormat = "mf-rules";
inline constexpr std::string_view kRulesVersion = "v1";

std::string rulebases_to_text(const RuleBases& rules);
RuleBases rulebases_from_text(std::string_view text);
void save_rulebases(const RuleBases& rules, const std::filesystem::path& destination);
RuleBases load_rulebases(const std::filesystem::path& source);
// Loads and refuses with RebuildRequired if the fingerprint does not match.
RuleBases load_rulebases(const std::filesystem::path& source, const Catalog& catalog);

}  // namespace mf
