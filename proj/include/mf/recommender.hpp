#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mf/catalog.hpp"
#include "mf/fraction.hpp"
#include "mf/miner.hpp"
#include "mf/vgdl.hpp"

namespace mf {

// Catalog plus the rule bases mined from it. Immutable once built and shared
// by every session.
class KnowledgeBase {
 public:
  // Throws StaleRuleBase when the rules were mined from a different catalog.
  KnowledgeBase(Catalog catalog, RuleBases rules);

  const Catalog& catalog() const { return catalog_; }
  const RuleBases& rules() const { return rules_; }
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  Catalog catalog_;
  RuleBases rules_;
  std::string fingerprint_;
};

enum class RecommendationBasis {
  Rule,               // some rule A => B with A inside the design and the item in B
  FrequencyFallback,  // cold start: no design items of this kind to match against
};

std::string_view to_string(RecommendationBasis basis);

struct SourceRule {
  std::vector<ItemCode> antecedent;
  std::vector<ItemCode> consequent;

  friend bool operator==(const SourceRule&, const SourceRule&) = default;
};

struct Recommendation {
  ItemKind kind = ItemKind::Element;
  ItemCode code = 0;
  std::string label;
  Fraction confidence;
  Fraction support;
  RecommendationBasis basis = RecommendationBasis::Rule;
  std::optional<SourceRule> source_rule;  // empty for the fallback
  std::vector<std::string> provenance;    // corpus games containing the item
  std::uint64_t revision = 0;             // session revision it was computed at

  // "element:<code>" / "interaction:<code>"
  std::string id() const;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

// Ranking order: confidence desc, support desc, code asc.
bool ranks_before(const Recommendation& a, const Recommendation& b);

// Stateless ranking over an encoded design; the session methods below wrap
// these. `limit` must be positive.
std::vector<Recommendation> rank_elements(const KnowledgeBase& knowledge,
                                          const std::set<ItemCode>& element_codes,
                                          std::size_t limit);
std::vector<Recommendation> rank_interactions(const KnowledgeBase& knowledge,
                                              const vgdl::GameDescription& design,
                                              const EncodedDesign& encoded,
                                              std::size_t limit);

// One designer's evolving game. Every successful mutation bumps the revision
// by exactly one and re-encodes the design; a failed mutation leaves the
// session untouched. Not internally synchronized.
class DesignSession {
 public:
  DesignSession(std::string id, std::shared_ptr<const KnowledgeBase> knowledge,
                vgdl::GameDescription initial = {});

  const std::string& id() const { return id_; }
  std::uint64_t revision() const { return revision_; }
  const vgdl::GameDescription& design() const { return design_; }
  const EncodedDesign& encoded() const { return encoded_; }
  const KnowledgeBase& knowledge() const { return *knowledge_; }

  std::vector<Recommendation> recommend_elements(std::size_t limit) const;
  std::vector<Recommendation> recommend_interactions(std::size_t limit) const;

  // Throws StaleRecommendation when `expected` is not the current revision.
  void require_revision(std::uint64_t expected) const;

  // Materializes a recommendation computed at the current revision. Elements
  // become a new top-level sprite with a fresh identifier; interactions
  // reference sprites already in the design. Returns the new sprite
  // identifier or the new interaction's index as text.
  // Throws StaleRecommendation and MissingElements.
  std::string apply(const Recommendation& recommendation);

  // Adds a sprite by hand. Identifier defaults to a fresh name derived from
  // the behavior; a child is placed at the end of its parent's subtree.
  // Throws ParseFailure (line 0) when the result would be invalid.
  std::string add_element(const std::string& behavior, vgdl::ParamMap params,
                          std::optional<std::string> identifier = std::nullopt,
                          std::optional<std::string> parent = std::nullopt);
  std::size_t add_interaction(vgdl::InteractionDef interaction);

  // Removes the sprite, its nested children and everything that references
  // them (interactions, terminations, level-map entries). Throws NotFound.
  void remove_element(const std::string& identifier);
  void remove_interaction(std::size_t index);

 private:
  void commit(vgdl::GameDescription next);
  std::string fresh_identifier(const std::string& base) const;
  std::optional<std::string> identifier_for(ItemCode element) const;

  std::string id_;
  std::shared_ptr<const KnowledgeBase> knowledge_;
  vgdl::GameDescription design_;
  EncodedDesign encoded_;
  std::uint64_t revision_ = 0;
};

}  // namespace mf
