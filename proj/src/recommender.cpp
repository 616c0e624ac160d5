#include "mf/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>

#include "mf/error.hpp"

namespace mf {

KnowledgeBase::KnowledgeBase(Catalog catalog, RuleBases rules)
    : catalog_(std::move(catalog)), rules_(std::move(rules)) {
  fingerprint_ = catalog_.fingerprint();
  for (const RuleBase* base : {&rules_.elements, &rules_.interactions})
    if (base->corpus_fingerprint != fingerprint_)
      throw StaleRuleBase("rule base fingerprint " + base->corpus_fingerprint +
                          " does not match catalog " + fingerprint_);
}

std::string_view to_string(RecommendationBasis basis) {
  return basis == RecommendationBasis::Rule ? "rule" : "frequency-fallback";
}

std::string Recommendation::id() const {
  return std::string(to_string(kind)) + ":" + std::to_string(code);
}

bool ranks_before(const Recommendation& a, const Recommendation& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.support != b.support) return a.support > b.support;
  return a.code < b.code;
}

namespace {

void require_limit(std::size_t limit) {
  if (limit == 0) throw InvalidArgument("limit must be a positive integer");
}

bool contains_all(const std::set<ItemCode>& set, const std::vector<ItemCode>& items) {
  return std::all_of(items.begin(), items.end(),
                     [&](ItemCode c) { return set.count(c) != 0; });
}

// Keeps, per item, the candidate with the highest (confidence, support).
// Ties keep the first candidate seen, which follows rule order.
class CandidatePool {
 public:
  void offer(Recommendation candidate) {
    auto [it, inserted] = best_.try_emplace(candidate.code, candidate);
    if (inserted) return;
    auto& current = it->second;
    if (candidate.confidence > current.confidence ||
        (candidate.confidence == current.confidence && candidate.support > current.support))
      current = std::move(candidate);
  }

  std::vector<Recommendation> ranked(const Catalog& catalog, std::size_t limit) {
    std::vector<Recommendation> out;
    for (auto& [code, rec] : best_) out.push_back(std::move(rec));
    std::sort(out.begin(), out.end(), ranks_before);
    if (out.size() > limit) out.resize(limit);
    for (auto& rec : out) {
      rec.label = catalog.describe(rec.kind, rec.code);
      rec.provenance = catalog.games_containing(rec.kind, rec.code);
    }
    return out;
  }

 private:
  std::map<ItemCode, Recommendation> best_;
};

void offer_rule_consequents(CandidatePool& pool, ItemKind kind, const RuleBase& base,
                            const std::set<ItemCode>& current,
                            const std::function<bool(ItemCode)>& applicable) {
  for (const auto& rule : base.rules) {
    if (!contains_all(current, rule.antecedent)) continue;
    for (ItemCode item : rule.consequent) {
      if (current.count(item) != 0 || !applicable(item)) continue;
      Recommendation rec;
      rec.kind = kind;
      rec.code = item;
      rec.confidence = rule.confidence();
      rec.support = rule.support();
      rec.basis = RecommendationBasis::Rule;
      rec.source_rule = SourceRule{rule.antecedent, rule.consequent};
      pool.offer(std::move(rec));
    }
  }
}

}  // namespace

std::vector<Recommendation> rank_elements(const KnowledgeBase& knowledge,
                                          const std::set<ItemCode>& element_codes,
                                          std::size_t limit) {
  require_limit(limit);
  const Catalog& catalog = knowledge.catalog();
  CandidatePool pool;
  if (element_codes.empty()) {
    // Cold start: singleton support, i.e. the confidence of {} => {item}.
    const auto total = static_cast<std::uint64_t>(catalog.game_count());
    for (ItemCode code = 0; code < catalog.elements().size(); ++code) {
      if (catalog.elements()[code].reserved()) continue;
      const auto count = catalog.games_containing(ItemKind::Element, code).size();
      if (count == 0) continue;
      Recommendation rec;
      rec.kind = ItemKind::Element;
      rec.code = code;
      rec.confidence = rec.support = Fraction(count, total);
      rec.basis = RecommendationBasis::FrequencyFallback;
      pool.offer(std::move(rec));
    }
  } else {
    offer_rule_consequents(pool, ItemKind::Element, knowledge.rules().elements,
                           element_codes, [](ItemCode) { return true; });
  }
  return pool.ranked(catalog, limit);
}

std::vector<Recommendation> rank_interactions(const KnowledgeBase& knowledge,
                                              const vgdl::GameDescription& design,
                                              const EncodedDesign& encoded,
                                              std::size_t limit) {
  require_limit(limit);
  const Catalog& catalog = knowledge.catalog();

  // Reserved endpoints (EOS, an undeclared wall/avatar) are implicitly part of
  // every design; at least one endpoint must be a real design element.
  auto present = [&](ItemCode element) {
    const auto& item = catalog.element(element);
    if (item.reserved()) return design.find_sprite(item.behavior) == nullptr;
    return encoded.elements.count(element) != 0;
  };
  auto applicable = [&](ItemCode code) {
    const auto& item = catalog.interaction(code);
    const bool anchored = !catalog.element(item.first).reserved() ||
                          !catalog.element(item.second).reserved();
    return anchored && present(item.first) && present(item.second);
  };

  CandidatePool pool;
  if (encoded.interactions.empty()) {
    // Cold start: confidence of {first, second} => {interaction} over the
    // element table, i.e. how often games holding both element types wire
    // them together this way.
    const auto total = static_cast<std::uint64_t>(catalog.game_count());
    for (ItemCode code = 0; code < catalog.interactions().size(); ++code) {
      if (!applicable(code)) continue;
      const auto& item = catalog.interaction(code);
      std::vector<ItemCode> endpoints;
      for (ItemCode e : {item.first, item.second})
        if (!catalog.element(e).reserved()) endpoints.push_back(e);
      const auto with_both = catalog.count_games_with_elements(endpoints);
      const auto with_item = catalog.games_containing(ItemKind::Interaction, code).size();
      if (with_item == 0 || with_both == 0) continue;
      Recommendation rec;
      rec.kind = ItemKind::Interaction;
      rec.code = code;
      rec.confidence = Fraction(with_item, with_both);
      rec.support = Fraction(with_item, total);
      rec.basis = RecommendationBasis::FrequencyFallback;
      pool.offer(std::move(rec));
    }
  } else {
    offer_rule_consequents(pool, ItemKind::Interaction, knowledge.rules().interactions,
                           encoded.interactions, applicable);
  }
  return pool.ranked(catalog, limit);
}

DesignSession::DesignSession(std::string id, std::shared_ptr<const KnowledgeBase> knowledge,
                             vgdl::GameDescription initial)
    : id_(std::move(id)), knowledge_(std::move(knowledge)) {
  if (!knowledge_) throw InvalidArgument("session needs a knowledge base");
  vgdl::validate(initial);
  design_ = std::move(initial);
  encoded_ = encode_design(design_, knowledge_->catalog());
}

std::vector<Recommendation> DesignSession::recommend_elements(std::size_t limit) const {
  auto out = rank_elements(*knowledge_, encoded_.elements, limit);
  for (auto& rec : out) rec.revision = revision_;
  return out;
}

std::vector<Recommendation> DesignSession::recommend_interactions(std::size_t limit) const {
  auto out = rank_interactions(*knowledge_, design_, encoded_, limit);
  for (auto& rec : out) rec.revision = revision_;
  return out;
}

void DesignSession::require_revision(std::uint64_t expected) const {
  if (expected != revision_) throw StaleRecommendation(expected, revision_);
}

void DesignSession::commit(vgdl::GameDescription next) {
  vgdl::validate(next);
  encoded_ = encode_design(next, knowledge_->catalog());
  design_ = std::move(next);
  ++revision_;
}

std::string DesignSession::fresh_identifier(const std::string& base) const {
  std::string stem = base;
  if (!vgdl::is_identifier(stem) || stem == "EOS") stem = "sprite";
  if (design_.find_sprite(stem) == nullptr) return stem;
  for (std::size_t n = 2;; ++n) {
    std::string candidate = stem + std::to_string(n);
    if (design_.find_sprite(candidate) == nullptr) return candidate;
  }
}

std::optional<std::string> DesignSession::identifier_for(ItemCode element) const {
  const Catalog& catalog = knowledge_->catalog();
  const auto& item = catalog.element(element);
  if (item.reserved()) {
    if (design_.find_sprite(item.behavior) != nullptr) return std::nullopt;
    return item.behavior;
  }
  for (const auto& sprite : design_.sprites) {
    auto code = catalog.element_code(element_item(design_, sprite));
    if (code && *code == element) return sprite.identifier;
  }
  return std::nullopt;
}

std::string DesignSession::apply(const Recommendation& recommendation) {
  require_revision(recommendation.revision);
  const Catalog& catalog = knowledge_->catalog();
  vgdl::GameDescription next = design_;

  if (recommendation.kind == ItemKind::Element) {
    const auto& item = catalog.element(recommendation.code);
    if (item.reserved())
      throw InvalidArgument("reserved element '" + item.behavior + "' cannot be added");
    vgdl::SpriteDef sprite;
    sprite.identifier = fresh_identifier(catalog.element_name(recommendation.code));
    sprite.behavior = item.behavior;
    sprite.params = item.salient_params;
    std::string identifier = sprite.identifier;
    next.sprites.push_back(std::move(sprite));
    commit(std::move(next));
    return identifier;
  }

  const auto& item = catalog.interaction(recommendation.code);
  auto first = identifier_for(item.first);
  auto second = identifier_for(item.second);
  if (!first || !second)
    throw MissingElements("interaction '" + catalog.describe(ItemKind::Interaction,
                                                             recommendation.code) +
                          "' needs element types the design does not have");
  next.interactions.push_back({*first, *second, item.effect, {}});
  commit(std::move(next));
  return std::to_string(design_.interactions.size() - 1);
}

std::string DesignSession::add_element(const std::string& behavior, vgdl::ParamMap params,
                                       std::optional<std::string> identifier,
                                       std::optional<std::string> parent) {
  std::string name;
  if (identifier) {
    name = *identifier;
  } else {
    std::string base = behavior;
    if (!base.empty()) base[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(base[0])));
    name = fresh_identifier(base);
  }

  vgdl::GameDescription next = design_;
  vgdl::SpriteDef sprite{name, behavior, std::move(params), parent};
  auto position = next.sprites.end();
  if (parent) {
    auto it = std::find_if(next.sprites.begin(), next.sprites.end(),
                           [&](const auto& s) { return s.identifier == *parent; });
    if (it == next.sprites.end()) throw NotFound("no sprite named '" + *parent + "'");
    // Skip past the parent's subtree.
    std::set<std::string> subtree{*parent};
    position = it + 1;
    while (position != next.sprites.end() && position->parent &&
           subtree.count(*position->parent) != 0) {
      subtree.insert(position->identifier);
      ++position;
    }
  }
  next.sprites.insert(position, std::move(sprite));
  commit(std::move(next));
  return name;
}

std::size_t DesignSession::add_interaction(vgdl::InteractionDef interaction) {
  vgdl::GameDescription next = design_;
  next.interactions.push_back(std::move(interaction));
  commit(std::move(next));
  return design_.interactions.size() - 1;
}

void DesignSession::remove_element(const std::string& identifier) {
  if (design_.find_sprite(identifier) == nullptr)
    throw NotFound("no sprite named '" + identifier + "'");

  std::set<std::string> removed{identifier};
  for (const auto& sprite : design_.sprites)
    if (sprite.parent && removed.count(*sprite.parent) != 0) removed.insert(sprite.identifier);
  auto gone = [&](const std::string& name) { return removed.count(name) != 0; };

  vgdl::GameDescription next = design_;
  std::erase_if(next.sprites, [&](const auto& s) { return gone(s.identifier); });
  std::erase_if(next.interactions,
                [&](const auto& i) { return gone(i.first) || gone(i.second); });
  std::erase_if(next.terminations, [&](const auto& t) {
    return std::any_of(t.params.begin(), t.params.end(), [&](const auto& entry) {
      const auto* text = std::get_if<std::string>(&entry.second);
      return entry.first.rfind("stype", 0) == 0 && text != nullptr && gone(*text);
    });
  });
  for (auto it = next.level_mapping.begin(); it != next.level_mapping.end();) {
    std::erase_if(it->second, gone);
    it = it->second.empty() ? next.level_mapping.erase(it) : std::next(it);
  }
  commit(std::move(next));
}

void DesignSession::remove_interaction(std::size_t index) {
  if (index >= design_.interactions.size())
    throw NotFound("no interaction at index " + std::to_string(index));
  vgdl::GameDescription next = design_;
  next.interactions.erase(next.interactions.begin() + static_cast<std::ptrdiff_t>(index));
  commit(std::move(next));
}

}  // namespace mf
