#include "mf/catalog.hpp"

#include <algorithm>
#include <unordered_map>

#include "mf/digest.hpp"
#include "mf/error.hpp"

namespace mf {

std::string_view to_string(ItemKind kind) {
  return kind == ItemKind::Element ? "element" : "interaction";
}

ItemKind item_kind_from_string(std::string_view text) {
  if (text == "element") return ItemKind::Element;
  if (text == "interaction") return ItemKind::Interaction;
  throw InvalidArgument("unknown item kind '" + std::string(text) +
                        "' (expected element or interaction)");
}

const std::vector<std::string>& salient_keys(std::string_view behavior) {
  static const std::unordered_map<std::string_view, std::vector<std::string>> table = {
      {"Bomber", {"stype"}},          {"Chaser", {"stype"}},
      {"FlakAvatar", {"stype"}},      {"Immovable", {"img"}},
      {"Missile", {"orientation"}},   {"OrientedFlicker", {"orientation"}},
      {"Passive", {"img"}},           {"Portal", {"stype"}},
      {"Resource", {"img"}},          {"ShootAvatar", {"stype"}},
      {"SpawnPoint", {"stype"}},
  };
  static const std::vector<std::string> none;
  auto it = table.find(behavior);
  return it == table.end() ? none : it->second;
}

std::string ElementItem::label() const {
  std::string text = behavior;
  for (const auto& [key, value] : salient_params)
    text += " " + key + "=" + vgdl::render_scalar(value);
  return text;
}

ElementItem element_item(const vgdl::GameDescription& game,
                         const vgdl::SpriteDef& sprite) {
  ElementItem item;
  item.behavior = sprite.behavior;
  const vgdl::ParamMap flat = vgdl::flattened_params(game, sprite);
  std::vector<std::string> keys = salient_keys(sprite.behavior);
  std::sort(keys.begin(), keys.end());
  for (const auto& key : keys)
    if (const auto* value = flat.find(key)) item.salient_params.set(key, *value);
  return item;
}

std::optional<ElementItem> referenced_element(const vgdl::GameDescription& game,
                                              std::string_view identifier) {
  if (const auto* sprite = game.find_sprite(identifier))
    return element_item(game, *sprite);
  if (vgdl::is_reserved(identifier)) return ElementItem{std::string(identifier), {}};
  return std::nullopt;
}

const ElementItem& Catalog::element(ItemCode code) const {
  if (code >= elements_.size())
    throw NotFound("no element with code " + std::to_string(code));
  return elements_[code];
}

const InteractionItem& Catalog::interaction(ItemCode code) const {
  if (code >= interactions_.size())
    throw NotFound("no interaction with code " + std::to_string(code));
  return interactions_[code];
}

std::optional<ItemCode> Catalog::element_code(const ElementItem& item) const {
  auto it = element_index_.find(item.label());
  if (it == element_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemCode> Catalog::interaction_code(const InteractionItem& item) const {
  auto it = interaction_index_.find(item);
  if (it == interaction_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Catalog::element_name(ItemCode code) const {
  element(code);
  return element_names_[code];
}

std::string Catalog::describe(ItemKind kind, ItemCode code) const {
  if (kind == ItemKind::Element) return element(code).label();
  const auto& item = interaction(code);
  return element(item.first).label() + " / " + element(item.second).label() +
         " > " + item.effect;
}

const std::map<std::string, Transaction>& Catalog::transactions(ItemKind kind) const {
  return kind == ItemKind::Element ? element_transactions_ : interaction_transactions_;
}

std::vector<Transaction> Catalog::transaction_list(ItemKind kind) const {
  std::vector<Transaction> rows;
  for (const auto& [name, row] : transactions(kind)) rows.push_back(row);
  return rows;
}

std::vector<std::string> Catalog::games_containing(ItemKind kind, ItemCode code) const {
  std::vector<std::string> names;
  for (const auto& [name, row] : transactions(kind))
    if (std::binary_search(row.begin(), row.end(), code)) names.push_back(name);
  return names;
}

std::size_t Catalog::count_games_with_elements(std::span<const ItemCode> codes) const {
  std::size_t count = 0;
  for (const auto& [name, row] : element_transactions_) {
    bool all = std::all_of(codes.begin(), codes.end(), [&](ItemCode c) {
      return std::binary_search(row.begin(), row.end(), c);
    });
    if (all) ++count;
  }
  return count;
}

std::string Catalog::fingerprint() const { return sha256_hex(catalog_to_text(*this)); }

ItemCode Catalog::intern_element(const ElementItem& item, const std::string& name) {
  auto [it, inserted] =
      element_index_.try_emplace(item.label(), static_cast<ItemCode>(elements_.size()));
  if (inserted) {
    elements_.push_back(item);
    element_names_.push_back(name);
  }
  return it->second;
}

ItemCode Catalog::intern_interaction(const InteractionItem& item) {
  auto [it, inserted] =
      interaction_index_.try_emplace(item, static_cast<ItemCode>(interactions_.size()));
  if (inserted) interactions_.push_back(item);
  return it->second;
}

void Catalog::rebuild_indexes() {
  element_index_.clear();
  interaction_index_.clear();
  for (std::size_t i = 0; i < elements_.size(); ++i)
    element_index_.emplace(elements_[i].label(), static_cast<ItemCode>(i));
  for (std::size_t i = 0; i < interactions_.size(); ++i)
    interaction_index_.emplace(interactions_[i], static_cast<ItemCode>(i));
}

class CatalogBuilder {
 public:
  void add(const vgdl::GameDescription& game) {
    std::set<ItemCode> elements;
    for (const auto& sprite : game.sprites)
      elements.insert(catalog_.intern_element(element_item(game, sprite), sprite.identifier));

    std::set<ItemCode> interactions;
    for (const auto& interaction : game.interactions) {
      InteractionItem item{reference_code(game, interaction.first),
                           reference_code(game, interaction.second),
                           interaction.effect};
      interactions.insert(catalog_.intern_interaction(item));
    }
    catalog_.element_transactions_.emplace(game.name,
                                           Transaction(elements.begin(), elements.end()));
    catalog_.interaction_transactions_.emplace(
        game.name, Transaction(interactions.begin(), interactions.end()));
  }

  Catalog finish() { return std::move(catalog_); }

 private:
  ItemCode reference_code(const vgdl::GameDescription& game, const std::string& name) {
    // validate() guarantees the name resolves.
    return catalog_.intern_element(*referenced_element(game, name), name);
  }

  Catalog catalog_;
};

Catalog ingest_corpus(std::vector<vgdl::GameDescription> games) {
  std::sort(games.begin(), games.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < games.size(); ++i) {
    if (games[i].name.empty()) throw InvalidArgument("corpus game without a name");
    if (i > 0 && games[i].name == games[i - 1].name)
      throw DuplicateGameName(games[i].name);
  }
  CatalogBuilder builder;
  for (const auto& game : games) {
    try {
      vgdl::validate(game);
    } catch (const ParseFailure& failure) {
      throw ParseFailure(0, "game '" + game.name + "': " + failure.reason());
    }
    builder.add(game);
  }
  return builder.finish();
}

EncodedDesign encode_design(const vgdl::GameDescription& design, const Catalog& catalog) {
  EncodedDesign encoded;
  auto note_unknown = [&](UnknownItem item) {
    if (std::find(encoded.unknown.begin(), encoded.unknown.end(), item) ==
        encoded.unknown.end())
      encoded.unknown.push_back(std::move(item));
  };

  for (const auto& sprite : design.sprites) {
    ElementItem item = element_item(design, sprite);
    if (auto code = catalog.element_code(item))
      encoded.elements.insert(*code);
    else
      note_unknown(std::move(item));
  }

  for (const auto& interaction : design.interactions) {
    auto first = referenced_element(design, interaction.first);
    auto second = referenced_element(design, interaction.second);
    // Dangling names cannot come out of the parser; skip them for hand-built
    // partial designs rather than failing.
    if (!first || !second) continue;
    auto first_code = catalog.element_code(*first);
    auto second_code = catalog.element_code(*second);
    std::optional<ItemCode> code;
    if (first_code && second_code)
      code = catalog.interaction_code({*first_code, *second_code, interaction.effect});
    if (code)
      encoded.interactions.insert(*code);
    else
      note_unknown(InteractionSignature{*first, *second, interaction.effect});
  }
  return encoded;
}

}  // namespace mf
