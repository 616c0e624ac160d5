#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mf/vgdl.hpp"

namespace mf {

enum class ItemKind { Element, Interaction };

std::string_view to_string(ItemKind kind);
ItemKind item_kind_from_string(std::string_view text);

using ItemCode = std::uint32_t;

// Sorted, duplicate-free item codes of one game.
using Transaction = std::vector<ItemCode>;

// Type identity of a sprite: its behavior plus the params the identity table
// marks salient for that behavior, sorted by key. Reserved identifiers that a
// game references without declaring (EOS, wall, avatar) become reserved
// elements whose behavior is the identifier itself.
struct ElementItem {
  std::string behavior;
  vgdl::ParamMap salient_params;

  bool reserved() const { return vgdl::is_reserved(behavior); }
  std::string label() const;

  friend bool operator==(const ElementItem&, const ElementItem&) = default;
};

// Interaction identity: ordered element pair and the effect fired.
struct InteractionItem {
  ItemCode first = 0;
  ItemCode second = 0;
  std::string effect;

  friend auto operator<=>(const InteractionItem&, const InteractionItem&) = default;
};

// An interaction described by element types rather than codes; used to report
// design interactions whose element types the catalog has never seen.
struct InteractionSignature {
  ElementItem first;
  ElementItem second;
  std::string effect;

  friend bool operator==(const InteractionSignature&,
                         const InteractionSignature&) = default;
};

using UnknownItem = std::variant<ElementItem, InteractionSignature>;

// Salient param keys for a behavior (the shipped identity table).
const std::vector<std::string>& salient_keys(std::string_view behavior);

ElementItem element_item(const vgdl::GameDescription& game,
                         const vgdl::SpriteDef& sprite);

// Element referenced by an interaction or mapping name: the declared sprite's
// item, or the reserved element when the name is reserved and undeclared.
// Nullopt when the name resolves to nothing.
std::optional<ElementItem> referenced_element(const vgdl::GameDescription& game,
                                              std::string_view identifier);

class Catalog {
 public:
  Catalog() = default;

  const std::vector<ElementItem>& elements() const { return elements_; }
  const std::vector<InteractionItem>& interactions() const { return interactions_; }

  const ElementItem& element(ItemCode code) const;
  const InteractionItem& interaction(ItemCode code) const;
  std::optional<ItemCode> element_code(const ElementItem& item) const;
  std::optional<ItemCode> interaction_code(const InteractionItem& item) const;

  // Sprite identifier under which an element was first seen in the corpus.
  const std::string& element_name(ItemCode code) const;

  // Human-readable item text, e.g. "Bomber stype=bomb" or
  // "MovingAvatar / Missile orientation=LEFT > killSprite".
  std::string describe(ItemKind kind, ItemCode code) const;

  const std::map<std::string, Transaction>& element_transactions() const {
    return element_transactions_;
  }
  const std::map<std::string, Transaction>& interaction_transactions() const {
    return interaction_transactions_;
  }
  const std::map<std::string, Transaction>& transactions(ItemKind kind) const;

  // Transactions in game-name order, ready for the miner.
  std::vector<Transaction> transaction_list(ItemKind kind) const;

  std::size_t game_count() const { return element_transactions_.size(); }
  bool empty() const { return game_count() == 0; }

  // Games (in name order) whose transaction of `kind` contains `code`.
  std::vector<std::string> games_containing(ItemKind kind, ItemCode code) const;

  // Games whose element transaction contains every code in `codes`.
  std::size_t count_games_with_elements(std::span<const ItemCode> codes) const;

  // SHA-256 of the canonical serialized form.
  std::string fingerprint() const;

  friend bool operator==(const Catalog& a, const Catalog& b) {
    return a.elements_ == b.elements_ && a.element_names_ == b.element_names_ &&
           a.interactions_ == b.interactions_ &&
           a.element_transactions_ == b.element_transactions_ &&
           a.interaction_transactions_ == b.interaction_transactions_;
  }

 private:
  friend class CatalogBuilder;
  friend Catalog catalog_from_text(std::string_view text);

  ItemCode intern_element(const ElementItem& item, const std::string& name);
  ItemCode intern_interaction(const InteractionItem& item);
  void rebuild_indexes();

  std::vector<ElementItem> elements_;
  std::vector<std::string> element_names_;
  std::vector<InteractionItem> interactions_;
  std::map<std::string, Transaction> element_transactions_;
  std::map<std::string, Transaction> interaction_transactions_;

  std::map<std::string, ItemCode> element_index_;  // keyed by label()
  std::map<InteractionItem, ItemCode> interaction_index_;
};

// Builds the two transaction tables. Games are processed in name order and
// codes are handed out in first-seen order, so the result does not depend on
// the order of `games`. Throws DuplicateGameName, InvalidArgument for an
// unnamed game and ParseFailure for a game that violates model invariants.
Catalog ingest_corpus(std::vector<vgdl::GameDescription> games);

struct EncodedDesign {
  std::set<ItemCode> elements;
  std::set<ItemCode> interactions;
  std::vector<UnknownItem> unknown;
};

// Never fails: items missing from the dictionaries land in `unknown`.
EncodedDesign encode_design(const vgdl::GameDescription& design,
                            const Catalog& catalog);

// Persistence (catalog.mfc, JSON with a versioned header; see
// docs/file-formats.md). Loading validates the schema and every invariant.
inline constexpr std::string_view kCatalogFormat = "mf-catalog";
inline constexpr std::string_view kCatalogVersion = "v1";

std::string catalog_to_text(const Catalog& catalog);
Catalog catalog_from_text(std::string_view text);
void save_catalog(const Catalog& catalog, const std::filesystem::path& destination);
Catalog load_catalog(const std::filesystem::path& source);

// Reads every `.vgd` file in a directory (sorted by filename). Games without
// a `Game` line are named after the file stem. Parse failures are rethrown
// with the filename in the reason.
std::vector<vgdl::GameDescription> load_corpus(const std::filesystem::path& directory);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mf
