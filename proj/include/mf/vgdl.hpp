#pragma once

// Data model, parser and renderer for the supported subset of the video game
// description language (VGDL). See docs/vgdl-subset.md for the grammar and the
// closed vocabularies.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mf::vgdl {

// Parameter value. Integer and decimal literals are stored numerically so that
// comparisons are by value ("5" == "5", "0.50" == "0.5").
using Scalar = std::variant<std::int64_t, double, std::string>;

// Classifies a raw token the way the parser does.
Scalar parse_scalar(std::string_view token);
std::string render_scalar(const Scalar& value);

// Insertion-ordered key/value list; keys are unique.
class ParamMap {
 public:
  using Entry = std::pair<std::string, Scalar>;

  ParamMap() = default;
  ParamMap(std::initializer_list<Entry> entries);

  // Returns false (and leaves the map untouched) when the key already exists.
  bool insert(std::string key, Scalar value);
  // Inserts or overwrites in place.
  void set(const std::string& key, Scalar value);
  const Scalar* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const ParamMap&, const ParamMap&) = default;

 private:
  std::vector<Entry> entries_;
};

struct SpriteDef {
  std::string identifier;
  std::string behavior;
  ParamMap params;
  std::optional<std::string> parent;

  friend bool operator==(const SpriteDef&, const SpriteDef&) = default;
};

struct InteractionDef {
  std::string first;
  std::string second;
  std::string effect;
  ParamMap params;

  friend bool operator==(const InteractionDef&, const InteractionDef&) = default;
};

struct TerminationDef {
  std::string kind;
  ParamMap params;
  bool win = false;

  friend bool operator==(const TerminationDef&, const TerminationDef&) = default;
};

// One game. Sprites are kept in pre-order: a child always follows its parent
// and stays inside the parent's contiguous subtree.
struct GameDescription {
  std::string name;
  std::vector<SpriteDef> sprites;
  std::vector<InteractionDef> interactions;
  std::vector<TerminationDef> terminations;
  std::map<char, std::vector<std::string>> level_mapping;

  const SpriteDef* find_sprite(std::string_view identifier) const;

  friend bool operator==(const GameDescription&, const GameDescription&) = default;
};

// Closed vocabularies.
const std::vector<std::string>& behaviors();
const std::vector<std::string>& effects();
const std::vector<std::string>& terminations();
const std::vector<std::string>& reserved_identifiers();

bool is_behavior(std::string_view name);
bool is_effect(std::string_view name);
bool is_termination(std::string_view name);
bool is_reserved(std::string_view identifier);
bool is_identifier(std::string_view token);

// Parses description source. Throws mf::ParseFailure with a 1-based line.
GameDescription parse_description(std::string_view text);

// Canonical source for a valid description. parse_description(render(g)) == g.
std::string render_description(const GameDescription& game);

// Checks every model invariant on a description built in code. Throws
// mf::ParseFailure (line 0) naming the first violation.
void validate(const GameDescription& game);

// Sprite params with the parent chain applied: ancestors first, nearer
// definitions overriding farther ones, own params last.
ParamMap flattened_params(const GameDescription& game, const SpriteDef& sprite);

// Identifier of a sprite, or of a reserved name that no sprite declares.
// Used by reference checks in interactions, terminations and the level map.
bool resolves(const GameDescription& game, std::string_view identifier);

}  // namespace mf::vgdl
