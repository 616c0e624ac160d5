#include "mf/vgdl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace mf::vgdl {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// -?\d+
bool is_integer_literal(std::string_view s) {
  std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     is_digit);
}

// -?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)? containing a '.' or an exponent
bool is_decimal_literal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  std::size_t int_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  bool has_point = false;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    has_point = true;
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
  }
  if (int_digits == 0 && frac_digits == 0) return false;
  bool has_exponent = false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    has_exponent = true;
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size() && (has_point || has_exponent);
}

std::optional<double> to_double(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

}  // namespace

Scalar parse_scalar(std::string_view token) {
  if (is_integer_literal(token)) {
    std::int64_t value = 0;
    auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec == std::errc() && ptr == token.data() + token.size()) return value;
    if (auto d = to_double(token)) return *d;
    return std::string(token);
  }
  if (is_decimal_literal(token)) {
    if (auto d = to_double(token)) return *d;
  }
  return std::string(token);
}

std::string render_scalar(const Scalar& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) {
    std::array<char, 64> buffer{};
    auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), *d);
    std::string text(buffer.data(), ptr);
    if (text.find_first_of(".e") == std::string::npos) text += ".0";
    return text;
  }
  return std::get<std::string>(value);
}

ParamMap::ParamMap(std::initializer_list<Entry> entries) {
  for (const auto& [key, value] : entries) set(key, value);
}

bool ParamMap::insert(std::string key, Scalar value) {
  if (contains(key)) return false;
  entries_.emplace_back(std::move(key), std::move(value));
  return true;
}

void ParamMap::set(const std::string& key, Scalar value) {
  for (auto& entry : entries_) {
    if (entry.first == key) {
      entry.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

const Scalar* ParamMap::find(std::string_view key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return &entry.second;
  return nullptr;
}

const SpriteDef* GameDescription::find_sprite(std::string_view identifier) const {
  for (const auto& sprite : sprites)
    if (sprite.identifier == identifier) return &sprite;
  return nullptr;
}

const std::vector<std::string>& behaviors() {
  static const std::vector<std::string> names = {
      "Bomber",       "Chaser",          "Door",       "FlakAvatar",
      "Flicker",      "HorizontalAvatar", "Immovable", "Missile",
      "MovingAvatar", "OrientedFlicker", "Passive",    "Portal",
      "RandomNPC",    "Resource",        "ShootAvatar", "SpawnPoint"};
  return names;
}

const std::vector<std::string>& effects() {
  static const std::vector<std::string> names = {
      "bounceForward",    "changeResource", "cloneSprite", "collectResource",
      "killBoth",         "killSprite",     "pullWithIt",  "reverseDirection",
      "spawnBehind",      "stepBack",       "teleportToExit", "transformTo",
      "turnAround",       "wrapAround"};
  return names;
}

const std::vector<std::string>& terminations() {
  static const std::vector<std::string> names = {"MultiSpriteCounter",
                                                 "SpriteCounter", "Timeout"};
  return names;
}

const std::vector<std::string>& reserved_identifiers() {
  static const std::vector<std::string> names = {"EOS", "avatar", "wall"};
  return names;
}

namespace {
bool contains_name(const std::vector<std::string>& list, std::string_view name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}
}  // namespace

bool is_behavior(std::string_view name) { return contains_name(behaviors(), name); }
bool is_effect(std::string_view name) { return contains_name(effects(), name); }
bool is_termination(std::string_view name) {
  return contains_name(terminations(), name);
}
bool is_reserved(std::string_view identifier) {
  return contains_name(reserved_identifiers(), identifier);
}

bool is_identifier(std::string_view token) {
  if (token.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(token[0])) return false;
  return std::all_of(token.begin(), token.end(),
                     [&](char c) { return alpha(c) || is_digit(c); });
}

ParamMap flattened_params(const GameDescription& game, const SpriteDef& sprite) {
  std::vector<const SpriteDef*> chain{&sprite};
  // Parents precede children, so the walk terminates even on malformed input
  // as long as we cap it at the sprite count.
  const SpriteDef* current = &sprite;
  while (current->parent && chain.size() <= game.sprites.size()) {
    current = game.find_sprite(*current->parent);
    if (current == nullptr) break;
    chain.push_back(current);
  }
  ParamMap merged;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& [key, value] : (*it)->params) merged.set(key, value);
  return merged;
}

bool resolves(const GameDescription& game, std::string_view identifier) {
  return game.find_sprite(identifier) != nullptr || is_reserved(identifier);
}

}  // namespace mf::vgdl
