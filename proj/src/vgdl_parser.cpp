#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mf/error.hpp"
#include "mf/vgdl.hpp"

namespace mf::vgdl {

namespace {

enum class Section { None, Sprites, Interactions, Terminations, Mapping };

constexpr int kIndentWidth = 4;

std::optional<Section> section_from_header(std::string_view token) {
  if (token == "SpriteSet") return Section::Sprites;
  if (token == "InteractionSet") return Section::Interactions;
  if (token == "TerminationSet") return Section::Terminations;
  if (token == "LevelMapping") return Section::Mapping;
  return std::nullopt;
}

// Length of the UTF-8 sequence starting at s[i], or 0 when it is malformed.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char lead = byte(i);
  std::size_t length = 0;
  std::uint32_t code = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) {
    length = 2;
    code = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    code = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    code = lead & 0x07;
  } else {
    return 0;
  }
  if (i + length > s.size()) return 0;
  for (std::size_t k = 1; k < length; ++k) {
    if ((byte(i + k) & 0xC0) != 0x80) return 0;
    code = (code << 6) | (byte(i + k) & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range code points.
  static constexpr std::uint32_t kMinimum[] = {0, 0, 0x80, 0x800, 0x10000};
  if (code < kMinimum[length] || code > 0x10FFFF ||
      (code >= 0xD800 && code <= 0xDFFF))
    return 0;
  return length;
}

// Empty when the text is well formed; otherwise the reason.
std::string check_characters(std::string_view text) {
  for (std::size_t i = 0; i < text.size();) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == '\t') return "tab characters are not allowed";
    if (c < 0x20 || c == 0x7F) return "control character in source";
    std::size_t length = utf8_sequence_length(text, i);
    if (length == 0) return "invalid UTF-8 sequence";
    i += length;
  }
  return {};
}

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

bool is_mapping_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return u > 0x20 && u < 0x7F && c != '#' && c != '>' && c != '=';
}

// Reasons a string value could not survive a render/parse round trip.
std::string string_value_problem(const std::string& value) {
  if (value.empty()) return "empty value";
  if (value.find_first_of(" =#") != std::string::npos)
    return "value contains a space, '=' or '#'";
  if (auto problem = check_characters(value); !problem.empty()) return problem;
  if (!std::holds_alternative<std::string>(parse_scalar(value)))
    return "string value reads as a number";
  return {};
}

std::string param_problem(const ParamMap& params) {
  std::set<std::string> keys;
  for (const auto& [key, value] : params) {
    if (!is_identifier(key)) return "malformed parameter key '" + key + "'";
    if (!keys.insert(key).second) return "duplicate parameter '" + key + "'";
    if (const auto* s = std::get_if<std::string>(&value)) {
      if (auto problem = string_value_problem(*s); !problem.empty())
        return "parameter '" + key + "': " + problem;
    } else if (const auto* d = std::get_if<double>(&value)) {
      if (!std::isfinite(*d)) return "parameter '" + key + "' is not finite";
    }
  }
  return {};
}

bool is_sprite_reference_key(std::string_view key) {
  if (key.substr(0, 5) != "stype") return false;
  for (char c : key.substr(5))
    if (c < '0' || c > '9') return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  GameDescription run() {
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      parse_line(line_number, line);
      if (end == text_.size()) break;
      pos = end + 1;
    }
    check_references();
    return std::move(game_);
  }

 private:
  [[noreturn]] static void fail(std::size_t line, std::string reason) {
    throw ParseFailure(line, std::move(reason));
  }

  void parse_line(std::size_t line_number, std::string_view line) {
    if (auto problem = check_characters(line); !problem.empty())
      fail(line_number, problem);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    while (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    if (line.empty()) return;

    std::size_t spaces = line.find_first_not_of(' ');
    if (spaces % kIndentWidth != 0)
      fail(line_number, "bad indentation: " + std::to_string(spaces) +
                            " leading spaces is not a multiple of 4");
    const auto depth = static_cast<int>(spaces / kIndentWidth);
    auto tokens = split_tokens(line);

    if (depth == 0) {
      parse_top_level(line_number, tokens);
      return;
    }
    switch (section_) {
      case Section::None:
        fail(line_number, "entry outside of any section");
      case Section::Sprites:
        parse_sprite(line_number, depth, tokens);
        return;
      case Section::Interactions:
        require_depth_one(line_number, depth);
        parse_interaction(line_number, tokens);
        return;
      case Section::Terminations:
        require_depth_one(line_number, depth);
        parse_termination(line_number, tokens);
        return;
      case Section::Mapping:
        require_depth_one(line_number, depth);
        parse_mapping(line_number, tokens);
        return;
    }
  }

  void parse_top_level(std::size_t line_number,
                       const std::vector<std::string_view>& tokens) {
    if (tokens[0] == "Game") {
      if (tokens.size() != 2 || !is_identifier(tokens[1]))
        fail(line_number, "expected 'Game <identifier>'");
      if (saw_name_) fail(line_number, "duplicate 'Game' line");
      saw_name_ = true;
      game_.name = std::string(tokens[1]);
      section_ = Section::None;
      return;
    }
    auto section = section_from_header(tokens[0]);
    if (!section) fail(line_number, "unknown section '" + std::string(tokens[0]) + "'");
    if (tokens.size() != 1)
      fail(line_number, "unexpected text after section header");
    if (!seen_sections_.insert(*section).second)
      fail(line_number, "duplicate section '" + std::string(tokens[0]) + "'");
    section_ = *section;
  }

  static void require_depth_one(std::size_t line_number, int depth) {
    if (depth != 1)
      fail(line_number, "bad indentation: nesting is only allowed in SpriteSet");
  }

  static ParamMap parse_params(std::size_t line_number,
                               const std::vector<std::string_view>& tokens,
                               std::size_t first) {
    ParamMap params;
    for (std::size_t i = first; i < tokens.size(); ++i) {
      std::string_view token = tokens[i];
      std::size_t eq = token.find('=');
      if (eq == std::string_view::npos)
        fail(line_number, "malformed parameter '" + std::string(token) + "'");
      std::string_view key = token.substr(0, eq);
      std::string_view value = token.substr(eq + 1);
      if (!is_identifier(key) || value.empty() ||
          value.find('=') != std::string_view::npos)
        fail(line_number, "malformed parameter '" + std::string(token) + "'");
      if (!params.insert(std::string(key), parse_scalar(value)))
        fail(line_number, "duplicate parameter '" + std::string(key) + "'");
    }
    return params;
  }

  void parse_sprite(std::size_t line_number, int depth,
                    const std::vector<std::string_view>& tokens) {
    if (tokens.size() < 3 || tokens[1] != ">")
      fail(line_number, "expected '<name> > <Behavior> [key=value ...]'");
    if (!is_identifier(tokens[0]))
      fail(line_number, "malformed identifier '" + std::string(tokens[0]) + "'");
    if (tokens[0] == "EOS") fail(line_number, "'EOS' cannot be declared as a sprite");
    if (!is_behavior(tokens[2]))
      fail(line_number, "unknown behavior '" + std::string(tokens[2]) + "'");
    if (static_cast<std::size_t>(depth) > ancestors_.size() + 1)
      fail(line_number, "bad indentation: sprite nested deeper than its parent allows");

    ancestors_.resize(static_cast<std::size_t>(depth - 1));
    SpriteDef sprite;
    sprite.identifier = std::string(tokens[0]);
    sprite.behavior = std::string(tokens[2]);
    sprite.params = parse_params(line_number, tokens, 3);
    if (!ancestors_.empty()) sprite.parent = ancestors_.back();
    if (!sprite_names_.insert(sprite.identifier).second)
      fail(line_number, "duplicate identifier '" + sprite.identifier + "'");
    ancestors_.push_back(sprite.identifier);
    game_.sprites.push_back(std::move(sprite));
  }

  void parse_interaction(std::size_t line_number,
                         const std::vector<std::string_view>& tokens) {
    if (tokens.size() < 4 || tokens[2] != ">")
      fail(line_number, "expected '<name> <name> > <effect> [key=value ...]'");
    for (std::size_t i = 0; i < 2; ++i)
      if (!is_identifier(tokens[i]))
        fail(line_number, "malformed identifier '" + std::string(tokens[i]) + "'");
    if (!is_effect(tokens[3]))
      fail(line_number, "unknown effect '" + std::string(tokens[3]) + "'");
    InteractionDef interaction{std::string(tokens[0]), std::string(tokens[1]),
                               std::string(tokens[3]),
                               parse_params(line_number, tokens, 4)};
    references_.push_back({line_number, interaction.first});
    references_.push_back({line_number, interaction.second});
    game_.interactions.push_back(std::move(interaction));
  }

  void parse_termination(std::size_t line_number,
                         const std::vector<std::string_view>& tokens) {
    if (!is_termination(tokens[0]))
      fail(line_number, "unknown termination '" + std::string(tokens[0]) + "'");
    ParamMap raw = parse_params(line_number, tokens, 1);
    TerminationDef termination;
    termination.kind = std::string(tokens[0]);
    bool has_win = false;
    for (const auto& [key, value] : raw) {
      if (key == "win") {
        const auto* text = std::get_if<std::string>(&value);
        if (text == nullptr || (*text != "True" && *text != "False"))
          fail(line_number, "win must be True or False");
        termination.win = (*text == "True");
        has_win = true;
        continue;
      }
      if (is_sprite_reference_key(key)) {
        const auto* text = std::get_if<std::string>(&value);
        references_.push_back(
            {line_number, text != nullptr ? *text : render_scalar(value)});
      }
      termination.params.insert(key, value);
    }
    if (!has_win) fail(line_number, "termination is missing win=True|False");
    game_.terminations.push_back(std::move(termination));
  }

  void parse_mapping(std::size_t line_number,
                     const std::vector<std::string_view>& tokens) {
    if (tokens.size() < 3 || tokens[1] != ">" || tokens[0].size() != 1 ||
        !is_mapping_char(tokens[0][0]))
      fail(line_number, "expected '<char> > <name> [<name> ...]'");
    char key = tokens[0][0];
    if (game_.level_mapping.count(key) != 0)
      fail(line_number, std::string("duplicate mapping character '") + key + "'");
    std::vector<std::string> names;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      if (!is_identifier(tokens[i]))
        fail(line_number, "malformed identifier '" + std::string(tokens[i]) + "'");
      names.emplace_back(tokens[i]);
      references_.push_back({line_number, names.back()});
    }
    game_.level_mapping.emplace(key, std::move(names));
  }

  void check_references() const {
    const Reference* first_bad = nullptr;
    for (const auto& reference : references_) {
      if (resolves(game_, reference.identifier)) continue;
      if (first_bad == nullptr || reference.line < first_bad->line)
        first_bad = &reference;
    }
    if (first_bad != nullptr)
      fail(first_bad->line, "undeclared sprite '" + first_bad->identifier + "'");
  }

  struct Reference {
    std::size_t line;
    std::string identifier;
  };

  std::string_view text_;
  GameDescription game_;
  Section section_ = Section::None;
  std::set<Section> seen_sections_;
  bool saw_name_ = false;
  std::vector<std::string> ancestors_;
  std::set<std::string> sprite_names_;
  std::vector<Reference> references_;
};

void write_params(std::ostringstream& out, const ParamMap& params) {
  for (const auto& [key, value] : params) out << ' ' << key << '=' << render_scalar(value);
}

}  // namespace

GameDescription parse_description(std::string_view text) {
  return Parser(text).run();
}

std::string render_description(const GameDescription& game) {
  std::ostringstream out;
  const std::string indent(kIndentWidth, ' ');
  if (!game.name.empty()) out << "Game " << game.name << '\n';

  out << "SpriteSet\n";
  std::unordered_map<std::string, std::size_t> depth;
  for (const auto& sprite : game.sprites) {
    std::size_t d = 1;
    if (sprite.parent) d = depth[*sprite.parent] + 1;
    depth[sprite.identifier] = d;
    for (std::size_t i = 0; i < d; ++i) out << indent;
    out << sprite.identifier << " > " << sprite.behavior;
    write_params(out, sprite.params);
    out << '\n';
  }

  out << "InteractionSet\n";
  for (const auto& interaction : game.interactions) {
    out << indent << interaction.first << ' ' << interaction.second << " > "
        << interaction.effect;
    write_params(out, interaction.params);
    out << '\n';
  }

  out << "TerminationSet\n";
  for (const auto& termination : game.terminations) {
    out << indent << termination.kind;
    write_params(out, termination.params);
    out << " win=" << (termination.win ? "True" : "False") << '\n';
  }

  out << "LevelMapping\n";
  for (const auto& [key, names] : game.level_mapping) {
    out << indent << key << " >";
    for (const auto& name : names) out << ' ' << name;
    out << '\n';
  }
  return out.str();
}

void validate(const GameDescription& game) {
  auto fail = [](const std::string& reason) { throw ParseFailure(0, reason); };
  auto check_params = [&](const ParamMap& params, const std::string& where) {
    if (auto problem = param_problem(params); !problem.empty())
      fail(where + ": " + problem);
  };
  auto check_reference = [&](const std::string& identifier, const std::string& where) {
    if (!is_identifier(identifier))
      fail(where + ": malformed identifier '" + identifier + "'");
    if (!resolves(game, identifier))
      fail(where + ": undeclared sprite '" + identifier + "'");
  };

  if (!game.name.empty() && !is_identifier(game.name))
    fail("malformed game name '" + game.name + "'");

  std::set<std::string> seen;
  std::vector<std::string> ancestors;
  for (const auto& sprite : game.sprites) {
    const std::string where = "sprite '" + sprite.identifier + "'";
    if (!is_identifier(sprite.identifier) || sprite.identifier == "EOS")
      fail("malformed sprite identifier '" + sprite.identifier + "'");
    if (!seen.insert(sprite.identifier).second)
      fail("duplicate identifier '" + sprite.identifier + "'");
    if (!is_behavior(sprite.behavior))
      fail(where + ": unknown behavior '" + sprite.behavior + "'");
    check_params(sprite.params, where);
    // Pre-order: the parent must be on the current ancestor chain.
    if (sprite.parent) {
      auto it = std::find(ancestors.begin(), ancestors.end(), *sprite.parent);
      if (it == ancestors.end())
        fail(where + ": parent '" + *sprite.parent +
             "' is not an enclosing sprite declared before it");
      ancestors.erase(it + 1, ancestors.end());
    } else {
      ancestors.clear();
    }
    ancestors.push_back(sprite.identifier);
  }

  for (std::size_t i = 0; i < game.interactions.size(); ++i) {
    const auto& interaction = game.interactions[i];
    const std::string where = "interaction " + std::to_string(i);
    check_reference(interaction.first, where);
    check_reference(interaction.second, where);
    if (!is_effect(interaction.effect))
      fail(where + ": unknown effect '" + interaction.effect + "'");
    check_params(interaction.params, where);
  }

  for (std::size_t i = 0; i < game.terminations.size(); ++i) {
    const auto& termination = game.terminations[i];
    const std::string where = "termination " + std::to_string(i);
    if (!is_termination(termination.kind))
      fail(where + ": unknown termination '" + termination.kind + "'");
    check_params(termination.params, where);
    if (termination.params.contains("win"))
      fail(where + ": 'win' belongs in the win flag, not in params");
    for (const auto& [key, value] : termination.params) {
      if (!is_sprite_reference_key(key)) continue;
      const auto* text = std::get_if<std::string>(&value);
      check_reference(text != nullptr ? *text : render_scalar(value), where);
    }
  }

  for (const auto& [key, names] : game.level_mapping) {
    const std::string where = std::string("mapping '") + key + "'";
    if (!is_mapping_char(key)) fail("invalid mapping character");
    if (names.empty()) fail(where + ": no sprites listed");
    for (const auto& name : names) check_reference(name, where);
  }
}

}  // namespace mf::vgdl
