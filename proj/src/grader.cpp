#include "mf/grader.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "mf/catalog.hpp"
#include "mf/error.hpp"

namespace mf {

namespace {

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

[[noreturn]] void rubric_error(std::size_t line, const std::string& reason) {
  throw SchemaError("rubric line " + std::to_string(line) + ": " + reason);
}

vgdl::ParamMap rubric_params(std::size_t line, const std::vector<std::string_view>& tokens,
                             std::size_t first) {
  vgdl::ParamMap params;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tokens[i].size())
      rubric_error(line, "malformed parameter '" + std::string(tokens[i]) + "'");
    std::string key(tokens[i].substr(0, eq));
    if (!vgdl::is_identifier(key) ||
        !params.insert(key, vgdl::parse_scalar(tokens[i].substr(eq + 1))))
      rubric_error(line, "bad or duplicate parameter '" + key + "'");
  }
  return params;
}

void write_params(std::ostringstream& out, const vgdl::ParamMap& params) {
  for (const auto& [key, value] : params) out << ' ' << key << '=' << vgdl::render_scalar(value);
}

// Every required param is present with an equal value; extras are ignored.
bool satisfies(const vgdl::ParamMap& actual, const vgdl::ParamMap& required) {
  return std::all_of(required.begin(), required.end(), [&](const auto& entry) {
    const auto* value = actual.find(entry.first);
    return value != nullptr && *value == entry.second;
  });
}

// Maximum bipartite matching (Kuhn). `edges[r]` lists the submission items
// that rubric rule r accepts. Returns, per rule, the matched item or -1.
std::vector<int> maximum_matching(const std::vector<std::vector<int>>& edges,
                                  std::size_t item_count) {
  std::vector<int> owner(item_count, -1);
  std::vector<char> visited;
  std::function<bool(int)> augment = [&](int rule) {
    for (int item : edges[static_cast<std::size_t>(rule)]) {
      if (visited[static_cast<std::size_t>(item)]) continue;
      visited[static_cast<std::size_t>(item)] = 1;
      int& holder = owner[static_cast<std::size_t>(item)];
      if (holder < 0 || augment(holder)) {
        holder = rule;
        return true;
      }
    }
    return false;
  };
  for (std::size_t rule = 0; rule < edges.size(); ++rule) {
    visited.assign(item_count, 0);
    augment(static_cast<int>(rule));
  }
  std::vector<int> assigned(edges.size(), -1);
  for (std::size_t item = 0; item < item_count; ++item)
    if (owner[item] >= 0) assigned[static_cast<std::size_t>(owner[item])] = static_cast<int>(item);
  return assigned;
}

}  // namespace

Rubric parse_rubric(std::string_view text) {
  enum class Section { None, Sprites, Interactions };
  Rubric rubric;
  Section section = Section::None;
  bool saw_header = false;
  std::set<std::string> labels;
  std::vector<std::pair<std::size_t, std::string>> endpoint_refs;

  std::size_t line_number = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_number;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find('\t') != std::string_view::npos) rubric_error(line_number, "tabs are not allowed");
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t indent = line.find_first_not_of(' ');
    auto tokens = split_tokens(line);
    if (!saw_header) {
      if (indent != 0 || tokens[0] != "mf-rubric" || tokens.size() != 2)
        rubric_error(line_number, "expected 'mf-rubric " + std::string(kRubricVersion) + "'");
      if (tokens[1] != kRubricVersion)
        throw SchemaError("unsupported rubric schema version '" + std::string(tokens[1]) +
                          "' (expected " + std::string(kRubricVersion) + ")");
      saw_header = true;
      continue;
    }
    if (indent == 0) {
      if (tokens[0] == "name" && tokens.size() == 2 && vgdl::is_identifier(tokens[1])) {
        rubric.name = std::string(tokens[1]);
      } else if (tokens[0] == "SpriteRules" && tokens.size() == 1) {
        section = Section::Sprites;
      } else if (tokens[0] == "InteractionRules" && tokens.size() == 1) {
        section = Section::Interactions;
      } else {
        rubric_error(line_number, "unknown directive '" + std::string(tokens[0]) + "'");
      }
      continue;
    }
    if (indent != 4) rubric_error(line_number, "entries are indented by exactly 4 spaces");

    if (section == Section::Sprites) {
      if (tokens.size() < 3 || tokens[1] != ">" || !vgdl::is_identifier(tokens[0]))
        rubric_error(line_number, "expected '<label> > <Behavior> [key=value ...]'");
      if (!vgdl::is_behavior(tokens[2]))
        rubric_error(line_number, "unknown behavior '" + std::string(tokens[2]) + "'");
      std::string label(tokens[0]);
      if (!labels.insert(label).second)
        rubric_error(line_number, "duplicate label '" + label + "'");
      rubric.sprite_rules.push_back(
          {label, std::string(tokens[2]), rubric_params(line_number, tokens, 3)});
    } else if (section == Section::Interactions) {
      if (tokens.size() < 4 || tokens[2] != ">" || !vgdl::is_identifier(tokens[0]) ||
          !vgdl::is_identifier(tokens[1]))
        rubric_error(line_number, "expected '<label> <label> > <effect> [key=value ...]'");
      if (!vgdl::is_effect(tokens[3]))
        rubric_error(line_number, "unknown effect '" + std::string(tokens[3]) + "'");
      endpoint_refs.emplace_back(line_number, std::string(tokens[0]));
      endpoint_refs.emplace_back(line_number, std::string(tokens[1]));
      rubric.interaction_rules.push_back({std::string(tokens[0]), std::string(tokens[1]),
                                          std::string(tokens[3]),
                                          rubric_params(line_number, tokens, 4)});
    } else {
      rubric_error(line_number, "entry outside of SpriteRules/InteractionRules");
    }
  }

  if (!saw_header) throw SchemaError("empty rubric");
  if (rubric.name.empty()) throw SchemaError("rubric has no 'name' line");
  for (const auto& [line, label] : endpoint_refs)
    if (labels.count(label) == 0 && !vgdl::is_reserved(label))
      rubric_error(line, "unknown sprite label '" + label + "'");
  if (rubric.max_score() == 0) throw SchemaError("rubric has no rules");
  return rubric;
}

std::string render_rubric(const Rubric& rubric) {
  std::ostringstream out;
  out << "mf-rubric " << kRubricVersion << "\nname " << rubric.name << "\nSpriteRules\n";
  for (const auto& rule : rubric.sprite_rules) out << "    " << describe(rule) << '\n';
  out << "InteractionRules\n";
  for (const auto& rule : rubric.interaction_rules) out << "    " << describe(rule) << '\n';
  return out.str();
}

Rubric load_rubric(const std::filesystem::path& path) {
  return parse_rubric(read_text_file(path));
}

std::string describe(const SpriteRule& rule) {
  std::ostringstream out;
  out << rule.label << " > " << rule.behavior;
  write_params(out, rule.required);
  return out.str();
}

std::string describe(const InteractionRule& rule) {
  std::ostringstream out;
  out << rule.first << ' ' << rule.second << " > " << rule.effect;
  write_params(out, rule.required);
  return out.str();
}

ScoreReport grade(std::string_view submission, const Rubric& rubric) {
  ScoreReport report;
  report.max_score = rubric.max_score();
  for (const auto& rule : rubric.sprite_rules) report.per_rule.push_back({describe(rule), false, {}});
  for (const auto& rule : rubric.interaction_rules)
    report.per_rule.push_back({describe(rule), false, {}});

  vgdl::GameDescription game;
  try {
    game = vgdl::parse_description(submission);
    vgdl::validate(game);
  } catch (const ParseFailure& failure) {
    report.failure = failure.reason();
    report.failure_line = failure.line();
    return report;
  }
  report.runnable = true;

  std::vector<vgdl::ParamMap> flat;
  for (const auto& sprite : game.sprites) flat.push_back(vgdl::flattened_params(game, sprite));

  auto sprite_matches = [&](const SpriteRule& rule, std::size_t index) {
    return game.sprites[index].behavior == rule.behavior && satisfies(flat[index], rule.required);
  };
  auto endpoint_matches = [&](const std::string& label, const std::string& name) {
    auto rule = std::find_if(rubric.sprite_rules.begin(), rubric.sprite_rules.end(),
                             [&](const auto& r) { return r.label == label; });
    if (rule == rubric.sprite_rules.end()) return name == label;  // reserved literal
    for (std::size_t i = 0; i < game.sprites.size(); ++i)
      if (game.sprites[i].identifier == name) return sprite_matches(*rule, i);
    return false;
  };

  std::vector<std::vector<int>> sprite_edges(rubric.sprite_rules.size());
  for (std::size_t r = 0; r < rubric.sprite_rules.size(); ++r)
    for (std::size_t s = 0; s < game.sprites.size(); ++s)
      if (sprite_matches(rubric.sprite_rules[r], s)) sprite_edges[r].push_back(static_cast<int>(s));

  std::vector<std::vector<int>> interaction_edges(rubric.interaction_rules.size());
  for (std::size_t r = 0; r < rubric.interaction_rules.size(); ++r) {
    const auto& rule = rubric.interaction_rules[r];
    for (std::size_t i = 0; i < game.interactions.size(); ++i) {
      const auto& candidate = game.interactions[i];
      if (candidate.effect == rule.effect && satisfies(candidate.params, rule.required) &&
          endpoint_matches(rule.first, candidate.first) &&
          endpoint_matches(rule.second, candidate.second))
        interaction_edges[r].push_back(static_cast<int>(i));
    }
  }

  const auto sprite_match = maximum_matching(sprite_edges, game.sprites.size());
  const auto interaction_match = maximum_matching(interaction_edges, game.interactions.size());

  std::size_t row = 0;
  for (int item : sprite_match) {
    if (item >= 0) {
      report.per_rule[row].matched = true;
      report.per_rule[row].matched_by = game.sprites[static_cast<std::size_t>(item)].identifier;
      ++report.total;
    }
    ++row;
  }
  for (int item : interaction_match) {
    if (item >= 0) {
      const auto& hit = game.interactions[static_cast<std::size_t>(item)];
      report.per_rule[row].matched = true;
      report.per_rule[row].matched_by = hit.first + " " + hit.second + " > " + hit.effect +
                                        " #" + std::to_string(item);
      ++report.total;
    }
    ++row;
  }
  return report;
}

BatchSummary summarize(const std::vector<BatchRow>& rows, std::size_t max_score) {
  BatchSummary summary;
  summary.submissions = rows.size();
  summary.histogram.assign(max_score + 1, 0);
  std::uint64_t sum = 0;
  for (const auto& row : rows) {
    const auto total = std::min(row.report.total, max_score);
    ++summary.histogram[total];
    sum += total;
    if (total == max_score) ++summary.max_score_count;
    if (total == 0) ++summary.zero_count;
    if (!row.report.runnable) ++summary.unrunnable_count;
  }
  summary.mean = rows.empty() ? Fraction{0, 1} : Fraction(sum, rows.size()).reduced();
  return summary;
}

BatchResult grade_batch(const std::filesystem::path& directory, const Rubric& rubric) {
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  std::filesystem::directory_iterator it(directory, ec);
  if (ec) throw IoError("cannot list '" + directory.string() + "': " + ec.message());
  for (const auto& entry : it)
    if (entry.path().extension() == ".vgd") files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  BatchResult result;
  for (const auto& file : files) {
    BatchRow row{file.filename().string(), {}};
    try {
      row.report = grade(read_text_file(file), rubric);
    } catch (const IoError& e) {
      row.report = ScoreReport{};
      row.report.max_score = rubric.max_score();
      row.report.failure = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  result.summary = summarize(result.rows, rubric.max_score());
  return result;
}

std::string score_table_csv(const std::vector<BatchRow>& rows) {
  std::ostringstream out;
  out << "filename,runnable,total,max\n";
  for (const auto& row : rows) {
    std::string name = row.filename;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
      name = quoted + "\"";
    }
    out << name << ',' << (row.report.runnable ? "true" : "false") << ',' << row.report.total
        << ',' << row.report.max_score << '\n';
  }
  return out.str();
}

std::string summary_text(const BatchSummary& summary, std::size_t max_score) {
  std::ostringstream out;
  out << "submissions: " << summary.submissions << '\n';
  out << "mean: " << summary.mean.to_string();
  if (summary.submissions > 0) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", summary.mean.value());
    out << " (" << buffer << ")";
  }
  out << '\n';
  out << "max score (" << max_score << "): " << summary.max_score_count << '\n';
  out << "zero: " << summary.zero_count << '\n';
  out << "could not run: " << summary.unrunnable_count << '\n';
  out << "histogram:";
  for (std::size_t score = 0; score < summary.histogram.size(); ++score)
    out << ' ' << score << '=' << summary.histogram[score];
  out << '\n';
  return out.str();
}

}  // namespace mf
