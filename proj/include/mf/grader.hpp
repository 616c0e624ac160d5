#pragma once

// Rubric-based accuracy grading. Every rubric rule is worth one point, awarded
// only when some submission rule matches it exactly; a submission that does
// not parse scores zero. Terminations are never graded.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mf/fraction.hpp"
#include "mf/vgdl.hpp"

namespace mf {

// A sprite the submission must declare: behavior plus required params
// (compared against the sprite's flattened params). `label` is how
// interaction rules refer to it.
struct SpriteRule {
  std::string label;
  std::string behavior;
  vgdl::ParamMap required;

  friend bool operator==(const SpriteRule&, const SpriteRule&) = default;
};

// `first`/`second` name sprite-rule labels, or a reserved identifier (EOS,
// wall, avatar) that the submission must reference literally.
struct InteractionRule {
  std::string first;
  std::string second;
  std::string effect;
  vgdl::ParamMap required;

  friend bool operator==(const InteractionRule&, const InteractionRule&) = default;
};

struct Rubric {
  std::string name;
  std::vector<SpriteRule> sprite_rules;
  std::vector<InteractionRule> interaction_rules;

  std::size_t max_score() const { return sprite_rules.size() + interaction_rules.size(); }

  friend bool operator==(const Rubric&, const Rubric&) = default;
};

// rubric.mfg text format (see docs/file-formats.md). Throws SchemaError.
inline constexpr std::string_view kRubricVersion = "v1";
Rubric parse_rubric(std::string_view text);
std::string render_rubric(const Rubric& rubric);
Rubric load_rubric(const std::filesystem::path& path);

std::string describe(const SpriteRule& rule);
std::string describe(const InteractionRule& rule);

struct RuleOutcome {
  std::string rule;
  bool matched = false;
  std::optional<std::string> matched_by;  // sprite identifier or "a b > effect #i"
};

struct ScoreReport {
  bool runnable = false;
  std::size_t total = 0;
  std::size_t max_score = 0;
  std::vector<RuleOutcome> per_rule;  // sprite rules first, then interaction rules
  std::string failure;                // why the submission could not run
  std::size_t failure_line = 0;
};

// Never throws for a valid rubric: parse failures are reported as
// runnable = false with total = 0.
ScoreReport grade(std::string_view submission, const Rubric& rubric);

struct BatchRow {
  std::string filename;
  ScoreReport report;
};

struct BatchSummary {
  std::size_t submissions = 0;
  std::vector<std::size_t> histogram;  // index = score, size = max_score + 1
  Fraction mean;                       // 0/1 for an empty batch
  std::size_t max_score_count = 0;
  std::size_t zero_count = 0;
  std::size_t unrunnable_count = 0;
};

struct BatchResult {
  std::vector<BatchRow> rows;  // ordered by filename
  BatchSummary summary;
};

// Grades every `.vgd` file in a directory. A file that cannot be read is
// recorded as not runnable and the batch continues. Throws IoError when the
// directory itself cannot be listed.
BatchResult grade_batch(const std::filesystem::path& directory, const Rubric& rubric);
BatchSummary summarize(const std::vector<BatchRow>& rows, std::size_t max_score);

// CSV with header "filename,runnable,total,max".
std::string score_table_csv(const std::vector<BatchRow>& rows);
std::string summary_text(const BatchSummary& summary, std::size_t max_score);

}  // namespace mf
