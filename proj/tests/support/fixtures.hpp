#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mf/catalog.hpp"
#include "mf/grader.hpp"
#include "mf/miner.hpp"
#include "mf/recommender.hpp"
#include "mf/vgdl.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path source_dir() { return MF_SOURCE_DIR; }
inline fs::path corpus_dir() { return source_dir() / "data" / "corpus"; }
inline fs::path rubric_dir() { return source_dir() / "data" / "rubrics"; }
inline fs::path rubric_path() { return rubric_dir() / "space_invaders.mfg"; }
inline fs::path malformed_dir() { return source_dir() / "data" / "fixtures" / "malformed"; }
inline fs::path reference_path() { return corpus_dir() / "space_invaders.vgd"; }

inline std::string reference_source() { return mf::read_text_file(reference_path()); }
inline mf::Rubric bundled_rubric() { return mf::load_rubric(rubric_path()); }

inline mf::Catalog bundled_catalog() { return mf::ingest_corpus(mf::load_corpus(corpus_dir())); }

inline std::shared_ptr<const mf::KnowledgeBase> bundled_knowledge() {
  mf::Catalog catalog = bundled_catalog();
  mf::RuleBases rules =
      mf::mine_rulebase(catalog, mf::MinerConfig::defaults_for(catalog.game_count()));
  return std::make_shared<const mf::KnowledgeBase>(std::move(catalog), std::move(rules));
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "mf-test-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Random description satisfying every model invariant: pre-order nesting,
// references to declared or reserved names, and params of all three scalar
// kinds with values that survive rendering.
class DescriptionGenerator {
 public:
  explicit DescriptionGenerator(std::uint64_t seed) : rng_(seed) {}

  mf::vgdl::GameDescription next() {
    using namespace mf::vgdl;
    GameDescription game;
    if (chance(0.7)) game.name = identifier("game");

    const std::size_t sprite_count = uniform(0, 9);
    std::vector<std::string> chain;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < sprite_count; ++i) {
      SpriteDef sprite;
      sprite.identifier = fresh(names, i);
      const auto& vocab = behaviors();
      sprite.behavior = vocab[uniform(0, vocab.size() - 1)];
      sprite.params = params(3, names);
      if (!chain.empty() && chance(0.5)) {
        chain.resize(uniform(1, chain.size()));
        sprite.parent = chain.back();
      } else {
        chain.clear();
      }
      chain.push_back(sprite.identifier);
      names.push_back(sprite.identifier);
      game.sprites.push_back(std::move(sprite));
    }

    std::vector<std::string> targets = names;
    for (const auto& reserved : reserved_identifiers())
      if (game.find_sprite(reserved) == nullptr) targets.push_back(reserved);

    for (std::size_t i = 0, n = uniform(0, 8); i < n; ++i) {
      const auto& vocab = effects();
      game.interactions.push_back({pick(targets), pick(targets),
                                   vocab[uniform(0, vocab.size() - 1)], params(2, names)});
    }
    for (std::size_t i = 0, n = uniform(0, 3); i < n; ++i) {
      const auto& vocab = terminations();
      TerminationDef termination;
      termination.kind = vocab[uniform(0, vocab.size() - 1)];
      if (chance(0.7)) termination.params.insert("stype", pick(targets));
      if (chance(0.3)) termination.params.insert("limit", static_cast<std::int64_t>(uniform(1, 2000)));
      termination.win = chance(0.5);
      game.terminations.push_back(std::move(termination));
    }
    if (!targets.empty()) {
      const std::string symbols = "abcdefgABCDEFG0123456789.+-*~%@!";
      for (std::size_t i = 0, n = uniform(0, 5); i < n; ++i) {
        char symbol = symbols[uniform(0, symbols.size() - 1)];
        std::vector<std::string> listed;
        for (std::size_t k = 0, m = uniform(1, 3); k < m; ++k) listed.push_back(pick(targets));
        game.level_mapping[symbol] = listed;
      }
    }
    return game;
  }

 private:
  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  const std::string& pick(const std::vector<std::string>& from) { return from[uniform(0, from.size() - 1)]; }

  std::string identifier(const std::string& stem) {
    static const std::string tail = "abcxyzQRS_019";
    std::string out = stem;
    for (std::size_t i = 0, n = uniform(0, 4); i < n; ++i) out += tail[uniform(0, tail.size() - 1)];
    return out;
  }

  std::string fresh(const std::vector<std::string>& taken, std::size_t index) {
    static const std::vector<std::string> stems = {"avatar", "wall", "alien", "sam", "log",
                                                   "truck", "goal", "portal", "bomb", "x"};
    std::string name = stems[uniform(0, stems.size() - 1)];
    if (std::find(taken.begin(), taken.end(), name) != taken.end()) name += std::to_string(index);
    return name;
  }

  mf::vgdl::ParamMap params(std::size_t max_count, const std::vector<std::string>& names) {
    static const std::vector<std::string> keys = {"img",   "speed", "cooldown", "prob",
                                                  "limit", "stype", "orientation", "scoreChange",
                                                  "color", "total"};
    mf::vgdl::ParamMap out;
    for (std::size_t i = 0, n = uniform(0, max_count); i < n; ++i) {
      const std::string& key = keys[uniform(0, keys.size() - 1)];
      mf::vgdl::Scalar value;
      switch (uniform(0, 3)) {
        case 0:
          value = std::uniform_int_distribution<std::int64_t>(-50, 5000)(rng_);
          break;
        case 1:
          value = std::uniform_real_distribution<double>(-100.0, 100.0)(rng_);
          break;
        case 2:
          value = names.empty() ? identifier("v") : pick(names);
          break;
        default:
          value = identifier(chance(0.5) ? "UP" : "img");
      }
      out.insert(key, value);
    }
    return out;
  }

  std::mt19937_64 rng_;
};

}  // namespace fixtures
