#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "mf/error.hpp"
#include "mf/vgdl.hpp"
#include "support/fixtures.hpp"

using namespace mf;
using namespace mf::vgdl;

namespace {

ParseFailure parse_failure(std::string_view text) {
  try {
    parse_description(text);
  } catch (const ParseFailure& e) {
    return e;
  }
  ADD_FAILURE() << "expected a ParseFailure for:\n" << text;
  return ParseFailure(0, "none");
}

}  // namespace

TEST(ParseDescription, FourEmptySections) {
  auto game = parse_description("SpriteSet\nInteractionSet\nTerminationSet\nLevelMapping\n");
  EXPECT_TRUE(game.sprites.empty());
  EXPECT_TRUE(game.interactions.empty());
  EXPECT_TRUE(game.terminations.empty());
  EXPECT_TRUE(game.level_mapping.empty());
  EXPECT_EQ(game, GameDescription{});
}

TEST(ParseDescription, FlakAvatarSprite) {
  auto game = parse_description("SpriteSet\n    avatar > FlakAvatar stype=sam\n");
  ASSERT_EQ(game.sprites.size(), 1u);
  SpriteDef expected{"avatar", "FlakAvatar", {{"stype", std::string("sam")}}, std::nullopt};
  EXPECT_EQ(game.sprites[0], expected);
}

TEST(ParseDescription, UndeclaredSpriteNamesGhostAndLine) {
  auto failure = parse_failure(
      "SpriteSet\n    avatar > MovingAvatar\nInteractionSet\n    ghost avatar > killSprite\n");
  EXPECT_EQ(failure.line(), 4u);
  EXPECT_NE(failure.reason().find("ghost"), std::string::npos);
}

TEST(ParseDescription, SectionOrderIsIrrelevant) {
  auto a = parse_description(
      "SpriteSet\n    wall2 > Immovable\nInteractionSet\n    avatar wall2 > stepBack\n");
  auto b = parse_description(
      "InteractionSet\n    avatar wall2 > stepBack\nSpriteSet\n    wall2 > Immovable\n");
  EXPECT_EQ(a, b);
}

TEST(ParseDescription, NestingSetsParents) {
  auto game = parse_description(
      "SpriteSet\n"
      "    missile > Missile speed=1\n"
      "        sam > Missile orientation=UP\n"
      "            fastSam > Missile speed=2\n"
      "        bomb > Missile orientation=DOWN\n"
      "    base > Immovable\n");
  ASSERT_EQ(game.sprites.size(), 5u);
  EXPECT_FALSE(game.sprites[0].parent);
  EXPECT_EQ(game.sprites[1].parent, "missile");
  EXPECT_EQ(game.sprites[2].parent, "sam");
  EXPECT_EQ(game.sprites[3].parent, "missile");
  EXPECT_FALSE(game.sprites[4].parent);

  auto flat = flattened_params(game, game.sprites[2]);
  EXPECT_EQ(flat, (ParamMap{{"speed", std::int64_t{2}}, {"orientation", std::string("UP")}}));
}

TEST(ParseDescription, ScalarsAreTyped) {
  auto game = parse_description("SpriteSet\n    a > Bomber n=5 d=0.50 e=1e3 s=UP neg=-3 t=True\n");
  const auto& p = game.sprites[0].params;
  EXPECT_EQ(*p.find("n"), Scalar(std::int64_t{5}));
  EXPECT_EQ(*p.find("d"), Scalar(0.5));
  EXPECT_EQ(*p.find("e"), Scalar(1000.0));
  EXPECT_EQ(*p.find("s"), Scalar(std::string("UP")));
  EXPECT_EQ(*p.find("neg"), Scalar(std::int64_t{-3}));
  EXPECT_EQ(*p.find("t"), Scalar(std::string("True")));
}

TEST(ParseDescription, CommentsCrlfAndGameLine) {
  auto game = parse_description(
      "# header comment\r\nGame demo\r\nSpriteSet   # sprites\r\n    avatar > MovingAvatar # me\r\n");
  EXPECT_EQ(game.name, "demo");
  ASSERT_EQ(game.sprites.size(), 1u);
  EXPECT_TRUE(game.sprites[0].params.empty());
}

TEST(ParseDescription, ReservedIdentifiersNeedNoDeclaration) {
  auto game = parse_description(
      "SpriteSet\n    sam > Missile\nInteractionSet\n    sam EOS > killSprite\n"
      "    avatar wall > stepBack\nLevelMapping\n    w > wall\n");
  EXPECT_EQ(game.interactions.size(), 2u);
  EXPECT_EQ(game.level_mapping.at('w'), std::vector<std::string>{"wall"});
}

TEST(ParseDescription, TerminationWinFlag) {
  auto game = parse_description(
      "SpriteSet\n    goal > Door\nTerminationSet\n    SpriteCounter stype=goal limit=0 win=True\n"
      "    Timeout limit=100 win=False\n");
  ASSERT_EQ(game.terminations.size(), 2u);
  EXPECT_TRUE(game.terminations[0].win);
  EXPECT_EQ(game.terminations[0].params,
            (ParamMap{{"stype", std::string("goal")}, {"limit", std::int64_t{0}}}));
  EXPECT_FALSE(game.terminations[1].win);
}

struct MalformedCase {
  const char* file;
  std::size_t line;
  const char* reason;
};

class MalformedFixture : public testing::TestWithParam<MalformedCase> {};

TEST_P(MalformedFixture, RejectedWithLine) {
  const auto& c = GetParam();
  auto failure = parse_failure(read_text_file(fixtures::malformed_dir() / c.file));
  EXPECT_EQ(failure.line(), c.line) << failure.what();
  EXPECT_NE(failure.reason().find(c.reason), std::string::npos) << failure.what();
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, MalformedFixture,
    testing::Values(MalformedCase{"unknown_section.vgd", 3, "unknown section"},
                    MalformedCase{"unknown_behavior.vgd", 3, "unknown behavior 'Phantom'"},
                    MalformedCase{"unknown_effect.vgd", 4, "unknown effect 'explode'"},
                    MalformedCase{"duplicate_identifier.vgd", 4, "duplicate identifier 'alien'"},
                    MalformedCase{"malformed_param.vgd", 2, "malformed parameter"},
                    MalformedCase{"bare_param.vgd", 2, "malformed parameter 'speed'"},
                    MalformedCase{"duplicate_param.vgd", 2, "duplicate parameter 'img'"},
                    MalformedCase{"bad_indentation.vgd", 3, "bad indentation"},
                    MalformedCase{"over_nested.vgd", 3, "bad indentation"},
                    MalformedCase{"tab_indentation.vgd", 2, "tab"},
                    MalformedCase{"undeclared_sprite.vgd", 5, "undeclared sprite 'ghost'"},
                    MalformedCase{"missing_win.vgd", 4, "win"},
                    MalformedCase{"unknown_termination.vgd", 4, "unknown termination"},
                    MalformedCase{"entry_outside_section.vgd", 1, "outside of any section"},
                    MalformedCase{"duplicate_section.vgd", 3, "duplicate section"},
                    MalformedCase{"duplicate_mapping.vgd", 5, "duplicate mapping"},
                    MalformedCase{"invalid_utf8.vgd", 2, "UTF-8"},
                    MalformedCase{"short_interaction.vgd", 4, "expected"},
                    MalformedCase{"declared_eos.vgd", 2, "EOS"},
                    MalformedCase{"undeclared_termination_target.vgd", 4,
                                  "undeclared sprite 'ghost'"}),
    [](const auto& info) {
      std::string name = info.param.file;
      return name.substr(0, name.find('.'));
    });

TEST(MalformedFixtures, EveryFileIsRejectedWithAPositiveLine) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(fixtures::malformed_dir())) {
    if (entry.path().extension() != ".vgd") continue;
    ++seen;
    auto failure = parse_failure(read_text_file(entry.path()));
    EXPECT_GE(failure.line(), 1u) << entry.path();
  }
  EXPECT_GE(seen, 20u);
}

TEST(RenderDescription, EmptyIsCanonicalFourSections) {
  EXPECT_EQ(render_description(GameDescription{}),
            "SpriteSet\nInteractionSet\nTerminationSet\nLevelMapping\n");
}

TEST(RenderDescription, ReferenceRoundTrip) {
  auto game = parse_description(fixtures::reference_source());
  EXPECT_EQ(game.name, "space_invaders");
  EXPECT_EQ(parse_description(render_description(game)), game);
}

TEST(RenderDescription, NestedHierarchyRoundTrip) {
  GameDescription game;
  game.sprites = {{"missile", "Missile", {{"speed", 0.5}}, std::nullopt},
                  {"sam", "Missile", {{"orientation", std::string("UP")}}, "missile"},
                  {"bomb", "Missile", {{"orientation", std::string("DOWN")}}, "missile"},
                  {"megaBomb", "Missile", {{"speed", std::int64_t{3}}}, "bomb"},
                  {"base", "Immovable", {}, std::nullopt}};
  game.interactions = {{"bomb", "base", "killBoth", {}}};
  ASSERT_NO_THROW(validate(game));
  auto text = render_description(game);
  EXPECT_NE(text.find("\n            megaBomb > Missile speed=3\n"), std::string::npos) << text;
  EXPECT_EQ(parse_description(text), game);
}

TEST(RenderDescription, CorpusRoundTrip) {
  for (const auto& game : load_corpus(fixtures::corpus_dir())) {
    auto reparsed = parse_description(render_description(game));
    EXPECT_EQ(reparsed, game) << game.name;
  }
}

TEST(RenderDescription, DecimalsKeepTheirKind) {
  GameDescription game;
  game.sprites = {{"a", "Immovable", {{"x", 2.0}, {"y", 1e21}, {"z", -0.25}}, std::nullopt}};
  auto reparsed = parse_description(render_description(game));
  EXPECT_EQ(reparsed, game);
  EXPECT_TRUE(std::holds_alternative<double>(*reparsed.sprites[0].params.find("x")));
}

TEST(RenderDescription, RandomRoundTrip) {
  fixtures::DescriptionGenerator generator(20240611);
  for (int i = 0; i < 1000; ++i) {
    auto game = generator.next();
    ASSERT_NO_THROW(validate(game)) << render_description(game);
    EXPECT_EQ(parse_description(render_description(game)), game) << render_description(game);
  }
}

TEST(Validate, RejectsModelInvariantViolations) {
  GameDescription unknown_behavior;
  unknown_behavior.sprites = {{"a", "Teleporter", {}, std::nullopt}};
  EXPECT_THROW(validate(unknown_behavior), ParseFailure);

  GameDescription dangling;
  dangling.interactions = {{"ghost", "EOS", "killSprite", {}}};
  EXPECT_THROW(validate(dangling), ParseFailure);

  GameDescription empty_endpoint;
  empty_endpoint.interactions = {{"", "EOS", "killSprite", {}}};
  EXPECT_THROW(validate(empty_endpoint), ParseFailure);

  GameDescription bad_order;
  bad_order.sprites = {{"child", "Missile", {}, "parent"}, {"parent", "Missile", {}, std::nullopt}};
  EXPECT_THROW(validate(bad_order), ParseFailure);

  GameDescription unrenderable;
  unrenderable.sprites = {{"a", "Immovable", {{"img", std::string("two words")}}, std::nullopt}};
  EXPECT_THROW(validate(unrenderable), ParseFailure);

  GameDescription numeric_string;
  numeric_string.sprites = {{"a", "Immovable", {{"img", std::string("42")}}, std::nullopt}};
  EXPECT_THROW(validate(numeric_string), ParseFailure);
}

TEST(Vocabulary, CoversTheStudyGames) {
  EXPECT_GE(behaviors().size(), 10u);
  EXPECT_GE(effects().size(), 8u);
  EXPECT_EQ(terminations().size(), 3u);
  for (auto name : {"FlakAvatar", "Bomber", "Missile", "Immovable", "SpawnPoint", "RandomNPC"})
    EXPECT_TRUE(is_behavior(name)) << name;
  for (auto name : {"killSprite", "stepBack", "transformTo", "killBoth"})
    EXPECT_TRUE(is_effect(name)) << name;
}

TEST(Fuzz, ArbitraryBytesNeverCrash) {
  std::mt19937_64 rng(7);
  const std::string seed_text = fixtures::reference_source();
  const std::string alphabet = "SpriteSet InteractionSet > = # \n\r\t    avatar EOS wall 0.5 -1e9 Missile";
  std::uniform_int_distribution<int> byte(0, 255);
  auto start = std::chrono::steady_clock::now();
  std::size_t accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string input;
    switch (i % 3) {
      case 0:
        for (int k = 0, n = byte(rng); k < n; ++k) input.push_back(static_cast<char>(byte(rng)));
        break;
      case 1:
        for (int k = 0, n = byte(rng); k < n; ++k)
          input.push_back(alphabet[static_cast<std::size_t>(byte(rng)) % alphabet.size()]);
        break;
      default:
        input = seed_text;
        for (int k = 0, n = 1 + byte(rng) % 8; k < n; ++k)
          input[static_cast<std::size_t>(rng() % input.size())] = static_cast<char>(byte(rng));
    }
    try {
      auto game = parse_description(input);
      ++accepted;
      EXPECT_EQ(parse_description(render_description(game)), game);
    } catch (const ParseFailure& e) {
      EXPECT_GE(e.line(), 1u);
    }
  }
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::seconds(10));
  EXPECT_GT(accepted, 0u);
}
