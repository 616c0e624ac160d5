#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "mf/error.hpp"
#include "mf/miner.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace mf;

namespace {

std::set<oracle::Counted> as_counted(const std::vector<Itemset>& itemsets) {
  std::set<oracle::Counted> out;
  for (const auto& s : itemsets) out.insert({s.items, s.count});
  return out;
}

std::set<oracle::Rule> as_rules(const std::vector<AssociationRule>& rules) {
  std::set<oracle::Rule> out;
  for (const auto& r : rules) out.insert({r.antecedent, r.consequent, r.union_count, r.antecedent_count});
  return out;
}

MinerConfig config(Fraction support, Fraction confidence = {1, 10}, std::size_t max_size = 4) {
  return {support, confidence, max_size};
}

// Every non-empty proper subset of every returned itemset is also returned.
void expect_downward_closed(const std::vector<Itemset>& itemsets) {
  std::set<std::vector<ItemCode>> present;
  for (const auto& s : itemsets) present.insert(s.items);
  for (const auto& s : itemsets) {
    const std::size_t n = s.items.size();
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<ItemCode> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) subset.push_back(s.items[i]);
      EXPECT_TRUE(present.count(subset)) << "missing subset of an itemset of size " << n;
    }
  }
}

std::vector<Transaction> bread_butter_milk() {
  constexpr ItemCode bread = 0, butter = 1, milk = 2, eggs = 3;
  std::vector<Transaction> tx;
  for (int i = 0; i < 9; ++i) tx.push_back({bread, butter, milk});
  tx.push_back({bread, butter, eggs});
  return tx;
}

}  // namespace

TEST(MineFrequentItemsets, UniformTransactions) {
  std::vector<Transaction> tx(4, Transaction{1, 2});
  auto itemsets = mine_frequent_itemsets(tx, config({1, 2}));
  ASSERT_EQ(itemsets.size(), 3u);
  EXPECT_EQ(itemsets[0].items, (Transaction{1}));
  EXPECT_EQ(itemsets[1].items, (Transaction{2}));
  EXPECT_EQ(itemsets[2].items, (Transaction{1, 2}));
  for (const auto& s : itemsets) EXPECT_EQ(s.support(), Fraction(1, 1));
}

TEST(MineFrequentItemsets, NoPairReachesSixTenths) {
  std::vector<Transaction> tx = {{1, 2, 3}, {1, 2}, {1, 3}, {2, 3}, {3}};
  auto itemsets = mine_frequent_itemsets(tx, config({3, 5}));
  ASSERT_EQ(itemsets.size(), 3u);
  EXPECT_EQ(itemsets[0].support(), Fraction(3, 5));
  EXPECT_EQ(itemsets[1].support(), Fraction(3, 5));
  EXPECT_EQ(itemsets[2].items, (Transaction{3}));
  EXPECT_EQ(itemsets[2].support(), Fraction(4, 5));
}

TEST(MineFrequentItemsets, OrderedBySizeThenItems) {
  std::vector<Transaction> tx = {{5, 1, 3}, {3, 1, 5, 5}, {1, 5}};
  auto itemsets = mine_frequent_itemsets(tx, config({1, 3}));
  for (std::size_t i = 1; i < itemsets.size(); ++i) {
    const auto& a = itemsets[i - 1].items;
    const auto& b = itemsets[i].items;
    EXPECT_TRUE(a.size() < b.size() || (a.size() == b.size() && a < b));
  }
  expect_downward_closed(itemsets);
}

TEST(MineFrequentItemsets, MaxItemsetSizeCaps) {
  std::vector<Transaction> tx(3, Transaction{1, 2, 3, 4, 5});
  auto itemsets = mine_frequent_itemsets(tx, config({1, 1}, {1, 10}, 2));
  EXPECT_EQ(itemsets.size(), 5u + 10u);
}

TEST(MineFrequentItemsets, Errors) {
  EXPECT_THROW(mine_frequent_itemsets({}, config({1, 2})), EmptyTransactionList);
  std::vector<Transaction> tx = {{1}};
  EXPECT_THROW(mine_frequent_itemsets(tx, config({0, 1})), InvalidConfig);
  EXPECT_THROW(mine_frequent_itemsets(tx, config({3, 2})), InvalidConfig);
  EXPECT_THROW(mine_frequent_itemsets(tx, config({1, 2}, {0, 1})), InvalidConfig);
  EXPECT_THROW(mine_frequent_itemsets(tx, config({1, 2}, {1, 10}, 1)), InvalidConfig);
}

TEST(MineFrequentItemsets, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(99);
  for (int run = 0; run < 250; ++run) {
    auto data = oracle::random_dataset(rng, 12, 64);
    std::uint64_t den = 1 + rng() % 20, num = 1 + rng() % den;
    std::size_t max_size = 2 + rng() % 4;
    oracle::Exhaustive reference(data);
    std::vector<Transaction> tx(data.begin(), data.end());
    auto mined = mine_frequent_itemsets(tx, config({num, den}, {1, 10}, max_size));
    ASSERT_EQ(as_counted(mined), reference.frequent(num, den, max_size)) << "run " << run;
    for (const auto& s : mined) EXPECT_EQ(s.total, data.size());
    expect_downward_closed(mined);
  }
}

TEST(DeriveRules, BreadButterMilk) {
  auto tx = bread_butter_milk();
  auto cfg = config({1, 10}, {1, 10});
  auto rules = derive_rules(mine_frequent_itemsets(tx, cfg), cfg);
  auto it = std::find_if(rules.begin(), rules.end(), [](const auto& r) {
    return r.antecedent == Transaction{0, 1} && r.consequent == Transaction{2};
  });
  ASSERT_NE(it, rules.end());
  EXPECT_EQ(it->confidence(), Fraction(9, 10));
  EXPECT_EQ(it->union_count, 9u);
  EXPECT_EQ(it->antecedent_count, 10u);
}

TEST(DeriveRules, SingletonGivesNoRules) {
  std::vector<Itemset> frequent = {{{1}, 3, 4}};
  EXPECT_TRUE(derive_rules(frequent, config({1, 2})).empty());
}

TEST(DeriveRules, ConfidenceFromSupports) {
  std::vector<Transaction> tx = {{1, 2}, {1}, {}, {}};
  auto cfg = config({1, 4});
  auto rules = derive_rules(mine_frequent_itemsets(tx, cfg), cfg);
  auto it = std::find_if(rules.begin(), rules.end(),
                         [](const auto& r) { return r.antecedent == Transaction{1}; });
  ASSERT_NE(it, rules.end());
  EXPECT_EQ(it->support(), Fraction(1, 4));
  EXPECT_EQ(it->confidence(), Fraction(1, 2));
}

TEST(DeriveRules, RejectsNonClosedInput) {
  std::vector<Itemset> broken = {{{1}, 2, 2}, {{1, 2}, 2, 2}};
  EXPECT_THROW(derive_rules(broken, config({1, 2})), InvalidArgument);
}

TEST(DeriveRules, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(1234);
  for (int run = 0; run < 250; ++run) {
    auto data = oracle::random_dataset(rng, 12, 64);
    std::uint64_t sden = 1 + rng() % 20, snum = 1 + rng() % sden;
    std::uint64_t cden = 1 + rng() % 20, cnum = 1 + rng() % cden;
    std::size_t max_size = 2 + rng() % 4;
    auto cfg = config({snum, sden}, {cnum, cden}, max_size);
    std::vector<Transaction> tx(data.begin(), data.end());
    auto rules = derive_rules(mine_frequent_itemsets(tx, cfg), cfg);
    oracle::Exhaustive reference(data);
    ASSERT_EQ(as_rules(rules), reference.rules(snum, sden, cnum, cden, max_size)) << "run " << run;
    for (const auto& r : rules) {
      EXPECT_GT(r.confidence(), Fraction(0, 1));
      EXPECT_LE(r.confidence(), Fraction(1, 1));
      EXPECT_LE(r.support(), r.confidence());
      EXPECT_GE(r.support(), cfg.min_support);
    }
  }
}

TEST(Thresholds, RaisingThresholdsNeverAdds) {
  std::mt19937_64 rng(5);
  for (int run = 0; run < 60; ++run) {
    auto data = oracle::random_dataset(rng, 10, 40);
    std::vector<Transaction> tx(data.begin(), data.end());
    std::set<oracle::Counted> previous_sets;
    std::set<oracle::Rule> previous_rules;
    for (std::uint64_t step = 1; step <= 10; ++step) {
      auto cfg = config({step, 10}, {step, 10});
      auto sets = mine_frequent_itemsets(tx, cfg);
      auto rules = as_rules(derive_rules(sets, cfg));
      auto counted = as_counted(sets);
      if (step > 1) {
        EXPECT_TRUE(std::includes(previous_sets.begin(), previous_sets.end(), counted.begin(),
                                  counted.end()));
        EXPECT_TRUE(std::includes(previous_rules.begin(), previous_rules.end(), rules.begin(),
                                  rules.end()));
      }
      previous_sets = std::move(counted);
      previous_rules = std::move(rules);
    }
  }
}

TEST(MinerConfig, Defaults) {
  auto cfg = MinerConfig::defaults_for(10);
  EXPECT_EQ(cfg.min_support, Fraction(1, 5));
  EXPECT_EQ(cfg.min_confidence, Fraction(1, 10));
  EXPECT_EQ(cfg.max_itemset_size, 4u);
  EXPECT_EQ(MinerConfig::defaults_for(1).min_support, Fraction(1, 1));
  EXPECT_EQ(MinerConfig::defaults_for(2).min_support, Fraction(1, 1));
}

TEST(MineRulebase, SingleGameHasFullConfidenceRules) {
  auto catalog = ingest_corpus({vgdl::parse_description(
      "Game g\nSpriteSet\n    a > Immovable\n    b > RandomNPC\nInteractionSet\n"
      "    b a > stepBack\n    b EOS > turnAround\n")});
  auto rules = mine_rulebase(catalog, MinerConfig::defaults_for(1));
  ASSERT_FALSE(rules.elements.rules.empty());
  ASSERT_FALSE(rules.interactions.rules.empty());
  for (const auto& r : rules.elements.rules) EXPECT_EQ(r.confidence(), Fraction(1, 1));
  for (const auto& r : rules.interactions.rules) EXPECT_EQ(r.confidence(), Fraction(1, 1));
  EXPECT_EQ(rules.elements.corpus_fingerprint, catalog.fingerprint());
}

TEST(MineRulebase, BundledCorpusMatchesOracle) {
  Catalog catalog = fixtures::bundled_catalog();
  MinerConfig cfg = config({1, 5}, {1, 2}, 4);
  auto rules = mine_rulebase(catalog, cfg);
  for (auto kind : {ItemKind::Element, ItemKind::Interaction}) {
    auto tx = catalog.transaction_list(kind);
    oracle::SubsetEnumeration reference(std::vector<oracle::Items>(tx.begin(), tx.end()), 4);
    auto expected = reference.rules(1, 5, 1, 2);
    EXPECT_EQ(rules.of(kind).rules.size(), expected.size()) << to_string(kind);
    EXPECT_EQ(as_rules(rules.of(kind).rules), expected) << to_string(kind);
    EXPECT_EQ(rules.of(kind).transaction_count, 10u);
  }
}

TEST(MineRulebase, EmptyCatalog) {
  EXPECT_THROW(mine_rulebase(Catalog{}, config({1, 2})), EmptyTransactionList);
}

TEST(RulebasePersistence, RoundTripAndFingerprint) {
  fixtures::TempDir dir;
  Catalog catalog = fixtures::bundled_catalog();
  auto rules = mine_rulebase(catalog, MinerConfig::defaults_for(catalog.game_count()));
  save_rulebases(rules, dir / "rules.mfr");
  EXPECT_EQ(load_rulebases(dir / "rules.mfr"), rules);
  EXPECT_EQ(load_rulebases(dir / "rules.mfr", catalog), rules);

  Catalog other = ingest_corpus({vgdl::parse_description("Game x\nSpriteSet\n    a > Door\n")});
  EXPECT_THROW(load_rulebases(dir / "rules.mfr", other), RebuildRequired);
  EXPECT_THROW(require_fingerprint(rules, other), RebuildRequired);
}

TEST(RulebasePersistence, UnknownVersionAndCorruption) {
  Catalog catalog = fixtures::bundled_catalog();
  std::string text = rulebases_to_text(mine_rulebase(catalog, config({1, 2})));
  auto at = text.find("\"v1\"");
  ASSERT_NE(at, std::string::npos);
  std::string bumped = text;
  bumped.replace(at, 4, "\"v2\"");
  EXPECT_THROW(rulebases_from_text(bumped), SchemaError);
  EXPECT_THROW(rulebases_from_text("[]"), SchemaError);
}
