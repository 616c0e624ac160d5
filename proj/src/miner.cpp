#include "mf/miner.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <set>

#include "mf/error.hpp"

namespace mf {

void MinerConfig::validate() const {
  const Fraction zero{0, 1};
  const Fraction one{1, 1};
  if (!(min_support > zero && min_support <= one))
    throw InvalidConfig("min_support must be in (0, 1], got " + min_support.to_string());
  if (!(min_confidence > zero && min_confidence <= one))
    throw InvalidConfig("min_confidence must be in (0, 1], got " +
                        min_confidence.to_string());
  if (max_itemset_size < 2)
    throw InvalidConfig("max_itemset_size must be at least 2, got " +
                        std::to_string(max_itemset_size));
}

MinerConfig MinerConfig::defaults_for(std::size_t corpus_size) {
  MinerConfig config;
  config.min_support = corpus_size <= 2 ? Fraction{1, 1} : Fraction{2, corpus_size};
  config.min_confidence = Fraction{1, 10};
  config.max_itemset_size = 4;
  return config;
}

namespace {

// One bit per transaction.
class TidSet {
 public:
  explicit TidSet(std::size_t size) : words_((size + 63) / 64, 0) {}

  void set(std::size_t index) { words_[index / 64] |= std::uint64_t{1} << (index % 64); }

  std::uint64_t count() const {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }

  TidSet intersect(const TidSet& other) const {
    TidSet out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
    return out;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Candidate {
  std::vector<ItemCode> items;
  TidSet tids;
};

// Smallest count that reaches the support threshold: ceil(total * n / d).
std::uint64_t minimum_count(const Fraction& min_support, std::uint64_t total) {
  const auto n = static_cast<unsigned __int128>(min_support.numerator()) * total;
  const auto d = static_cast<unsigned __int128>(min_support.denominator());
  return static_cast<std::uint64_t>((n + d - 1) / d);
}

bool shares_prefix(const std::vector<ItemCode>& a, const std::vector<ItemCode>& b) {
  return std::equal(a.begin(), a.end() - 1, b.begin());
}

}  // namespace

std::vector<Itemset> mine_frequent_itemsets(std::span<const Transaction> transactions,
                                            const MinerConfig& config) {
  config.validate();
  if (transactions.empty()) throw EmptyTransactionList();

  const std::uint64_t total = transactions.size();
  const std::uint64_t threshold = std::max<std::uint64_t>(1, minimum_count(config.min_support, total));

  std::map<ItemCode, TidSet> singletons;
  for (std::size_t tid = 0; tid < transactions.size(); ++tid)
    for (ItemCode item : transactions[tid])
      singletons.try_emplace(item, transactions.size()).first->second.set(tid);

  std::vector<Itemset> result;
  std::vector<Candidate> level;
  for (auto& [item, tids] : singletons) {
    const auto count = tids.count();
    if (count < threshold) continue;
    result.push_back({{item}, count, total});
    level.push_back({{item}, std::move(tids)});
  }

  for (std::size_t size = 2; size <= config.max_itemset_size && level.size() > 1; ++size) {
    std::set<std::vector<ItemCode>> previous;
    for (const auto& c : level) previous.insert(c.items);

    std::vector<Candidate> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        // `level` is lexicographically sorted, so once prefixes diverge no
        // later j can join with i.
        if (!shares_prefix(level[i].items, level[j].items)) break;
        std::vector<ItemCode> items = level[i].items;
        items.push_back(level[j].items.back());

        // Prune: every (size-1)-subset must itself be frequent.
        bool all_frequent = true;
        std::vector<ItemCode> subset(items.size() - 1);
        for (std::size_t drop = 0; drop + 2 < items.size() && all_frequent; ++drop) {
          std::copy(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(drop),
                    subset.begin());
          std::copy(items.begin() + static_cast<std::ptrdiff_t>(drop) + 1, items.end(),
                    subset.begin() + static_cast<std::ptrdiff_t>(drop));
          all_frequent = previous.count(subset) != 0;
        }
        if (!all_frequent) continue;

        TidSet tids = level[i].tids.intersect(level[j].tids);
        const auto count = tids.count();
        if (count < threshold) continue;
        result.push_back({items, count, total});
        next.push_back({std::move(items), std::move(tids)});
      }
    }
    level = std::move(next);
  }
  return result;
}

std::vector<AssociationRule> derive_rules(std::span<const Itemset> frequent,
                                          const MinerConfig& config) {
  config.validate();
  std::map<std::vector<ItemCode>, std::uint64_t> counts;
  for (const auto& itemset : frequent) counts.emplace(itemset.items, itemset.count);

  std::vector<AssociationRule> rules;
  for (const auto& itemset : frequent) {
    const std::size_t n = itemset.items.size();
    if (n < 2) continue;
    if (n >= 63) throw InvalidArgument("itemset too large for rule generation");
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      AssociationRule rule;
      for (std::size_t k = 0; k < n; ++k)
        ((mask >> k) & 1 ? rule.antecedent : rule.consequent).push_back(itemset.items[k]);
      auto it = counts.find(rule.antecedent);
      if (it == counts.end())
        throw InvalidArgument("frequent itemsets are not downward closed");
      rule.union_count = itemset.count;
      rule.antecedent_count = it->second;
      rule.total = itemset.total;
      if (rule.confidence() < config.min_confidence) continue;
      rules.push_back(std::move(rule));
    }
  }
  std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) {
    if (a.antecedent.size() != b.antecedent.size())
      return a.antecedent.size() < b.antecedent.size();
    if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
    return a.consequent < b.consequent;
  });
  return rules;
}

RuleBases mine_rulebase(const Catalog& catalog, const MinerConfig& config) {
  config.validate();
  if (catalog.empty()) throw EmptyTransactionList();
  const std::string fingerprint = catalog.fingerprint();
  auto mine = [&](ItemKind kind) {
    const auto rows = catalog.transaction_list(kind);
    const auto frequent = mine_frequent_itemsets(rows, config);
    return RuleBase{kind, derive_rules(frequent, config), config, fingerprint,
                    rows.size()};
  };
  return {mine(ItemKind::Element), mine(ItemKind::Interaction)};
}

void require_fingerprint(const RuleBases& rules, const Catalog& catalog) {
  const std::string fingerprint = catalog.fingerprint();
  for (const RuleBase* base : {&rules.elements, &rules.interactions}) {
    if (base->corpus_fingerprint != fingerprint)
      throw RebuildRequired("rule base was mined from catalog " +
                            base->corpus_fingerprint.substr(0, 12) +
                            "..., current catalog is " + fingerprint.substr(0, 12) +
                            "...; re-run `mf mine`");
  }
}

}  // namespace mf
