// mf: offline ingestion and mining, command-line recommendation and grading,
// and the HTTP service.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "mf/catalog.hpp"
#include "mf/error.hpp"
#include "mf/grader.hpp"
#include "mf/miner.hpp"
#include "mf/recommender.hpp"
#include "mf/service.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path data_root() {
  if (const char* root = std::getenv("MF_DATA_DIR"); root != nullptr && *root != '\0') return root;
  return "data";
}

struct Paths {
  std::string corpus;
  std::string catalog;
  std::string rules;
  std::string rubric;
  std::string rubrics;
};

Paths default_paths() {
  fs::path root = data_root();
  return {(root / "corpus").string(), (root / "catalog.mfc").string(),
          (root / "rules.mfr").string(), (root / "rubrics" / "space_invaders.mfg").string(),
          (root / "rubrics").string()};
}

mf::Fraction parse_threshold(const std::string& text, const char* flag) {
  mf::Fraction value;
  try {
    value = mf::Fraction::parse(text);
  } catch (const mf::Error&) {
    throw UsageError(std::string(flag) + " expects a fraction such as 0.2 or 1/5, got '" + text + "'");
  }
  if (value.numerator() == 0 || value > mf::Fraction(1, 1))
    throw UsageError(std::string(flag) + " must be in (0, 1], got " + text);
  return value;
}

std::string percent(const mf::Fraction& f) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << f.value() * 100.0 << '%';
  return out.str();
}

std::shared_ptr<const mf::KnowledgeBase> load_knowledge(const Paths& paths) {
  mf::Catalog catalog = mf::load_catalog(paths.catalog);
  mf::RuleBases rules = mf::load_rulebases(paths.rules, catalog);
  return std::make_shared<const mf::KnowledgeBase>(std::move(catalog), std::move(rules));
}

void print_recommendations(std::ostream& out, const std::vector<mf::Recommendation>& list) {
  out << "rank\tid\tconfidence\tsupport\tbasis\titem\n";
  std::size_t rank = 1;
  for (const auto& rec : list) {
    out << rank++ << '\t' << rec.id() << '\t' << rec.confidence.to_string() << " ("
        << percent(rec.confidence) << ")\t" << rec.support.to_string() << '\t'
        << mf::to_string(rec.basis) << '\t' << rec.label << '\n';
  }
}

void print_report(std::ostream& out, const mf::ScoreReport& report) {
  if (!report.runnable) {
    out << "not runnable: " << report.failure << '\n';
  } else {
    for (const auto& outcome : report.per_rule) {
      out << (outcome.matched ? "[x] " : "[ ] ") << outcome.rule;
      if (outcome.matched_by) out << "  <- " << *outcome.matched_by;
      out << '\n';
    }
  }
  out << "total " << report.total << '/' << report.max_score << '\n';
}

httplib::Server* running_server = nullptr;

void stop_server(int) {
  if (running_server != nullptr) running_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mf: game-element recommendations mined from a VGDL corpus"};
  app.require_subcommand(1);
  Paths paths = default_paths();

  auto* ingest = app.add_subcommand("ingest", "Build catalog.mfc from a directory of .vgd files");
  ingest->add_option("--corpus", paths.corpus, "Corpus directory")->capture_default_str();
  ingest->add_option("--catalog", paths.catalog, "Catalog file to write")->capture_default_str();

  std::string min_support;
  std::string min_confidence;
  std::optional<std::size_t> max_itemset_size;
  auto* mine = app.add_subcommand("mine", "Mine rules.mfr from a catalog");
  mine->add_option("--catalog", paths.catalog, "Catalog file")->capture_default_str();
  mine->add_option("--rules", paths.rules, "Rule file to write")->capture_default_str();
  mine->add_option("--min-support", min_support, "Minimum support (default 2/N)");
  mine->add_option("--min-confidence", min_confidence, "Minimum confidence (default 1/10)");
  mine->add_option("--max-itemset-size", max_itemset_size, "Largest itemset mined (default 4)");

  std::string design_path;
  std::size_t limit = 10;
  std::string kind = "both";
  auto* recommend = app.add_subcommand("recommend", "Rank recommendations for a design file");
  recommend->add_option("design", design_path, "Design (.vgd)")->required();
  recommend->add_option("--catalog", paths.catalog, "Catalog file")->capture_default_str();
  recommend->add_option("--rules", paths.rules, "Rule file")->capture_default_str();
  recommend->add_option("--limit", limit, "Entries per list")->capture_default_str();
  recommend->add_option("--kind", kind, "element, interaction or both")
      ->check(CLI::IsMember({"element", "interaction", "both"}))
      ->capture_default_str();

  std::string target;
  std::string csv_path;
  auto* grade_cmd = app.add_subcommand("grade", "Grade a submission file or a directory of them");
  grade_cmd->add_option("target", target, "Submission (.vgd) or directory")->required();
  grade_cmd->add_option("--rubric", paths.rubric, "Rubric file")->capture_default_str();
  grade_cmd->add_option("--csv", csv_path, "Write the score table here instead of stdout");

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--catalog", paths.catalog, "Catalog file")->capture_default_str();
  serve->add_option("--rules", paths.rules, "Rule file")->capture_default_str();
  serve->add_option("--corpus", paths.corpus, "Corpus the catalog must match")->capture_default_str();
  serve->add_option("--rubrics", paths.rubrics, "Rubric directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      mf::Catalog catalog = mf::ingest_corpus(mf::load_corpus(paths.corpus));
      mf::save_catalog(catalog, paths.catalog);
      std::cout << "ingested " << catalog.game_count() << " games: " << catalog.elements().size()
                << " element items, " << catalog.interactions().size() << " interaction items\n"
                << "fingerprint " << catalog.fingerprint() << '\n'
                << "wrote " << paths.catalog << '\n';
    } else if (*mine) {
      std::optional<mf::Fraction> support, confidence;
      if (!min_support.empty()) support = parse_threshold(min_support, "--min-support");
      if (!min_confidence.empty()) confidence = parse_threshold(min_confidence, "--min-confidence");
      if (max_itemset_size && *max_itemset_size < 2)
        throw UsageError("--max-itemset-size must be at least 2");

      mf::Catalog catalog = mf::load_catalog(paths.catalog);
      mf::MinerConfig config = mf::MinerConfig::defaults_for(catalog.game_count());
      if (support) config.min_support = *support;
      if (confidence) config.min_confidence = *confidence;
      if (max_itemset_size) config.max_itemset_size = *max_itemset_size;
      mf::RuleBases rules = mf::mine_rulebase(catalog, config);
      mf::save_rulebases(rules, paths.rules);
      std::cout << "mined " << rules.elements.rules.size() << " element rules and "
                << rules.interactions.rules.size() << " interaction rules (min_support "
                << config.min_support.to_string() << ", min_confidence "
                << config.min_confidence.to_string() << ", max_itemset_size "
                << config.max_itemset_size << ")\nwrote " << paths.rules << '\n';
    } else if (*recommend) {
      if (limit == 0) throw UsageError("--limit must be positive");
      auto knowledge = load_knowledge(paths);
      mf::DesignSession session("cli", knowledge,
                                mf::vgdl::parse_description(mf::read_text_file(design_path)));
      if (kind != "interaction") {
        std::cout << "# elements\n";
        print_recommendations(std::cout, session.recommend_elements(limit));
      }
      if (kind != "element") {
        if (kind == "both") std::cout << '\n';
        std::cout << "# interactions\n";
        print_recommendations(std::cout, session.recommend_interactions(limit));
      }
    } else if (*grade_cmd) {
      mf::Rubric rubric = mf::load_rubric(paths.rubric);
      if (fs::is_directory(target)) {
        mf::BatchResult batch = mf::grade_batch(target, rubric);
        std::string csv = mf::score_table_csv(batch.rows);
        if (csv_path.empty()) {
          std::cout << csv << '\n';
        } else {
          mf::write_text_file(csv_path, csv);
        }
        std::cout << mf::summary_text(batch.summary, rubric.max_score());
      } else {
        std::string source;
        mf::ScoreReport report;
        try {
          source = mf::read_text_file(target);
          report = mf::grade(source, rubric);
        } catch (const mf::IoError& e) {
          report.max_score = rubric.max_score();
          report.failure = e.what();
        }
        print_report(std::cout, report);
      }
    } else if (*serve) {
      auto knowledge = load_knowledge(paths);
      if (fs::is_directory(paths.corpus)) {
        mf::Catalog fresh = mf::ingest_corpus(mf::load_corpus(paths.corpus));
        if (fresh.fingerprint() != knowledge->fingerprint())
          throw mf::RebuildRequired("catalog " + paths.catalog + " does not match corpus " +
                                    paths.corpus + "; run 'mf ingest' and 'mf mine'");
      }
      mf::Service service(knowledge, mf::load_rubrics(paths.rubrics));
      httplib::Server server;
      service.mount(server);
      running_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      if (!server.bind_to_port(host, port))
        throw mf::IoError("cannot bind " + host + ":" + std::to_string(port));
      std::cout << "serving " << knowledge->catalog().game_count() << " games on http://" << host
                << ':' << port << mf::kApiPrefix << std::endl;
      server.listen_after_bind();
      running_server = nullptr;
    }
  } catch (const UsageError& e) {
    std::cerr << "mf: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mf::Error& e) {
    std::cerr << "mf: " << e.code() << ": " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "mf: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}
