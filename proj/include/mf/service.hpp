#pragma once

// HTTP API under /api/v1. Sessions live in memory and expire after an idle
// period; catalog, rule bases and rubrics are shared read-only.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "mf/grader.hpp"
#include "mf/recommender.hpp"

namespace httplib {
class Server;
}

namespace mf {

inline constexpr std::string_view kMediaType = "application/vnd.mf.v1+json";
inline constexpr std::string_view kApiPrefix = "/api/v1";

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct ServiceOptions {
  std::chrono::minutes idle_timeout{60};
  Clock clock;  // defaults to the system clock
  std::size_t default_limit = 10;
};

// Every `.mfg` file in a directory, keyed by rubric name. A missing directory
// yields no rubrics.
std::map<std::string, Rubric> load_rubrics(const std::filesystem::path& directory);

class Service {
 public:
  Service(std::shared_ptr<const KnowledgeBase> knowledge, std::map<std::string, Rubric> rubrics,
          ServiceOptions options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Registers every route (and JSON error bodies for unmatched paths).
  void mount(httplib::Server& server);

  // Drops sessions idle for longer than the timeout; returns how many.
  std::size_t expire_idle();
  std::size_t session_count() const;

 private:
  struct Slot;
  std::shared_ptr<Slot> find_session(const std::string& id);
  std::chrono::system_clock::time_point now() const;

  std::shared_ptr<const KnowledgeBase> knowledge_;
  std::map<std::string, Rubric> rubrics_;
  ServiceOptions options_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_session_ = 1;
};

}  // namespace mf
