#include "mf/service.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <limits>

#include "httplib.h"
#include "json.hpp"
#include "mf/error.hpp"

namespace mf {

using Json = nlohmann::ordered_json;

namespace {

int status_for(const std::string& code) {
  if (code == "NotFound") return 404;
  if (code == "StaleRecommendation") return 409;
  if (code == "ParseFailure" || code == "MissingElements") return 422;
  if (code == "InvalidArgument" || code == "SchemaError" || code == "BadRequest") return 400;
  if (code == "RebuildRequired" || code == "StaleRuleBase") return 503;
  return 500;
}

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), std::string(kMediaType));
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message,
                std::size_t line = 0) {
  Json body{{"code", code}, {"message", message}};
  if (line > 0) body["line"] = line;
  send(res, status_for(code), body);
}

// Runs a handler and turns every failure into a structured error body.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ParseFailure& e) {
      send_error(res, e.code(), e.what(), e.line());
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, "BadRequest", std::string("malformed JSON body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, "InternalError", e.what());
    }
  };
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json body = Json::parse(req.body);
  if (!body.is_object()) throw InvalidArgument("request body must be a JSON object");
  return body;
}

std::string string_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string())
    throw InvalidArgument(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InvalidArgument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::uint64_t parse_unsigned(std::string_view text, const char* what) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw InvalidArgument(std::string("'") + what + "' must be a non-negative integer");
  return value;
}

// Mutations carry the revision they were computed against, in the body or
// (for DELETE) as a query parameter.
std::uint64_t request_revision(const httplib::Request& req, const Json& body) {
  if (auto it = body.find("revision"); it != body.end()) {
    if (!it->is_number_unsigned()) throw InvalidArgument("'revision' must be a non-negative integer");
    return it->get<std::uint64_t>();
  }
  if (req.has_param("revision")) return parse_unsigned(req.get_param_value("revision"), "revision");
  throw InvalidArgument("missing 'revision'");
}

Json scalar_json(const vgdl::Scalar& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  if (const auto* d = std::get_if<double>(&value)) return *d;
  return std::get<std::string>(value);
}

vgdl::Scalar json_scalar(const std::string& key, const Json& value) {
  if (value.is_number_unsigned()) {
    auto u = value.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      return std::to_string(u);
    return static_cast<std::int64_t>(u);
  }
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) return value.get<double>();
  if (value.is_boolean()) return std::string(value.get<bool>() ? "True" : "False");
  if (value.is_string()) return vgdl::parse_scalar(value.get<std::string>());
  throw InvalidArgument("param '" + key + "' must be a number, string or boolean");
}

Json params_json(const vgdl::ParamMap& params) {
  Json out = Json::object();
  for (const auto& [key, value] : params) out[key] = scalar_json(value);
  return out;
}

vgdl::ParamMap json_params(const Json& body) {
  vgdl::ParamMap params;
  auto it = body.find("params");
  if (it == body.end() || it->is_null()) return params;
  if (!it->is_object()) throw InvalidArgument("'params' must be an object");
  for (const auto& [key, value] : it->items()) params.insert(key, json_scalar(key, value));
  return params;
}

Json design_json(const vgdl::GameDescription& game) {
  Json sprites = Json::array();
  for (const auto& sprite : game.sprites) {
    sprites.push_back({{"identifier", sprite.identifier},
                       {"behavior", sprite.behavior},
                       {"params", params_json(sprite.params)},
                       {"parent", sprite.parent ? Json(*sprite.parent) : Json(nullptr)}});
  }
  Json interactions = Json::array();
  for (std::size_t i = 0; i < game.interactions.size(); ++i) {
    const auto& interaction = game.interactions[i];
    interactions.push_back({{"index", i},
                            {"first", interaction.first},
                            {"second", interaction.second},
                            {"effect", interaction.effect},
                            {"params", params_json(interaction.params)}});
  }
  Json terminations = Json::array();
  for (const auto& termination : game.terminations) {
    terminations.push_back({{"kind", termination.kind},
                            {"params", params_json(termination.params)},
                            {"win", termination.win}});
  }
  Json mapping = Json::object();
  for (const auto& [symbol, names] : game.level_mapping) mapping[std::string(1, symbol)] = names;
  return {{"name", game.name},
          {"sprites", sprites},
          {"interactions", interactions},
          {"terminations", terminations},
          {"level_mapping", mapping}};
}

Json fraction_json(const Fraction& fraction) {
  Fraction r = fraction.reduced();
  return {{"numerator", r.numerator()}, {"denominator", r.denominator()}, {"value", r.value()}};
}

Json recommendation_json(const Recommendation& rec) {
  Json source = nullptr;
  if (rec.source_rule)
    source = {{"antecedent", rec.source_rule->antecedent}, {"consequent", rec.source_rule->consequent}};
  return {{"id", rec.id()},
          {"kind", to_string(rec.kind)},
          {"code", rec.code},
          {"label", rec.label},
          {"confidence", fraction_json(rec.confidence)},
          {"support", fraction_json(rec.support)},
          {"basis", to_string(rec.basis)},
          {"source_rule", source},
          {"provenance", rec.provenance},
          {"revision", rec.revision}};
}

Json report_json(const ScoreReport& report, const std::string& rubric) {
  Json rules = Json::array();
  for (const auto& outcome : report.per_rule) {
    rules.push_back({{"rule", outcome.rule},
                     {"matched", outcome.matched},
                     {"matched_by", outcome.matched_by ? Json(*outcome.matched_by) : Json(nullptr)}});
  }
  Json body{{"rubric", rubric},
            {"runnable", report.runnable},
            {"total", report.total},
            {"max_score", report.max_score},
            {"per_rule", rules}};
  if (!report.runnable) {
    body["failure"] = report.failure;
    if (report.failure_line > 0) body["line"] = report.failure_line;
  }
  return body;
}

std::string iso8601(std::chrono::system_clock::time_point when) {
  std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::int64_t ticks(std::chrono::system_clock::time_point when) {
  return std::chrono::duration_cast<std::chrono::seconds>(when.time_since_epoch()).count();
}

// "element:12" / "interaction:3"
std::pair<ItemKind, ItemCode> parse_recommendation_id(const std::string& id) {
  auto colon = id.find(':');
  if (colon == std::string::npos) throw InvalidArgument("malformed recommendation id '" + id + "'");
  ItemKind kind = item_kind_from_string(std::string_view(id).substr(0, colon));
  auto code = parse_unsigned(std::string_view(id).substr(colon + 1), "recommendation code");
  if (code > std::numeric_limits<ItemCode>::max())
    throw InvalidArgument("malformed recommendation id '" + id + "'");
  return {kind, static_cast<ItemCode>(code)};
}

}  // namespace

struct Service::Slot {
  explicit Slot(DesignSession s, std::int64_t created)
      : session(std::move(s)), created_at(created), last_used(created) {}

  std::mutex mutex;
  DesignSession session;
  std::int64_t created_at;
  std::atomic<std::int64_t> last_used;
};

std::map<std::string, Rubric> load_rubrics(const std::filesystem::path& directory) {
  std::map<std::string, Rubric> rubrics;
  std::error_code ec;
  if (!std::filesystem::is_directory(directory, ec)) return rubrics;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory))
    if (entry.is_regular_file() && entry.path().extension() == ".mfg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Rubric rubric = load_rubric(file);
    std::string name = rubric.name;
    if (!rubrics.emplace(name, std::move(rubric)).second)
      throw SchemaError("duplicate rubric name '" + name + "' in " + file.string());
  }
  return rubrics;
}

Service::Service(std::shared_ptr<const KnowledgeBase> knowledge,
                 std::map<std::string, Rubric> rubrics, ServiceOptions options)
    : knowledge_(std::move(knowledge)), rubrics_(std::move(rubrics)), options_(std::move(options)) {
  if (!knowledge_) throw InvalidArgument("service needs a knowledge base");
  if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
  if (options_.default_limit == 0) throw InvalidArgument("default limit must be positive");
}

Service::~Service() = default;

std::chrono::system_clock::time_point Service::now() const { return options_.clock(); }

std::size_t Service::expire_idle() {
  const std::int64_t cutoff =
      ticks(now()) - std::chrono::duration_cast<std::chrono::seconds>(options_.idle_timeout).count();
  std::lock_guard lock(sessions_mutex_);
  return std::erase_if(sessions_, [&](const auto& entry) { return entry.second->last_used < cutoff; });
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Slot> Service::find_session(const std::string& id) {
  expire_idle();
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
  return it->second;
}

void Service::mount(httplib::Server& server) {
  const std::string prefix(kApiPrefix);
  const std::string session = prefix + "/sessions/([^/]+)";

  auto session_view = [this](Slot& slot) {
    const auto& s = slot.session;
    return Json{{"session_id", s.id()},
                {"revision", s.revision()},
                {"created_at", iso8601(std::chrono::system_clock::time_point(
                                   std::chrono::seconds(slot.created_at)))},
                {"source", vgdl::render_description(s.design())},
                {"design", design_json(s.design())}};
  };

  // Locks the session, checks the revision and runs one mutation.
  auto mutate = [this, session_view](const httplib::Request& req, httplib::Response& res,
                                     auto&& change) {
    auto slot = find_session(req.matches[1]);
    Json body = parse_body(req);
    std::lock_guard lock(slot->mutex);
    slot->session.require_revision(request_revision(req, body));
    Json result = change(slot->session, body);
    slot->last_used = ticks(now());
    Json out = session_view(*slot);
    for (auto& [key, value] : result.items()) out[key] = value;
    send(res, 200, out);
  };

  server.Get(prefix + "/health", guarded([this](const httplib::Request&, httplib::Response& res) {
    const auto& kb = *knowledge_;
    send(res, 200,
         Json{{"status", "ok"},
              {"api_version", "v1"},
              {"catalog_fingerprint", kb.fingerprint()},
              {"corpus_size", kb.catalog().game_count()},
              {"element_items", kb.catalog().elements().size()},
              {"interaction_items", kb.catalog().interactions().size()},
              {"element_rules", kb.rules().elements.rules.size()},
              {"interaction_rules", kb.rules().interactions.rules.size()},
              {"rubrics", [&] {
                 Json names = Json::array();
                 for (const auto& [name, rubric] : rubrics_) names.push_back(name);
                 return names;
               }()}});
  }));

  server.Post(prefix + "/sessions",
              guarded([this, session_view](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_body(req);
                vgdl::GameDescription initial;
                if (auto source = optional_string(body, "source"))
                  initial = vgdl::parse_description(*source);
                if (auto name = optional_string(body, "name")) initial.name = *name;
                expire_idle();
                std::shared_ptr<Slot> slot;
                {
                  std::lock_guard lock(sessions_mutex_);
                  std::string id = "s" + std::to_string(next_session_);
                  slot = std::make_shared<Slot>(DesignSession(id, knowledge_, std::move(initial)),
                                                ticks(now()));
                  ++next_session_;
                  sessions_.emplace(id, slot);
                }
                std::lock_guard lock(slot->mutex);
                send(res, 201, session_view(*slot));
              }));

  server.Get(session + "/design",
             guarded([this, session_view](const httplib::Request& req, httplib::Response& res) {
               auto slot = find_session(req.matches[1]);
               std::lock_guard lock(slot->mutex);
               slot->last_used = ticks(now());
               send(res, 200, session_view(*slot));
             }));

  server.Get(session + "/recommendations",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto slot = find_session(req.matches[1]);
               ItemKind kind = req.has_param("kind")
                                   ? item_kind_from_string(req.get_param_value("kind"))
                                   : ItemKind::Element;
               std::size_t limit = options_.default_limit;
               if (req.has_param("limit"))
                 limit = parse_unsigned(req.get_param_value("limit"), "limit");
               if (limit == 0) throw InvalidArgument("'limit' must be positive");

               std::lock_guard lock(slot->mutex);
               slot->last_used = ticks(now());
               const auto& s = slot->session;
               auto list = kind == ItemKind::Element ? s.recommend_elements(limit)
                                                     : s.recommend_interactions(limit);
               Json items = Json::array();
               for (const auto& rec : list) items.push_back(recommendation_json(rec));
               send(res, 200,
                    Json{{"session_id", s.id()},
                         {"revision", s.revision()},
                         {"kind", to_string(kind)},
                         {"recommendations", items}});
             }));

  // Applies a recommendation id against the session's current list.
  auto apply_recommendation = [](DesignSession& s, ItemKind expected, const std::string& id) {
    auto [kind, code] = parse_recommendation_id(id);
    if (kind != expected)
      throw InvalidArgument("recommendation '" + id + "' is not of kind " +
                            std::string(to_string(expected)));
    std::size_t everything = kind == ItemKind::Element
                                 ? s.knowledge().catalog().elements().size()
                                 : s.knowledge().catalog().interactions().size();
    auto list = kind == ItemKind::Element ? s.recommend_elements(everything + 1)
                                          : s.recommend_interactions(everything + 1);
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& r) { return r.code == code; });
    if (it == list.end()) throw NotFound("recommendation '" + id + "' is not currently offered");
    return s.apply(*it);
  };

  server.Post(session + "/elements",
              guarded([mutate, apply_recommendation](const httplib::Request& req,
                                                     httplib::Response& res) {
                mutate(req, res, [&](DesignSession& s, const Json& body) {
                  if (auto id = optional_string(body, "recommendation"))
                    return Json{{"identifier", apply_recommendation(s, ItemKind::Element, *id)}};
                  std::string identifier =
                      s.add_element(string_field(body, "behavior"), json_params(body),
                                    optional_string(body, "identifier"),
                                    optional_string(body, "parent"));
                  return Json{{"identifier", identifier}};
                });
              }));

  server.Delete(session + "/elements/([^/]+)",
                guarded([mutate](const httplib::Request& req, httplib::Response& res) {
                  mutate(req, res, [&](DesignSession& s, const Json&) {
                    std::string name = req.matches[2];
                    s.remove_element(name);
                    return Json{{"removed", name}};
                  });
                }));

  server.Post(session + "/interactions",
              guarded([mutate, apply_recommendation](const httplib::Request& req,
                                                     httplib::Response& res) {
                mutate(req, res, [&](DesignSession& s, const Json& body) {
                  if (auto id = optional_string(body, "recommendation")) {
                    auto index = apply_recommendation(s, ItemKind::Interaction, *id);
                    return Json{{"index", parse_unsigned(index, "index")}};
                  }
                  vgdl::InteractionDef interaction{string_field(body, "first"),
                                                   string_field(body, "second"),
                                                   string_field(body, "effect"),
                                                   json_params(body)};
                  return Json{{"index", s.add_interaction(std::move(interaction))}};
                });
              }));

  server.Delete(session + "/interactions/([^/]+)",
                guarded([mutate](const httplib::Request& req, httplib::Response& res) {
                  mutate(req, res, [&](DesignSession& s, const Json&) {
                    auto index = parse_unsigned(req.matches[2].str(), "index");
                    s.remove_interaction(static_cast<std::size_t>(index));
                    return Json{{"removed", index}};
                  });
                }));

  server.Post(prefix + "/grade", guarded([this](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_body(req);
                std::string name = string_field(body, "rubric");
                auto it = rubrics_.find(name);
                if (it == rubrics_.end()) throw NotFound("no rubric '" + name + "'");
                send(res, 200, report_json(grade(string_field(body, "source"), it->second), name));
              }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    const int status = res.status;
    if (status == 404) {
      send_error(res, "NotFound", "no route for " + req.method + " " + req.path);
    } else {
      send_error(res, "BadRequest", "request rejected with status " + std::to_string(status));
      res.status = status;
    }
    return httplib::Server::HandlerResponse::Handled;
  });
}

}  // namespace mf
