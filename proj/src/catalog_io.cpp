#include <algorithm>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "mf/catalog.hpp"
#include "mf/error.hpp"
#include "json_scalar.hpp"

namespace mf {

using nlohmann::json;

namespace {

json transaction_json(const Transaction& row) { return json(row); }

Transaction transaction_from_json(const json& value, std::size_t dictionary_size,
                                  const std::string& where) {
  if (!value.is_array()) throw SchemaError(where + ": expected an array of codes");
  Transaction row;
  for (const auto& code : value) {
    if (!code.is_number_unsigned()) throw SchemaError(where + ": codes must be unsigned");
    auto c = code.get<std::uint64_t>();
    if (c >= dictionary_size)
      throw SchemaError(where + ": code " + std::to_string(c) + " is not in the dictionary");
    row.push_back(static_cast<ItemCode>(c));
  }
  if (!std::is_sorted(row.begin(), row.end()) ||
      std::adjacent_find(row.begin(), row.end()) != row.end())
    throw SchemaError(where + ": codes must be strictly ascending");
  return row;
}

}  // namespace

std::string catalog_to_text(const Catalog& catalog) {
  json root;
  root["format"] = kCatalogFormat;
  root["version"] = kCatalogVersion;

  json elements = json::array();
  for (std::size_t code = 0; code < catalog.elements().size(); ++code) {
    const auto& item = catalog.elements()[code];
    elements.push_back({{"code", code},
                        {"behavior", item.behavior},
                        {"params", params_to_json(item.salient_params)},
                        {"name", catalog.element_name(static_cast<ItemCode>(code))}});
  }
  root["elements"] = std::move(elements);

  json interactions = json::array();
  for (std::size_t code = 0; code < catalog.interactions().size(); ++code) {
    const auto& item = catalog.interactions()[code];
    interactions.push_back({{"code", code},
                            {"first", item.first},
                            {"second", item.second},
                            {"effect", item.effect}});
  }
  root["interactions"] = std::move(interactions);

  json games = json::array();
  for (const auto& [name, row] : catalog.element_transactions()) {
    games.push_back({{"name", name},
                     {"elements", transaction_json(row)},
                     {"interactions",
                      transaction_json(catalog.interaction_transactions().at(name))}});
  }
  root["games"] = std::move(games);
  return root.dump(2) + "\n";
}

Catalog catalog_from_text(std::string_view text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw SchemaError("catalog is not a JSON object");
  if (root.value("format", "") != kCatalogFormat)
    throw SchemaError("not an mf-catalog file");
  if (const auto version = root.value("version", ""); version != kCatalogVersion)
    throw SchemaError("unsupported catalog schema version '" + version + "' (expected " +
                      std::string(kCatalogVersion) + ")");

  Catalog catalog;
  try {
    for (const auto& entry : root.at("elements")) {
      if (entry.at("code").get<std::size_t>() != catalog.elements_.size())
        throw SchemaError("element codes must be dense and in order");
      ElementItem item{entry.at("behavior").get<std::string>(),
                       params_from_json(entry.at("params"))};
      catalog.elements_.push_back(std::move(item));
      catalog.element_names_.push_back(entry.at("name").get<std::string>());
    }
    for (const auto& entry : root.at("interactions")) {
      if (entry.at("code").get<std::size_t>() != catalog.interactions_.size())
        throw SchemaError("interaction codes must be dense and in order");
      InteractionItem item{entry.at("first").get<ItemCode>(),
                           entry.at("second").get<ItemCode>(),
                           entry.at("effect").get<std::string>()};
      if (item.first >= catalog.elements_.size() ||
          item.second >= catalog.elements_.size())
        throw SchemaError("interaction references an unknown element code");
      catalog.interactions_.push_back(std::move(item));
    }
    for (const auto& entry : root.at("games")) {
      const auto name = entry.at("name").get<std::string>();
      const std::string where = "game '" + name + "'";
      auto elements =
          transaction_from_json(entry.at("elements"), catalog.elements_.size(), where);
      auto interactions = transaction_from_json(entry.at("interactions"),
                                                catalog.interactions_.size(), where);
      if (!catalog.element_transactions_.emplace(name, std::move(elements)).second)
        throw SchemaError("duplicate game '" + name + "'");
      catalog.interaction_transactions_.emplace(name, std::move(interactions));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed catalog: ") + e.what());
  }

  catalog.rebuild_indexes();
  if (catalog.element_index_.size() != catalog.elements_.size() ||
      catalog.interaction_index_.size() != catalog.interactions_.size())
    throw SchemaError("catalog dictionary contains duplicate items");
  return catalog;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& destination) {
  write_text_file(destination, catalog_to_text(catalog));
}

Catalog load_catalog(const std::filesystem::path& source) {
  return catalog_from_text(read_text_file(source));
}

std::vector<vgdl::GameDescription> load_corpus(const std::filesystem::path& directory) {
  std::error_code ec;
  if (!std::filesystem::is_directory(directory, ec))
    throw IoError("corpus directory '" + directory.string() + "' is not readable");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".vgd")
      files.push_back(entry.path());
  if (ec) throw IoError("cannot list '" + directory.string() + "': " + ec.message());
  std::sort(files.begin(), files.end());

  std::vector<vgdl::GameDescription> games;
  for (const auto& file : files) {
    try {
      auto game = vgdl::parse_description(read_text_file(file));
      if (game.name.empty()) game.name = file.stem().string();
      games.push_back(std::move(game));
    } catch (const ParseFailure& failure) {
      throw ParseFailure(failure.line(), file.filename().string() + ": " + failure.reason());
    }
  }
  return games;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace mf
