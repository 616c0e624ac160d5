#pragma once

#include "json.hpp"
#include "mf/error.hpp"
#include "mf/vgdl.hpp"

namespace mf {

// Params as a JSON array of [key, value] pairs so insertion order survives.
// Integer, decimal and string scalars keep their JSON types.
inline nlohmann::json scalar_to_json(const vgdl::Scalar& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

inline vgdl::Scalar scalar_from_json(const nlohmann::json& value) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) return value.get<double>();
  if (value.is_string()) return value.get<std::string>();
  throw SchemaError("parameter value must be a number or a string");
}

inline nlohmann::json params_to_json(const vgdl::ParamMap& params) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, value] : params) out.push_back({key, scalar_to_json(value)});
  return out;
}

inline vgdl::ParamMap params_from_json(const nlohmann::json& value) {
  if (!value.is_array()) throw SchemaError("params must be an array of [key, value] pairs");
  vgdl::ParamMap params;
  for (const auto& entry : value) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string())
      throw SchemaError("params must be an array of [key, value] pairs");
    if (!params.insert(entry[0].get<std::string>(), scalar_from_json(entry[1])))
      throw SchemaError("duplicate parameter '" + entry[0].get<std::string>() + "'");
  }
  return params;
}

}  // namespace mf
