#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace enfuse::schema {

/// Validates `instance` against a JSON Schema using the keyword subset the
/// shipped schemas rely on: type, properties, required, additionalProperties
/// (boolean), items, minItems, enum, const, minimum, maximum and local
/// "#/$defs/..." references. Returns one message per violation.
std::vector<std::string> validate(const nlohmann::json& instance, const nlohmann::json& schema);

/// Schemas shipped in schemas/ and compiled into the library, by file stem
/// ("pareto", "fusion", "benchmarks", "wilcoxon", "truth").
const nlohmann::json& shipped(std::string_view name);

}  // namespace enfuse::schema
