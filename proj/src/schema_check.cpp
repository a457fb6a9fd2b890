#include "enfuse/schema_check.hpp"

#include <map>
#include <mutex>

#include "enfuse/error.hpp"
#include "enfuse_schemas.hpp"  // generated

namespace enfuse::schema {
namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  if (type == "number") return v.is_number();
  return false;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& v, const json& s, const std::string& path) {
    if (s.contains("$ref")) {
      check(v, resolve(s.at("$ref").get<std::string>()), path);
      return;
    }
    if (s.contains("type")) {
      const auto& t = s.at("type");
      bool ok = false;
      if (t.is_array()) {
        for (const auto& option : t) ok = ok || has_type(v, option.get<std::string>());
      } else {
        ok = has_type(v, t.get<std::string>());
      }
      if (!ok) {
        fail(path, "expected type " + t.dump());
        return;
      }
    }
    if (s.contains("const") && v != s.at("const")) fail(path, "expected constant " + s.at("const").dump());
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& option : s.at("enum")) found = found || option == v;
      if (!found) fail(path, "value not in enum");
    }
    if (v.is_number()) {
      if (s.contains("minimum") && v.get<double>() < s.at("minimum").get<double>()) fail(path, "below minimum");
      if (s.contains("maximum") && v.get<double>() > s.at("maximum").get<double>()) fail(path, "above maximum");
    }
    if (v.is_object()) {
      if (s.contains("required")) {
        for (const auto& key : s.at("required")) {
          if (!v.contains(key.get<std::string>())) fail(path, "missing required property " + key.get<std::string>());
        }
      }
      const json* props = s.contains("properties") ? &s.at("properties") : nullptr;
      for (const auto& [key, value] : v.items()) {
        if (props && props->contains(key)) {
          check(value, props->at(key), path + "/" + key);
        } else if (s.contains("additionalProperties") && s.at("additionalProperties") == false) {
          fail(path, "unexpected property " + key);
        }
      }
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s.at("minItems").get<std::size_t>()) fail(path, "too few items");
      if (s.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s.at("items"), path + "/" + std::to_string(i));
      }
    }
  }

  std::vector<std::string> errors;

 private:
  const json& resolve(const std::string& ref) {
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) throw Error(ErrorKind::schema, "unsupported $ref " + ref);
    return root_.at("$defs").at(ref.substr(prefix.size()));
  }

  void fail(const std::string& path, const std::string& message) {
    errors.push_back((path.empty() ? "/" : path) + ": " + message);
  }

  const json& root_;
};

}  // namespace

std::vector<std::string> validate(const nlohmann::json& instance, const nlohmann::json& schema) {
  Validator v(schema);
  v.check(instance, schema, "");
  return std::move(v.errors);
}

const nlohmann::json& shipped(std::string_view name) {
  static std::mutex mutex;
  static std::map<std::string, nlohmann::json, std::less<>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  for (const auto& entry : generated::kSchemas) {
    if (entry.name == name) return cache.emplace(std::string(name), nlohmann::json::parse(entry.text)).first->second;
  }
  throw Error(ErrorKind::schema, "no shipped schema named " + std::string(name));
}

}  // namespace enfuse::schema
