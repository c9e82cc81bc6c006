#pragma once

// Checks a document against the subset of JSON Schema used by
// docs/schema/report.schema.json: $ref into $defs, type, enum, anyOf,
// required, properties, items, minimum and maximum.

#include <json.hpp>

#include <string>
#include <vector>

namespace testing {

class SchemaCheck {
 public:
  using Json = nlohmann::ordered_json;

  explicit SchemaCheck(Json root) : root_(std::move(root)) {}

  /// Errors for `doc` against `$defs/<def>`, or against the root when `def` is empty.
  std::vector<std::string> errors(const Json& doc, const std::string& def = "") const {
    std::vector<std::string> out;
    check(doc, def.empty() ? root_ : root_.at("$defs").at(def), "$", out);
    return out;
  }

  bool valid(const Json& doc, const std::string& def = "") const { return errors(doc, def).empty(); }

 private:
  static bool has_type(const Json& v, const std::string& t) {
    if (t == "null") return v.is_null();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "string") return v.is_string();
    if (t == "array") return v.is_array();
    if (t == "object") return v.is_object();
    return false;
  }

  const Json& resolve(const std::string& ref) const {
    const std::string prefix = "#/$defs/";
    return root_.at("$defs").at(ref.substr(prefix.size()));
  }

  void check(const Json& v, const Json& s, const std::string& at, std::vector<std::string>& out) const {
    if (s.contains("$ref")) return check(v, resolve(s.at("$ref").get<std::string>()), at, out);
    if (s.contains("anyOf")) {
      bool any = false;
      for (const auto& alt : s.at("anyOf")) {
        std::vector<std::string> sub;
        check(v, alt, at, sub);
        if (sub.empty()) any = true;
      }
      if (!any) out.push_back(at + ": matches no alternative");
      return;
    }
    if (s.contains("type")) {
      const Json& t = s.at("type");
      bool ok = false;
      if (t.is_string()) ok = has_type(v, t.get<std::string>());
      else
        for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
      if (!ok) {
        out.push_back(at + ": expected type " + t.dump() + ", got " + v.type_name());
        return;
      }
    }
    if (s.contains("enum")) {
      bool ok = false;
      for (const auto& e : s.at("enum")) ok = ok || e == v;
      if (!ok) out.push_back(at + ": " + v.dump() + " not in enum");
    }
    if (v.is_number()) {
      if (s.contains("minimum") && v.get<double>() < s.at("minimum").get<double>())
        out.push_back(at + ": below minimum");
      if (s.contains("maximum") && v.get<double>() > s.at("maximum").get<double>())
        out.push_back(at + ": above maximum");
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s.at("required"))
          if (!v.contains(k.get<std::string>())) out.push_back(at + ": missing " + k.get<std::string>());
      if (s.contains("properties"))
        for (const auto& [k, sub] : s.at("properties").items())
          if (v.contains(k)) check(v.at(k), sub, at + "." + k, out);
    }
    if (v.is_array() && s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s.at("items"), at + "[" + std::to_string(i) + "]", out);
  }

  Json root_;
};

}  // namespace testing
