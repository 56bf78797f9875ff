#pragma once

// Internal helpers around nlohmann::json with located error messages.

#include "json.hpp"
#include <string>
#include <string_view>
#include <vector>

#include "tubesynth/error.hpp"

namespace tubesynth {

using json = nlohmann::json;

namespace json_util {

inline json parse_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorKind::Parse, what + ": line " + std::to_string(line) + ", column " +
                               std::to_string(column) + ": malformed document");
  }
}

inline const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key))
    fail(ErrorKind::Parse, std::string("missing field '") + key + "'");
  return doc.at(key);
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorKind::Parse, where + ": expected a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(ErrorKind::Parse, where + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline double number_or(const json& doc, const char* key, double fallback) {
  if (!doc.is_object() || !doc.contains(key)) return fallback;
  return number(doc.at(key), key);
}

}  // namespace json_util
}  // namespace tubesynth
