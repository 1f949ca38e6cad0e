#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbf/types.hpp"

namespace wbf {

// Line-oriented structured text used for robot and scenario files:
//
//   schema_version 1
//   name hexapod
//   link {
//     mass 0.5
//     com 0.025 0 0
//   }
//
// A line is either `key v1 v2 ...` (a scalar entry, values split on
// whitespace), `key {` (opens a named section), or `}` (closes it).
// `#` starts a comment. Duplicate keys are allowed and keep file order.
class ConfigNode {
 public:
  std::string key;                        // section name ("" for the root)
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::vector<ConfigNode> children;
  int line = 0;                           // line the section was opened on

  bool has(const std::string& k) const;

  // Scalar-entry accessors. The `require_*` variants throw ValidationError
  // naming the missing/offending key; `get_*` return defaults.
  const std::vector<std::string>* find(const std::string& k) const;
  std::string require_string(const std::string& k) const;
  scalar_t require_scalar(const std::string& k) const;
  vector_t require_vector(const std::string& k, int expected_size) const;
  std::string get_string(const std::string& k, const std::string& dflt) const;
  scalar_t get_scalar(const std::string& k, scalar_t dflt) const;
  long get_int(const std::string& k, long dflt) const;
  bool get_bool(const std::string& k, bool dflt) const;
  std::optional<scalar_t> maybe_scalar(const std::string& k) const;

  std::vector<const ConfigNode*> sections(const std::string& k) const;
  const ConfigNode* section(const std::string& k) const;  // nullptr if absent
};

// Parses text into a ConfigNode tree. Throws ParseError with a line number
// on unbalanced braces or malformed lines.
ConfigNode parse_config_text(const std::string& text, const std::string& origin = "<string>");
ConfigNode load_config_file(const std::string& path);

// Formats a double so that reading it back reproduces the exact bits
// (shortest form when possible, %.17g otherwise).
std::string format_scalar(scalar_t v);

// Writer used by serializers: accumulates entries/sections with indentation.
class ConfigWriter {
 public:
  void entry(const std::string& key, const std::string& value);
  void entry(const std::string& key, scalar_t value);
  void entry(const std::string& key, long value);
  void entry(const std::string& key, const vector_t& values);
  void entry(const std::string& key, const vector3_t& values);
  void open(const std::string& key);
  void close();
  void blank();
  void comment(const std::string& text);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
  int depth_ = 0;
  void indent();
};

}  // namespace wbf
