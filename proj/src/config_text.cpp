#include "wbf/config_text.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wbf {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#') break;
    // Allow trailing comments glued to a token ("value#note").
    auto hash = t.find('#');
    if (hash != std::string::npos) {
      if (hash > 0) toks.push_back(t.substr(0, hash));
      break;
    }
    toks.push_back(t);
  }
  return toks;
}

scalar_t parse_scalar_token(const std::string& tok, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const scalar_t v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw ValidationError("entry '" + key + "': '" + tok + "' is not a number");
  }
  return v;
}

}  // namespace

bool ConfigNode::has(const std::string& k) const { return find(k) != nullptr; }

const std::vector<std::string>* ConfigNode::find(const std::string& k) const {
  for (const auto& [key_, vals] : entries) {
    if (key_ == k) return &vals;
  }
  return nullptr;
}

std::string ConfigNode::require_string(const std::string& k) const {
  const auto* vals = find(k);
  if (!vals || vals->empty()) {
    throw ValidationError("missing entry '" + k + "' in section '" + key + "'");
  }
  return (*vals)[0];
}

scalar_t ConfigNode::require_scalar(const std::string& k) const {
  return parse_scalar_token(require_string(k), k);
}

vector_t ConfigNode::require_vector(const std::string& k, int expected_size) const {
  const auto* vals = find(k);
  if (!vals) {
    throw ValidationError("missing entry '" + k + "' in section '" + key + "'");
  }
  if (static_cast<int>(vals->size()) != expected_size) {
    throw ValidationError("entry '" + k + "' expects " + std::to_string(expected_size) +
                          " values, got " + std::to_string(vals->size()));
  }
  vector_t v(expected_size);
  for (int i = 0; i < expected_size; ++i) v[i] = parse_scalar_token((*vals)[i], k);
  return v;
}

std::string ConfigNode::get_string(const std::string& k, const std::string& dflt) const {
  const auto* vals = find(k);
  return (vals && !vals->empty()) ? (*vals)[0] : dflt;
}

scalar_t ConfigNode::get_scalar(const std::string& k, scalar_t dflt) const {
  const auto* vals = find(k);
  if (!vals || vals->empty()) return dflt;
  return parse_scalar_token((*vals)[0], k);
}

long ConfigNode::get_int(const std::string& k, long dflt) const {
  const auto* vals = find(k);
  if (!vals || vals->empty()) return dflt;
  const scalar_t v = parse_scalar_token((*vals)[0], k);
  const long i = static_cast<long>(v);
  if (static_cast<scalar_t>(i) != v) {
    throw ValidationError("entry '" + k + "': expected an integer, got '" + (*vals)[0] + "'");
  }
  return i;
}

bool ConfigNode::get_bool(const std::string& k, bool dflt) const {
  const auto* vals = find(k);
  if (!vals || vals->empty()) return dflt;
  const std::string& s = (*vals)[0];
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("entry '" + k + "': expected true/false, got '" + s + "'");
}

std::optional<scalar_t> ConfigNode::maybe_scalar(const std::string& k) const {
  const auto* vals = find(k);
  if (!vals || vals->empty()) return std::nullopt;
  return parse_scalar_token((*vals)[0], k);
}

std::vector<const ConfigNode*> ConfigNode::sections(const std::string& k) const {
  std::vector<const ConfigNode*> out;
  for (const auto& c : children) {
    if (c.key == k) out.push_back(&c);
  }
  return out;
}

const ConfigNode* ConfigNode::section(const std::string& k) const {
  for (const auto& c : children) {
    if (c.key == k) return &c;
  }
  return nullptr;
}

ConfigNode parse_config_text(const std::string& text, const std::string& origin) {
  ConfigNode root;
  std::vector<ConfigNode*> stack{&root};
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() == 1 && toks[0] == "}") {
      if (stack.size() == 1) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": unmatched '}'");
      }
      stack.pop_back();
      continue;
    }
    if (toks.back() == "{") {
      if (toks.size() != 2) {
        throw ParseError(origin + ":" + std::to_string(lineno) +
                         ": section opening must be 'name {'");
      }
      ConfigNode child;
      child.key = toks[0];
      child.line = lineno;
      stack.back()->children.push_back(std::move(child));
      stack.push_back(&stack.back()->children.back());
      continue;
    }
    for (const auto& t : toks) {
      if (t.find('{') != std::string::npos || t.find('}') != std::string::npos) {
        throw ParseError(origin + ":" + std::to_string(lineno) +
                         ": braces must be standalone tokens");
      }
    }
    std::vector<std::string> vals(toks.begin() + 1, toks.end());
    stack.back()->entries.emplace_back(toks[0], std::move(vals));
  }
  if (stack.size() != 1) {
    throw ParseError(origin + ": unexpected end of input, " +
                     std::to_string(stack.size() - 1) + " section(s) left open");
  }
  return root;
}

ConfigNode load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string format_scalar(scalar_t v) {
  // Try increasing precision until the round trip is exact; %.17g always is.
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void ConfigWriter::indent() { out_.append(static_cast<size_t>(depth_) * 2, ' '); }

void ConfigWriter::entry(const std::string& key, const std::string& value) {
  indent();
  out_ += key;
  out_ += ' ';
  out_ += value;
  out_ += '\n';
}

void ConfigWriter::entry(const std::string& key, scalar_t value) {
  entry(key, format_scalar(value));
}

void ConfigWriter::entry(const std::string& key, long value) {
  entry(key, std::to_string(value));
}

void ConfigWriter::entry(const std::string& key, const vector_t& values) {
  std::string s;
  for (int i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += format_scalar(values[i]);
  }
  entry(key, s);
}

void ConfigWriter::entry(const std::string& key, const vector3_t& values) {
  entry(key, vector_t(values));
}

void ConfigWriter::open(const std::string& key) {
  indent();
  out_ += key;
  out_ += " {\n";
  ++depth_;
}

void ConfigWriter::close() {
  --depth_;
  indent();
  out_ += "}\n";
}

void ConfigWriter::blank() { out_ += '\n'; }

void ConfigWriter::comment(const std::string& text) {
  indent();
  out_ += "# ";
  out_ += text;
  out_ += '\n';
}

}  // namespace wbf
