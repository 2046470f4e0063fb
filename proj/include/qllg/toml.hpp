#pragma once

// Minimal TOML subset parser — just enough for flat config files: [section]
// headers, bare keys, strings, numbers, booleans, single-line arrays, and #
// comments. Keys are flattened to "section.key". Not a general TOML
// implementation (no nested tables, dates, or multi-line strings); configs
// needing more structure should use the JSON path instead.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qllg::toml {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Value {
  enum class Kind { Str, Num, Bool, NumList, StrList } kind = Kind::Str;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
};

using Table = std::map<std::string, Value>;

namespace detail {

inline void skip_ws(std::string_view& s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

inline std::string parse_basic_string(std::string_view& s, int line) {
  // s starts at the opening quote
  s.remove_prefix(1);
  std::string out;
  while (!s.empty() && s.front() != '"') {
    if (s.front() == '\\') {
      s.remove_prefix(1);
      if (s.empty()) break;
      switch (s.front()) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default:
          throw ParseError("line " + std::to_string(line) + ": unsupported escape \\" +
                           std::string(1, s.front()));
      }
    } else {
      out += s.front();
    }
    s.remove_prefix(1);
  }
  if (s.empty()) throw ParseError("line " + std::to_string(line) + ": unterminated string");
  s.remove_prefix(1);  // closing quote
  return out;
}

inline double parse_number(std::string_view tok, int line) {
  std::string cleaned;
  for (char c : tok)
    if (c != '_') cleaned += c;  // TOML permits digit separators
  try {
    std::size_t used = 0;
    double v = std::stod(cleaned, &used);
    if (used != cleaned.size())
      throw ParseError("line " + std::to_string(line) + ": trailing junk in number '" +
                       std::string(tok) + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("line " + std::to_string(line) + ": invalid number '" + std::string(tok) + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("line " + std::to_string(line) + ": number out of range '" + std::string(tok) + "'");
  }
}

inline Value parse_value(std::string_view& s, int line);

inline Value parse_array(std::string_view& s, int line) {
  s.remove_prefix(1);  // '['
  Value v;
  bool first = true;
  while (true) {
    skip_ws(s);
    if (s.empty()) throw ParseError("line " + std::to_string(line) + ": unterminated array");
    if (s.front() == ']') {
      s.remove_prefix(1);
      if (first) v.kind = Value::Kind::NumList;  // empty array defaults to numeric
      return v;
    }
    Value elem = parse_value(s, line);
    if (elem.kind == Value::Kind::Str) {
      if (!first && v.kind != Value::Kind::StrList)
        throw ParseError("line " + std::to_string(line) + ": mixed array element types");
      v.kind = Value::Kind::StrList;
      v.strs.push_back(elem.str);
    } else if (elem.kind == Value::Kind::Num) {
      if (!first && v.kind != Value::Kind::NumList)
        throw ParseError("line " + std::to_string(line) + ": mixed array element types");
      v.kind = Value::Kind::NumList;
      v.nums.push_back(elem.num);
    } else {
      throw ParseError("line " + std::to_string(line) + ": unsupported array element");
    }
    first = false;
    skip_ws(s);
    if (!s.empty() && s.front() == ',') s.remove_prefix(1);
  }
}

inline Value parse_value(std::string_view& s, int line) {
  skip_ws(s);
  if (s.empty()) throw ParseError("line " + std::to_string(line) + ": missing value");
  Value v;
  if (s.front() == '"') {
    v.kind = Value::Kind::Str;
    v.str = parse_basic_string(s, line);
    return v;
  }
  if (s.front() == '[') return parse_array(s, line);
  // bare token: bool or number
  std::size_t end = 0;
  while (end < s.size() && s[end] != ' ' && s[end] != '\t' && s[end] != ',' && s[end] != ']' &&
         s[end] != '#')
    ++end;
  std::string_view tok = s.substr(0, end);
  s.remove_prefix(end);
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::Bool;
    v.boolean = (tok == "true");
    return v;
  }
  v.kind = Value::Kind::Num;
  v.num = parse_number(tok, line);
  return v;
}

// Strips a # comment that is not inside a string literal.
inline std::string strip_comment(const std::string& raw) {
  bool in_str = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '"' && (i == 0 || raw[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return raw.substr(0, i);
  }
  return raw;
}

}  // namespace detail

inline Table parse(const std::string& text) {
  Table out;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string stripped = detail::strip_comment(raw);
    std::string_view s(stripped);
    detail::skip_ws(s);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError("line " + std::to_string(line) + ": malformed section header");
      section = std::string(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line) + ": expected key = value");
    std::string_view key = s.substr(0, eq);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
    if (key.empty()) throw ParseError("line " + std::to_string(line) + ": empty key");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
        throw ParseError("line " + std::to_string(line) + ": bad character in key");
    std::string_view rest = s.substr(eq + 1);
    Value v = detail::parse_value(rest, line);
    detail::skip_ws(rest);
    if (!rest.empty())
      throw ParseError("line " + std::to_string(line) + ": trailing content after value");
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (out.count(full)) throw ParseError("line " + std::to_string(line) + ": duplicate key " + full);
    out[full] = std::move(v);
  }
  return out;
}

inline Table parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

// Typed accessors. get_* return the fallback when the key is absent;
// require_* throw.

inline bool has(const Table& t, const std::string& key) { return t.count(key) > 0; }

inline double require_num(const Table& t, const std::string& key) {
  auto it = t.find(key);
  if (it == t.end()) throw ParseError("missing required key " + key);
  if (it->second.kind != Value::Kind::Num) throw ParseError(key + " must be a number");
  return it->second.num;
}

inline double get_num(const Table& t, const std::string& key, double fallback) {
  return has(t, key) ? require_num(t, key) : fallback;
}

inline std::string require_str(const Table& t, const std::string& key) {
  auto it = t.find(key);
  if (it == t.end()) throw ParseError("missing required key " + key);
  if (it->second.kind != Value::Kind::Str) throw ParseError(key + " must be a string");
  return it->second.str;
}

inline std::string get_str(const Table& t, const std::string& key, const std::string& fallback) {
  return has(t, key) ? require_str(t, key) : fallback;
}

inline bool get_bool(const Table& t, const std::string& key, bool fallback) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (it->second.kind != Value::Kind::Bool) throw ParseError(key + " must be a boolean");
  return it->second.boolean;
}

inline std::vector<double> get_num_list(const Table& t, const std::string& key,
                                        std::vector<double> fallback = {}) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (it->second.kind == Value::Kind::Num) return {it->second.num};  // scalar promotes
  if (it->second.kind != Value::Kind::NumList) throw ParseError(key + " must be a numeric array");
  return it->second.nums;
}

}  // namespace qllg::toml
