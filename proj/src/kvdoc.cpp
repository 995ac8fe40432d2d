#include "rigidtrack/kvdoc.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rigidtrack/error.hpp"

namespace rigidtrack {

namespace {

std::string_view strip(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' &&
        c != '-') {
      return false;
    }
  }
  return true;
}

std::vector<std::string> split_tokens(std::string_view value) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(value)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double_token(std::string_view key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    fail(ErrorKind::config,
         "key '" + std::string(key) + "': '" + tok + "' is not a number");
  }
  return v;
}

int64_t parse_int_token(std::string_view key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty() || errno == ERANGE) {
    fail(ErrorKind::config,
         "key '" + std::string(key) + "': '" + tok + "' is not an integer");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

KeyValueDoc KeyValueDoc::parse(std::string_view text, std::string_view origin) {
  KeyValueDoc doc;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    ++line_no;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

    std::string_view body = line;
    size_t hash = body.find('#');
    if (hash != std::string_view::npos) body = body.substr(0, hash);
    body = strip(body);
    if (body.empty()) continue;

    size_t eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::config, std::string(origin) + ":" +
                                  std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    std::string_view key = strip(body.substr(0, eq));
    std::string_view value = strip(body.substr(eq + 1));
    if (!valid_key(key)) {
      fail(ErrorKind::config, std::string(origin) + ":" +
                                  std::to_string(line_no) + ": bad key '" +
                                  std::string(key) + "'");
    }
    if (doc.has(key)) {
      fail(ErrorKind::config, std::string(origin) + ":" +
                                  std::to_string(line_no) +
                                  ": duplicate key '" + std::string(key) +
                                  "'");
    }
    doc.entries_.push_back({std::string(key), std::string(value)});
  }
  return doc;
}

KeyValueDoc KeyValueDoc::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::config, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const KeyValueDoc::Entry* KeyValueDoc::lookup(std::string_view key) const {
  for (const Entry& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

bool KeyValueDoc::has(std::string_view key) const {
  return lookup(key) != nullptr;
}

std::optional<std::string> KeyValueDoc::find(std::string_view key) const {
  const Entry* e = lookup(key);
  if (!e) return std::nullopt;
  return e->value;
}

const std::string& KeyValueDoc::get(std::string_view key) const {
  const Entry* e = lookup(key);
  if (!e) fail(ErrorKind::config, "missing key '" + std::string(key) + "'");
  return e->value;
}

int64_t KeyValueDoc::get_int(std::string_view key) const {
  return parse_int_token(key, get(key));
}

double KeyValueDoc::get_double(std::string_view key) const {
  return parse_double_token(key, get(key));
}

bool KeyValueDoc::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorKind::config,
       "key '" + std::string(key) + "': expected true or false, got '" + v +
           "'");
}

std::vector<double> KeyValueDoc::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const std::string& tok : split_tokens(get(key))) {
    out.push_back(parse_double_token(key, tok));
  }
  return out;
}

std::vector<std::string> KeyValueDoc::get_strings(std::string_view key) const {
  return split_tokens(get(key));
}

std::string KeyValueDoc::get_or(std::string_view key,
                                std::string fallback) const {
  const Entry* e = lookup(key);
  return e ? e->value : std::move(fallback);
}

int64_t KeyValueDoc::get_int_or(std::string_view key, int64_t fallback) const {
  const Entry* e = lookup(key);
  return e ? parse_int_token(key, e->value) : fallback;
}

double KeyValueDoc::get_double_or(std::string_view key,
                                  double fallback) const {
  const Entry* e = lookup(key);
  return e ? parse_double_token(key, e->value) : fallback;
}

bool KeyValueDoc::get_bool_or(std::string_view key, bool fallback) const {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  return get_bool(key);
}

void KeyValueDoc::set(std::string key, std::string value) {
  for (Entry& e : entries_) {
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  }
  entries_.push_back({std::move(key), std::move(value)});
}

void KeyValueDoc::set_int(std::string key, int64_t value) {
  set(std::move(key), std::to_string(value));
}

void KeyValueDoc::set_double(std::string key, double value) {
  set(std::move(key), format_double(value));
}

void KeyValueDoc::set_bool(std::string key, bool value) {
  set(std::move(key), value ? "true" : "false");
}

void KeyValueDoc::set_doubles(std::string key,
                              const std::vector<double>& values) {
  std::string joined;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ' ';
    joined += format_double(values[i]);
  }
  set(std::move(key), std::move(joined));
}

void KeyValueDoc::set_strings(std::string key,
                              const std::vector<std::string>& values) {
  std::string joined;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ' ';
    joined += values[i];
  }
  set(std::move(key), std::move(joined));
}

std::vector<std::string> KeyValueDoc::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.key);
  return out;
}

std::vector<std::string> KeyValueDoc::keys_with_prefix(
    std::string_view prefix) const {
  std::vector<std::string> out;
  for (const Entry& e : entries_) {
    if (e.key.size() >= prefix.size() &&
        std::string_view(e.key).substr(0, prefix.size()) == prefix) {
      out.push_back(e.key);
    }
  }
  return out;
}

std::string KeyValueDoc::serialize() const {
  std::string out;
  for (const Entry& e : entries_) {
    out += e.key;
    out += " = ";
    out += e.value;
    out += '\n';
  }
  return out;
}

void KeyValueDoc::write_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::config, "cannot write " + path.string());
  out << serialize();
  if (!out) fail(ErrorKind::config, "write failed for " + path.string());
}

}  // namespace rigidtrack
