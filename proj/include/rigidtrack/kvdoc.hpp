#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rigidtrack {

// Formats a double so that it round-trips exactly and serializes the same
// way on every run. All human-readable outputs use this.
std::string format_double(double v);

// A flat, ordered `key = value` text document. Keys are dotted identifiers,
// values are free text (lists are whitespace-separated tokens). `#` starts
// a comment, blank lines are ignored. Parse errors carry the line number.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text, std::string_view origin);
  static KeyValueDoc parse_file(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  // Typed getters; throw Error(config) naming the key on absence or on a
  // value of the wrong shape.
  const std::string& get(std::string_view key) const;
  int64_t get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<std::string> get_strings(std::string_view key) const;

  std::string get_or(std::string_view key, std::string fallback) const;
  int64_t get_int_or(std::string_view key, int64_t fallback) const;
  double get_double_or(std::string_view key, double fallback) const;
  bool get_bool_or(std::string_view key, bool fallback) const;

  void set(std::string key, std::string value);
  void set_int(std::string key, int64_t value);
  void set_double(std::string key, double value);
  void set_bool(std::string key, bool value);
  void set_doubles(std::string key, const std::vector<double>& values);
  void set_strings(std::string key, const std::vector<std::string>& values);

  // Keys in insertion order; optionally restricted to a dotted prefix.
  std::vector<std::string> keys() const;
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

  std::string serialize() const;
  void write_file(const std::filesystem::path& path) const;

 private:
  struct Entry {
    std::string key;
    std::string value;
  };
  const Entry* lookup(std::string_view key) const;

  std::vector<Entry> entries_;
};

}  // namespace rigidtrack
