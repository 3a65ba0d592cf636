#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pgig {

/// Flat key=value configuration with [section] headers.
///
///   # comment
///   [stress]
///   noise_sigma = 0.25
///
/// Keys are addressed as "section.key". Lines are trimmed; '#' or ';' at line
/// start or after whitespace starts a comment. Typed getters report bad values
/// as ParseError at the defining line.
class Config {
 public:
  static Config parse(std::istream& in, std::string_view source_name);
  static Config parse_string(std::string_view text, std::string_view source_name = "<string>");
  static Config load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<std::size_t> get_size_list(std::string_view key, std::vector<std::size_t> fallback) const;

  /// Sets or replaces a value (line number 0, i.e. not from a file).
  void set(std::string_view key, std::string value);
  /// Applies "section.key=value".
  void set_assignment(std::string_view assignment);
  void merge(const Config& other);

  /// Keys in sorted order.
  std::vector<std::string> keys() const;
  /// Keys of one section, without the section prefix.
  std::vector<std::string> keys_in(std::string_view section) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  [[noreturn]] void bad_value(std::string_view key, const Entry& e, const std::string& expected) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace pgig
