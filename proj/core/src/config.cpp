#include "pgig/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"

namespace pgig {

namespace {

// A comment starts at '#' or ';' at line start or after whitespace.
std::string_view strip_comment(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == '#' || s[i] == ';') && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t')) return s.substr(0, i);
  }
  return s;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Config Config::parse(std::istream& in, std::string_view source_name) {
  Config cfg;
  cfg.source_ = std::string(source_name);
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(cfg.source_, line_no, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ParseError(cfg.source_, line_no, "invalid section name '" + std::string(name) + "'");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(cfg.source_, line_no, "expected key = value, got '" + std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!valid_name(key)) throw ParseError(cfg.source_, line_no, "invalid key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (cfg.entries_.count(full)) throw ParseError(cfg.source_, line_no, "duplicate key '" + full + "'");
    cfg.entries_[full] = Entry{std::string(value), line_no};
  }
  return cfg;
}

Config Config::parse_string(std::string_view text, std::string_view source_name) {
  std::istringstream in{std::string(text)};
  return parse(in, source_name);
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open config file");
  return parse(in, path.string());
}

bool Config::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> Config::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

void Config::bad_value(std::string_view key, const Entry& e, const std::string& expected) const {
  throw ParseError(e.line ? source_ : std::string("<override>"), e.line,
                   std::string(key) + ": expected " + expected + ", got '" + e.value + "'");
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? std::string(fallback) : it->second.value;
}

double Config::get_double(std::string_view key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto v = parse_number(it->second.value);
  if (!v || !std::isfinite(*v)) bad_value(key, it->second, "a finite number");
  return *v;
}

std::uint64_t Config::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto v = parse_u64(it->second.value);
  if (!v) bad_value(key, it->second, "an unsigned integer");
  return *v;
}

std::size_t Config::get_size(std::string_view key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, it->second, "true or false");
}

std::vector<std::size_t> Config::get_size_list(std::string_view key, std::vector<std::size_t> fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::size_t> out;
  for (auto field : split_fields(it->second.value)) {
    const auto v = parse_u64(trim(field));
    if (!v) bad_value(key, it->second, "a comma-separated list of unsigned integers");
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

void Config::set(std::string_view key, std::string value) { entries_[std::string(key)] = Entry{std::move(value), 0}; }

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  const std::string_view key = eq == std::string_view::npos ? std::string_view{} : trim(assignment.substr(0, eq));
  if (!valid_name(key)) {
    throw ParseError("<override>", 0, "expected section.key=value, got '" + std::string(assignment) + "'");
  }
  set(key, std::string(trim(assignment.substr(eq + 1))));
}

void Config::merge(const Config& other) {
  for (const auto& [k, e] : other.entries_) entries_[k] = e;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

std::vector<std::string> Config::keys_in(std::string_view section) const {
  std::vector<std::string> out;
  const std::string prefix = std::string(section) + ".";
  for (const auto& [k, e] : entries_) {
    if (k.rfind(prefix, 0) == 0 && k.find('.', prefix.size()) == std::string::npos) {
      out.push_back(k.substr(prefix.size()));
    }
  }
  return out;
}

void Config::write(std::ostream& out) const {
  // Unsectioned keys first; anything after a [section] header belongs to it.
  for (const auto& [k, e] : entries_) {
    if (k.find('.') == std::string::npos) out << k << " = " << e.value << '\n';
  }
  std::string current;
  for (const auto& [k, e] : entries_) {
    const auto dot = k.rfind('.');
    if (dot == std::string::npos) continue;
    const std::string section = k.substr(0, dot);
    if (section != current) {
      out << "\n[" << section << "]\n";
      current = section;
    }
    out << k.substr(dot + 1) << " = " << e.value << '\n';
  }
}

void Config::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  write(out);
}

}  // namespace pgig
