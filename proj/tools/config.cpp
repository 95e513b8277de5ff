#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string shortest(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::string range_text(double lo, double hi, bool open_lo) {
  return std::string(open_lo ? "(" : "[") + shortest(lo) + ", " + shortest(hi) + "]";
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Config::set(const std::string& key, const std::string& value, Layer layer) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  auto& entries = supplied_[key];
  for (const Entry& e : entries)
    if (e.layer == layer) throw ConfigError("key '" + key + "' given twice");
  entries.push_back({value, layer});
}

void Config::set_argument(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + kv + "'");
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), Layer::Argument);
}

void Config::load_file(const std::filesystem::path& path, const std::string& section,
                       const std::vector<std::string>& known_sections) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line, current;
  int lineno = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (std::find(known_sections.begin(), known_sections.end(), current) == known_sections.end())
        throw ConfigError(where() + "unknown section [" + current + "]");
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError(where() + "expected 'key: value'");
    if (!current.empty() && current != section) continue;
    try {
      set(trim(line.substr(0, colon)), trim(line.substr(colon + 1)),
          current.empty() ? Layer::FileGlobal : Layer::FileSection);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = supplied_.find(key);
  if (it == supplied_.end()) return nullptr;
  return &*std::max_element(it->second.begin(), it->second.end(),
                            [](const Entry& a, const Entry& b) { return a.layer < b.layer; });
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::take(const std::string& key, const std::string& fallback) {
  const Entry* e = find(key);
  const std::string v = e ? e->value : fallback;
  used_[key] = v;
  return v;
}

double Config::number(const std::string& key, double fallback) {
  const Entry* e = find(key);
  double v = fallback;
  if (e) {
    const std::string& s = e->value;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ConfigError(key + ": '" + s + "' is not a number");
  }
  used_[key] = e ? e->value : shortest(v);
  return v;
}

double Config::real(const std::string& key, double fallback, double lo, double hi) {
  const double v = number(key, fallback);
  if (!(v >= lo && v <= hi))
    throw ConfigError(key + " = " + shortest(v) + " outside " + range_text(lo, hi, false));
  return v;
}

double Config::positive(const std::string& key, double fallback, double hi) {
  const double v = number(key, fallback);
  if (!(v > 0.0 && v <= hi))
    throw ConfigError(key + " = " + shortest(v) + " outside " + range_text(0.0, hi, true));
  return v;
}

int Config::integer(const std::string& key, int fallback, int lo, int hi) {
  const Entry* e = find(key);
  int v = fallback;
  if (e) {
    const std::string& s = e->value;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw ConfigError(key + ": '" + s + "' is not an integer");
  }
  if (v < lo || v > hi)
    throw ConfigError(key + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  used_[key] = std::to_string(v);
  return v;
}

bool Config::boolean(const std::string& key, bool fallback) {
  const std::string s = take(key, fallback ? "true" : "false");
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::string Config::text(const std::string& key, const std::string& fallback) {
  return take(key, fallback);
}

std::string Config::choice(const std::string& key, const std::string& fallback,
                           const std::vector<std::string>& allowed) {
  const std::string s = take(key, fallback);
  if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(key + ": '" + s + "' is not one of {" + list + "}");
  }
  return s;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [key, entries] : supplied_)
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("unrecognized key(s): " + unknown);
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : used_) os << k << " = " << v << '\n';
  return os.str();
}

std::uint64_t Config::hash() const { return fnv1a64(echo()); }

}  // namespace smc::cli
