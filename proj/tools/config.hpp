#pragma once

// Run configuration: layered key/value pairs with strict key checking.
//
// Layers, lowest precedence first: config-file keys outside any section,
// the file section named after the subcommand, key=value arguments, and the
// dedicated flags (--dt, --T, ...). A subcommand declares its keys by
// reading them; finish() then rejects anything that was set but never read.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace smc::cli {

/// Malformed or out-of-range configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Layer { FileGlobal, FileSection, Argument, Flag };

class Config {
 public:
  /// Throws ConfigError on a duplicate key within the same layer.
  void set(const std::string& key, const std::string& value, Layer layer);

  /// Parses "key=value".
  void set_argument(const std::string& kv);

  /// Reads a structured-text file:
  ///
  ///   # comment
  ///   dt: 1e-4            (applies to every subcommand)
  ///   [sphere-run]
  ///   m: 1
  ///
  /// Sections other than `section` are skipped, but their names must be in
  /// `known_sections`.
  void load_file(const std::filesystem::path& path, const std::string& section,
                 const std::vector<std::string>& known_sections);

  bool has(const std::string& key) const;

  double real(const std::string& key, double fallback, double lo, double hi);
  /// Like real() but with an open lower bound: value > lo.
  double positive(const std::string& key, double fallback, double hi = 1e300);
  int integer(const std::string& key, int fallback, int lo, int hi);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed);

  /// Throws ConfigError naming every key that was supplied but not read.
  void finish() const;

  /// "key = value" lines, sorted by key, of every value read (defaults
  /// included, as given or as resolved).
  std::string echo() const;
  std::uint64_t hash() const;

 private:
  struct Entry {
    std::string value;
    Layer layer;
  };
  const Entry* find(const std::string& key) const;
  std::string take(const std::string& key, const std::string& fallback);
  double number(const std::string& key, double fallback);

  std::map<std::string, std::vector<Entry>> supplied_;
  std::map<std::string, std::string> used_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

}  // namespace smc::cli
