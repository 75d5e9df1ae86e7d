#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "statlim/errors.hpp"

namespace statlim::cli {

using json = nlohmann::json;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Parses a JSON config file; syntax errors report line and column.
json load_config_file(const std::filesystem::path& path);

/// Applies `key=value` (dotted keys address nested objects). The value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_override(json& root, std::string_view assignment);

/// Strict typed view over one config object. Every accessor marks its key as
/// consumed; finish() rejects whatever was left over.
class Fields {
 public:
  Fields(const json& object, std::string path);

  bool has(std::string_view key) const;

  double number(std::string_view key, std::optional<double> fallback = std::nullopt);
  std::optional<double> optional_number(std::string_view key);
  double nonnegative(std::string_view key, std::optional<double> fallback = std::nullopt);
  double positive(std::string_view key, std::optional<double> fallback = std::nullopt);
  std::size_t count(std::string_view key, std::optional<std::size_t> fallback = std::nullopt);
  std::size_t positive_count(std::string_view key, std::optional<std::size_t> fallback = std::nullopt);
  std::optional<std::size_t> optional_count(std::string_view key);
  std::uint64_t seed(std::string_view key, std::uint64_t fallback = 0);
  bool flag(std::string_view key, bool fallback);
  std::string text(std::string_view key, std::optional<std::string> fallback = std::nullopt);
  std::optional<std::string> optional_text(std::string_view key);

  /// Scalar or array of numbers.
  std::vector<double> numbers(std::string_view key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<std::size_t> positive_counts(std::string_view key,
                                           std::optional<std::vector<std::size_t>> fallback = std::nullopt);
  std::vector<std::string> texts(std::string_view key, std::optional<std::vector<std::string>> fallback = std::nullopt);

  /// The raw value, or nullptr when absent or null.
  const json* raw(std::string_view key) { return lookup(key); }

  /// Nested object; an absent key yields an empty object.
  Fields object(std::string_view key);

  void finish() const;

  std::string name(std::string_view key) const;
  [[noreturn]] void fail(std::string_view key, std::string_view message) const;

 private:
  const json* lookup(std::string_view key);

  const json& object_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

}  // namespace statlim::cli
