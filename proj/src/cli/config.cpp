#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace statlim::cli {

namespace {

const json& empty_object() {
  static const json empty = json::object();
  return empty;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

bool is_count(const json& v) {
  if (v.is_number_unsigned()) return true;
  if (v.is_number_integer()) return v.get<std::int64_t>() >= 0;
  return false;
}

}  // namespace

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ConfigError(fmt::format("{}: top level must be a JSON object", path.string()));
    return j;
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(fmt::format("{}:{}:{}: JSON syntax error", path.string(), line, col));
  }
}

void apply_override(json& root, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("--set expects key=value, got '{}'", assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(fmt::format("--set: malformed key '{}'", key));
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError(fmt::format("--set: '{}' is not an object", key.substr(0, dot)));
    node = &child;
    start = dot + 1;
  }
}

Fields::Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw ConfigError(fmt::format("field `{}`: expected an object", path_));
}

std::string Fields::name(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

void Fields::fail(std::string_view key, std::string_view message) const {
  throw ConfigError(fmt::format("field `{}`: {}", name(key), message));
}

bool Fields::has(std::string_view key) const { return object_.contains(std::string(key)); }

const json* Fields::lookup(std::string_view key) {
  used_.emplace(key);
  const auto it = object_.find(std::string(key));
  if (it == object_.end() || it->is_null()) return nullptr;
  return &*it;
}

double Fields::number(std::string_view key, std::optional<double> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  if (!v->is_number()) fail(key, "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

std::optional<double> Fields::optional_number(std::string_view key) {
  if (!lookup(key)) return std::nullopt;
  return number(key);
}

double Fields::nonnegative(std::string_view key, std::optional<double> fallback) {
  const double x = number(key, fallback);
  if (x < 0.0) fail(key, "must be >= 0");
  return x;
}

double Fields::positive(std::string_view key, std::optional<double> fallback) {
  const double x = number(key, fallback);
  if (!(x > 0.0)) fail(key, "must be > 0");
  return x;
}

std::size_t Fields::count(std::string_view key, std::optional<std::size_t> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  if (!is_count(*v)) fail(key, "expected a nonnegative integer");
  return v->get<std::size_t>();
}

std::size_t Fields::positive_count(std::string_view key, std::optional<std::size_t> fallback) {
  const std::size_t x = count(key, fallback);
  if (x == 0) fail(key, "must be a positive integer");
  return x;
}

std::optional<std::size_t> Fields::optional_count(std::string_view key) {
  if (!lookup(key)) return std::nullopt;
  return count(key);
}

std::uint64_t Fields::seed(std::string_view key, std::uint64_t fallback) {
  const json* v = lookup(key);
  if (!v) return fallback;
  if (!is_count(*v)) fail(key, "expected a nonnegative integer seed");
  return v->get<std::uint64_t>();
}

bool Fields::flag(std::string_view key, bool fallback) {
  const json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(key, "expected true or false");
  return v->get<bool>();
}

std::string Fields::text(std::string_view key, std::optional<std::string> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  if (!v->is_string()) fail(key, "expected a string");
  return v->get<std::string>();
}

std::optional<std::string> Fields::optional_text(std::string_view key) {
  if (!lookup(key)) return std::nullopt;
  return text(key);
}

std::vector<double> Fields::numbers(std::string_view key, std::optional<std::vector<double>> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  std::vector<double> out;
  if (v->is_number()) {
    out.push_back(v->get<double>());
  } else if (v->is_array()) {
    for (const json& e : *v) {
      if (!e.is_number()) fail(key, "expected numbers");
      out.push_back(e.get<double>());
    }
  } else {
    fail(key, "expected a number or an array of numbers");
  }
  if (out.empty()) fail(key, "must not be empty");
  return out;
}

std::vector<std::size_t> Fields::positive_counts(std::string_view key, std::optional<std::vector<std::size_t>> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  std::vector<std::size_t> out;
  auto push = [&](const json& e) {
    if (!is_count(e) || e.get<std::size_t>() == 0) fail(key, "expected positive integers");
    out.push_back(e.get<std::size_t>());
  };
  if (v->is_array()) {
    for (const json& e : *v) push(e);
  } else {
    push(*v);
  }
  if (out.empty()) fail(key, "must not be empty");
  return out;
}

std::vector<std::string> Fields::texts(std::string_view key, std::optional<std::vector<std::string>> fallback) {
  const json* v = lookup(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(key, "is required");
  }
  std::vector<std::string> out;
  if (v->is_string()) {
    out.push_back(v->get<std::string>());
  } else if (v->is_array()) {
    for (const json& e : *v) {
      if (!e.is_string()) fail(key, "expected strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    fail(key, "expected a string or an array of strings");
  }
  if (out.empty()) fail(key, "must not be empty");
  return out;
}

Fields Fields::object(std::string_view key) {
  const json* v = lookup(key);
  if (!v) return Fields(empty_object(), name(key));
  if (!v->is_object()) fail(key, "expected an object");
  return Fields(*v, name(key));
}

void Fields::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!used_.contains(key)) throw ConfigError(fmt::format("unknown field `{}`", name(key)));
  }
}

}  // namespace statlim::cli
