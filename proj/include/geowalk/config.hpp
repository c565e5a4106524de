#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "geowalk/convex_body.hpp"
#include "geowalk/errors.hpp"
#include "geowalk/walker.hpp"

namespace geowalk {

/// Configuration problem; `line` is 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Flat key-value file with [section] headers. '#' and ';' start comments.
///
///   [run]
///   mode = sample
///   manifold = sphere:2
///   body = cap:north:1.0471975511965976
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  double get_real(const std::string& section, const std::string& key,
                  std::optional<double> fallback = std::nullopt) const;
  long get_int(const std::string& section, const std::string& key,
               std::optional<long> fallback = std::nullopt) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  /// Keys present in the file that no getter asked about.
  std::vector<std::string> unused_keys() const;

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
  mutable std::map<std::string, bool> used_;
  std::string text_;
};

enum class RunMode { Sample, Anneal, Diagnose };

/// Built-in objective parsed from "distance_to:<pt>", "sqdist_to:<pt>" or
/// "linear:<vector>".
struct BuiltinTarget {
  std::string name;
  Objective f;
  double lipschitz = 1.0;
  // Analytic minimum over the body when known.
  std::optional<double> min_value;
};

BuiltinTarget parse_target(const ConvexBody& body, std::string_view spec);

/// Command-line values that take precedence over the file.
struct CliOverrides {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> output_dir;
  bool override_delta = false;
  std::optional<double> budget_constant;
  std::optional<int> trials;
  std::optional<double> epsilon;
  std::optional<double> fail_prob;
};

/// Executes the run described by the config file. Returns 0 on success,
/// 1 when a diagnostic check fails, 2 on configuration errors and 3 on
/// runtime errors (oracle failures and the like).
int run(const std::string& config_path, const CliOverrides& overrides, std::ostream& out,
        std::ostream& err);

/// Same as `run` with the config given as text.
int run_text(std::string_view config_text, const CliOverrides& overrides, std::ostream& out,
             std::ostream& err);

/// Human-readable list of manifolds, bodies, targets and checks.
std::string list_builtins();

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace geowalk
