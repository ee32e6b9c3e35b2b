#pragma once

// Flat "key = value" run configuration with dotted section prefixes.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmem/errors.hpp"
#include "cmem/geometry.hpp"

namespace cmem {

/// Raised for unknown keys and out-of-range values; key() names the culprit.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  /// Every key the parser accepts.
  static const std::vector<std::string>& known_keys();

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key) const;
  std::vector<Point> get_points(const std::string& key) const;

  /// Sorted "key = value" lines; the config hash is taken over this text.
  std::string canonical() const;
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
};

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

DomainSpec domain_from_config(const Config& cfg);
MaskPtr mask_from_config(const Config& cfg);

/// problem.A, or problem.A_fraction times |Omega|; checked against (0, |Omega|).
double target_from_config(const Config& cfg, const DomainMask& mask);
/// problem.A_list, or problem.A_fraction_list times |Omega|.
std::vector<double> targets_from_config(const Config& cfg, const DomainMask& mask);

}  // namespace cmem
