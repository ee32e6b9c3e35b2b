#include "cmem/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cmem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  if (text.empty() || text[0] == '-') throw ConfigError(key, "expected an unsigned integer");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) {
    throw ConfigError(key, "expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : InvalidInput(key + ": " + what), key_(key) {}

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "domain.shape",        "domain.center",         "domain.radius",
      "domain.semi_axes",    "domain.box",            "domain.half_length",
      "domain.vertices",     "domain.axes",           "grid.n",
      "grid.margin",         "grid.subsamples",       "problem.alpha",
      "problem.A",           "problem.A_fraction",    "problem.A_list",
      "problem.A_fraction_list",                      "optimizer.init",
      "optimizer.seed",      "optimizer.tol",         "optimizer.max_iter",
      "optimizer.damping",   "eigen.tol",             "eigen.max_outer",
      "eigen.max_cg",        "diagnostics.seeds",     "diagnostics.tau",
      "diagnostics.eps_list", "diagnostics.x0_list",  "diagnostics.uniqueness_tol",
      "diagnostics.probe_step", "weiss.gamma",        "weiss.tol",
      "weiss.mode",          "weiss.r_min_cells",     "weiss.r_max_cells",
      "weiss.count",         "weiss.centers",         "weiss.max_centers",
      "weiss.band_cells",    "blowup.radii_cells",    "blowup.centers",
      "blowup.tau",          "exact.kind",            "exact.f0",
      "exact.g0",            "exact.a",               "exact.nodes",
      "exact.radii",         "output.pgm",            "runtime.threads"};
  return keys;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (cfg.has(key)) throw ConfigError(key, "duplicate key");
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError(key, "unknown key");
  }
  values_[key] = value;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(key, values_.at(key)) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = to_double(key, values_.at(key));
  if (v != static_cast<int>(v)) throw ConfigError(key, "expected an integer");
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? to_u64(key, values_.at(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& t : tokens(get(key, ""))) out.push_back(to_double(key, t));
  return out;
}

std::vector<std::uint64_t> Config::get_u64s(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& t : tokens(get(key, ""))) out.push_back(to_u64(key, t));
  return out;
}

std::vector<Point> Config::get_points(const std::string& key) const {
  const auto v = get_doubles(key);
  if (v.size() % 2 != 0) throw ConfigError(key, "expected pairs of coordinates");
  std::vector<Point> out;
  for (std::size_t i = 0; i < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

Point point_key(const Config& cfg, const std::string& key, Point fallback) {
  if (!cfg.has(key)) return fallback;
  const auto p = cfg.get_points(key);
  if (p.size() != 1) throw ConfigError(key, "expected one point 'x y'");
  return p[0];
}

double positive_key(const Config& cfg, const std::string& key, double fallback) {
  const double v = cfg.get_double(key, fallback);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

}  // namespace

DomainSpec domain_from_config(const Config& cfg) {
  const std::string shape = cfg.get("domain.shape", "disk");
  const int axes = cfg.get_int("domain.axes", shape == "polygon" ? 0 : 2);
  const Point c = point_key(cfg, "domain.center", {0.0, 0.0});
  try {
    if (shape == "disk") return DomainSpec::disk(c, positive_key(cfg, "domain.radius", 1.0), axes);
    if (shape == "ellipse") {
      const auto ab = cfg.has("domain.semi_axes") ? cfg.get_doubles("domain.semi_axes")
                                                  : std::vector<double>{1.0, 0.5};
      if (ab.size() != 2) throw ConfigError("domain.semi_axes", "expected 'a b'");
      return DomainSpec::ellipse(c, ab[0], ab[1], axes);
    }
    if (shape == "rectangle") {
      const auto b = cfg.has("domain.box") ? cfg.get_doubles("domain.box")
                                           : std::vector<double>{0.0, 1.0, 0.0, 1.0};
      if (b.size() != 4) throw ConfigError("domain.box", "expected 'xmin xmax ymin ymax'");
      return DomainSpec::rectangle({b[0], b[1], b[2], b[3]}, axes);
    }
    if (shape == "stadium") {
      return DomainSpec::stadium(c, cfg.get_double("domain.half_length", 0.5),
                                 positive_key(cfg, "domain.radius", 0.5), axes);
    }
    if (shape == "polygon") return DomainSpec::polygon(cfg.get_points("domain.vertices"), axes);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError("domain." + std::string(shape == "polygon" ? "vertices" : "shape"), e.what());
  }
  throw ConfigError("domain.shape", "unknown shape '" + shape + "'");
}

MaskPtr mask_from_config(const Config& cfg) {
  const DomainSpec spec = domain_from_config(cfg);
  const int n = cfg.get_int("grid.n", 256);
  if (n < 8) throw ConfigError("grid.n", "must be at least 8");
  const int margin = cfg.get_int("grid.margin", 2);
  if (margin < 0) throw ConfigError("grid.margin", "must be nonnegative");
  const int sub = cfg.get_int("grid.subsamples", 4);
  if (sub < 4) throw ConfigError("grid.subsamples", "must be at least 4");
  return rasterize_domain(spec, grid_around(spec.bounds(), n, margin), sub);
}

namespace {

double checked_target(const std::string& key, double a, const DomainMask& mask) {
  if (!(a > 0.0 && a < mask.measure())) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "target %.17g must lie in (0, |Omega|) = (0, %.17g)", a,
                  mask.measure());
    throw ConfigError(key, buf);
  }
  return a;
}

}  // namespace

double target_from_config(const Config& cfg, const DomainMask& mask) {
  if (cfg.has("problem.A") && cfg.has("problem.A_fraction")) {
    throw ConfigError("problem.A_fraction", "give either problem.A or problem.A_fraction");
  }
  if (cfg.has("problem.A")) {
    return checked_target("problem.A", cfg.get_double("problem.A", 0.0), mask);
  }
  const double frac = cfg.get_double("problem.A_fraction", 0.5);
  return checked_target("problem.A_fraction", frac * mask.measure(), mask);
}

std::vector<double> targets_from_config(const Config& cfg, const DomainMask& mask) {
  std::vector<double> out;
  if (cfg.has("problem.A_list")) {
    for (double a : cfg.get_doubles("problem.A_list")) {
      out.push_back(checked_target("problem.A_list", a, mask));
    }
  } else if (cfg.has("problem.A_fraction_list")) {
    for (double f : cfg.get_doubles("problem.A_fraction_list")) {
      out.push_back(checked_target("problem.A_fraction_list", f * mask.measure(), mask));
    }
  } else {
    throw ConfigError("problem.A_list", "sweep needs problem.A_list or problem.A_fraction_list");
  }
  if (out.empty()) throw ConfigError("problem.A_list", "empty list");
  return out;
}

}  // namespace cmem
