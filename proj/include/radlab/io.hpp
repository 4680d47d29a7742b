#pragma once

#include "radlab/ergodic.hpp"
#include "radlab/errors.hpp"
#include "radlab/radii.hpp"
#include "radlab/systems.hpp"
#include "radlab/version.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace radlab {

/// Formats a double with 17 significant digits (lossless round trip).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Minimal TOML subset: `key = value` lines, # comments, strings, numbers,
// booleans, and (nested) arrays on a single line. Enough for system configs.
// ---------------------------------------------------------------------------

struct TomlValue {
  enum class Type { Number, String, Bool, Array };
  Type type{Type::Number};
  double number{0};
  std::string str;
  bool boolean{false};
  std::vector<TomlValue> array;
};

namespace detail {

inline void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline TomlValue parse_toml_value(const std::string& s, std::size_t& i);

inline TomlValue parse_toml_array(const std::string& s, std::size_t& i) {
  TomlValue v;
  v.type = TomlValue::Type::Array;
  ++i;  // '['
  skip_ws(s, i);
  if (i < s.size() && s[i] == ']') {
    ++i;
    return v;
  }
  while (true) {
    v.array.push_back(parse_toml_value(s, i));
    skip_ws(s, i);
    if (i >= s.size()) throw config_error("unterminated array in config");
    if (s[i] == ',') {
      ++i;
      skip_ws(s, i);
      continue;
    }
    if (s[i] == ']') {
      ++i;
      return v;
    }
    throw config_error("malformed array in config");
  }
}

inline TomlValue parse_toml_value(const std::string& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw config_error("missing value in config");
  if (s[i] == '[') return parse_toml_array(s, i);
  if (s[i] == '"') {
    TomlValue v;
    v.type = TomlValue::Type::String;
    ++i;
    while (i < s.size() && s[i] != '"') v.str.push_back(s[i++]);
    if (i >= s.size()) throw config_error("unterminated string in config");
    ++i;
    return v;
  }
  std::size_t j = i;
  while (j < s.size() && s[j] != ',' && s[j] != ']' && s[j] != '#') ++j;
  std::string tok = s.substr(i, j - i);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
  i = j;
  if (tok == "true" || tok == "false") {
    TomlValue v;
    v.type = TomlValue::Type::Bool;
    v.boolean = tok == "true";
    return v;
  }
  try {
    std::size_t used = 0;
    TomlValue v;
    v.number = std::stod(tok, &used);
    if (used != tok.size()) throw config_error("trailing characters after number: " + tok);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse config value: " + tok);
  }
}

}  // namespace detail

inline std::map<std::string, TomlValue> parse_toml(std::istream& in) {
  std::map<std::string, TomlValue> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside strings.
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '#' && !in_str) {
        line = line.substr(0, i);
        break;
      }
    }
    std::size_t i = 0;
    detail::skip_ws(line, i);
    if (i >= line.size() || line[i] == '\r') continue;
    const std::size_t eq = line.find('=', i);
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) + " has no '='");
    std::string key = line.substr(i, eq - i);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) throw config_error("config line " + std::to_string(lineno) + " has no key");
    std::size_t vi = eq + 1;
    out[key] = detail::parse_toml_value(line, vi);
  }
  return out;
}

/// Loads a SystemSpec<double> from a TOML config. Recognized keys:
///   kind       "linear" | "shear" | "da"
///   matrix     [[a, b], [c, d]] with integer entries
///   eps        perturbation amplitude (shear, da)
///   da_center  [x, y]                     (da only)
///   da_radius  bump support radius        (da only)
inline SystemSpec<double> load_system_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  auto kv = parse_toml(in);

  const auto take = [&](const char* key) -> TomlValue {
    auto it = kv.find(key);
    if (it == kv.end()) throw config_error(std::string("config missing key: ") + key);
    TomlValue v = it->second;
    kv.erase(it);
    return v;
  };
  const auto take_opt = [&](const char* key) -> std::unique_ptr<TomlValue> {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    auto v = std::make_unique<TomlValue>(it->second);
    kv.erase(it);
    return v;
  };

  const TomlValue kind_v = take("kind");
  if (kind_v.type != TomlValue::Type::String) throw config_error("kind must be a string");
  const TomlValue mat_v = take("matrix");
  if (mat_v.type != TomlValue::Type::Array || mat_v.array.size() != 2)
    throw config_error("matrix must be a 2x2 array");
  IntMat2 m;
  for (int r = 0; r < 2; ++r) {
    const auto& row = mat_v.array[static_cast<std::size_t>(r)];
    if (row.type != TomlValue::Type::Array || row.array.size() != 2)
      throw config_error("matrix must be a 2x2 array");
    for (int c = 0; c < 2; ++c) {
      const double e = row.array[static_cast<std::size_t>(c)].number;
      const auto ie = static_cast<std::int64_t>(e);
      if (static_cast<double>(ie) != e) throw config_error("matrix entries must be integers");
      m(r, c) = ie;
    }
  }

  SystemSpec<double> spec;
  const std::string kind = kind_v.str;
  if (kind == "linear") {
    spec = SystemSpec<double>::linear(m);
  } else if (kind == "shear" || kind == "shear_perturbed") {
    const auto eps = take("eps");
    spec = SystemSpec<double>::shear_perturbed(m, eps.number);
  } else if (kind == "da" || kind == "derived_from_anosov") {
    const auto eps = take("eps");
    const auto radius = take("da_radius");
    TorusPoint<double> center{0, 0};
    if (auto c = take_opt("da_center")) {
      if (c->type != TomlValue::Type::Array || c->array.size() != 2)
        throw config_error("da_center must be [x, y]");
      center = TorusPoint<double>::wrapped(c->array[0].number, c->array[1].number);
    }
    spec = SystemSpec<double>::derived_from_anosov(m, eps.number, center, radius.number);
  } else {
    throw config_error("unknown system kind: " + kind);
  }
  if (!kv.empty()) throw config_error("unknown config key: " + kv.begin()->first);
  return spec;
}

/// One-line summary of a spec, echoed into output headers.
inline std::string describe(const SystemSpec<double>& spec) {
  std::ostringstream os;
  os << "kind=" << to_string(spec.kind) << " matrix=[[" << spec.matrix(0, 0) << ","
     << spec.matrix(0, 1) << "],[" << spec.matrix(1, 0) << "," << spec.matrix(1, 1) << "]]";
  if (spec.kind != SystemKind::Linear) os << " eps=" << fmt17(spec.eps);
  if (spec.kind == SystemKind::DerivedFromAnosov)
    os << " da_center=[" << fmt17(spec.da_center.x) << "," << fmt17(spec.da_center.y)
       << "] da_radius=" << fmt17(spec.da_radius);
  return os.str();
}

// ---------------------------------------------------------------------------
// Region descriptors: "ball:cx,cy,r" or "grid-indicator:path".
// ---------------------------------------------------------------------------

/// Writes a node-indicator grid as CSV (reload with load_region_grid).
inline void write_region_grid(std::ostream& os, const Region<double>& region,
                              const std::string& config_echo) {
  if (region.kind() != Region<double>::Kind::Grid)
    throw config_error("only grid regions serialize to CSV");
  os << "# " << kArtifactName << " " << kArtifactVersion << "\n";
  os << "# " << config_echo << "\n";
  os << "# grid_n=" << region.grid_n() << "\n";
  os << "i,j,x,y,inside\n";
  const int n = region.grid_n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      os << i << "," << j << "," << fmt17(static_cast<double>(i) / n) << ","
         << fmt17(static_cast<double>(j) / n) << ","
         << int(region.indicator()[static_cast<std::size_t>(i) * n + j]) << "\n";
}

inline Region<double> load_region_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open region file: " + path);
  std::string line;
  int grid_n = -1;
  std::vector<std::uint8_t> inside;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("grid_n=");
      if (pos != std::string::npos) grid_n = std::atoi(line.c_str() + pos + 7);
      continue;
    }
    if (!header_seen) {  // column header row
      header_seen = true;
      if (grid_n <= 0) throw config_error("region file lacks a grid_n header");
      inside.assign(static_cast<std::size_t>(grid_n) * grid_n, 0);
      continue;
    }
    long i = 0, j = 0;
    double x = 0, y = 0;
    int flag = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf,%d", &i, &j, &x, &y, &flag) != 5)
      throw config_error("malformed region row: " + line);
    if (i < 0 || i >= grid_n || j < 0 || j >= grid_n) throw config_error("region index out of range");
    inside[static_cast<std::size_t>(i) * grid_n + j] = flag ? 1 : 0;
  }
  return Region<double>::grid(grid_n, std::move(inside));
}

inline Region<double> parse_region(const std::string& descriptor) {
  if (descriptor.rfind("ball:", 0) == 0) {
    double cx = 0, cy = 0, r = 0;
    if (std::sscanf(descriptor.c_str() + 5, "%lf,%lf,%lf", &cx, &cy, &r) != 3)
      throw config_error("malformed ball region (want ball:cx,cy,r): " + descriptor);
    return Region<double>::ball(TorusPoint<double>::wrapped(cx, cy), r);
  }
  if (descriptor.rfind("grid-indicator:", 0) == 0)
    return load_region_grid(descriptor.substr(15));
  throw config_error("unknown region descriptor: " + descriptor);
}

// ---------------------------------------------------------------------------
// Ordered JSON writer with 17-significant-digit floats. Non-finite values
// serialize as the strings "inf" / "-inf" / "nan".
// ---------------------------------------------------------------------------

class JsonWriter {
 public:
  JsonWriter& field(const std::string& key, double v) {
    if (std::isfinite(v))
      raw(key, fmt17(v));
    else
      raw(key, v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\""));
    return *this;
  }
  JsonWriter& field(const std::string& key, long v) { return raw(key, std::to_string(v)); }
  JsonWriter& field(const std::string& key, int v) { return raw(key, std::to_string(v)); }
  JsonWriter& field(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
  JsonWriter& field(const std::string& key, const std::string& v) {
    std::string esc;
    for (char c : v) {
      if (c == '"' || c == '\\') esc.push_back('\\');
      esc.push_back(c);
    }
    return raw(key, "\"" + esc + "\"");
  }
  JsonWriter& field(const std::string& key, const JsonWriter& nested) {
    return raw(key, nested.str());
  }

  std::string str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) out += ",";
      out += "\"" + items_[i].first + "\":" + items_[i].second;
    }
    out += "}";
    return out;
  }

 private:
  JsonWriter& raw(const std::string& key, const std::string& v) {
    items_.emplace_back(key, v);
    return *this;
  }
  std::vector<std::pair<std::string, std::string>> items_;
};

/// RadiusSequence CSV: columns k, r_k, m_k, log_r_k (m is empty on the last row).
inline void write_radius_sequence(std::ostream& os, const RadiusSequence<double>& seq,
                                  const std::string& config_echo) {
  os << "# " << kArtifactName << " " << kArtifactVersion << "\n";
  os << "# " << config_echo << "\n";
  os << "# mode=" << to_string(seq.mode) << " r0=" << fmt17(seq.r0)
     << " start=" << fmt17(seq.start.x) << "," << fmt17(seq.start.y)
     << " chart_clamp_from=" << seq.chart_clamp_from << "\n";
  os << "k,r_k,m_k,log_r_k\n";
  for (std::size_t k = 0; k < seq.r.size(); ++k) {
    os << k << "," << fmt17(seq.r[k]) << ",";
    if (k < seq.m.size()) os << fmt17(seq.m[k]);
    os << "," << fmt17(seq.log_r[k]) << "\n";
  }
}

}  // namespace radlab
