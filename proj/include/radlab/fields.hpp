#pragma once

#include "radlab/errors.hpp"
#include "radlab/types.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

namespace radlab {

/// Scalar field sampled on a uniform node grid; evaluation snaps to the
/// nearest node. Used as the custom observable in return-sum checks.
struct GridField {
  int grid_n{0};
  std::vector<double> values;

  double at(const TorusPoint<double>& p) const {
    const int i = static_cast<int>(std::lround(p.x * grid_n)) % grid_n;
    const int j = static_cast<int>(std::lround(p.y * grid_n)) % grid_n;
    return values[static_cast<std::size_t>(i) * grid_n + j];
  }
};

inline GridField load_grid_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open field file: " + path);
  GridField f;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("grid_n=");
      if (pos != std::string::npos) f.grid_n = std::atoi(line.c_str() + pos + 7);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (f.grid_n <= 0) throw config_error("field file lacks a grid_n header");
      f.values.assign(static_cast<std::size_t>(f.grid_n) * f.grid_n, 0.0);
      continue;
    }
    long i = 0, j = 0;
    double x = 0, y = 0, v = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf,%lf", &i, &j, &x, &y, &v) != 5)
      throw config_error("malformed field row: " + line);
    if (i < 0 || i >= f.grid_n || j < 0 || j >= f.grid_n)
      throw config_error("field index out of range");
    f.values[static_cast<std::size_t>(i) * f.grid_n + j] = v;
  }
  return f;
}

}  // namespace radlab
