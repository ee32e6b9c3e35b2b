#include "cmem/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmem/errors.hpp"

namespace cmem {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidInput("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string grid_header(const Grid2D& g) {
  const BBox& b = g.bbox();
  return std::to_string(g.nx()) + " " + std::to_string(g.ny()) + " " + fmt(b.xmin) + " " +
         fmt(b.xmax) + " " + fmt(b.ymin) + " " + fmt(b.ymax) + "\n";
}

std::string values_text(const Grid2D& g, std::span<const double> v) {
  std::string out = grid_header(g);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i > 0) out += ' ';
      out += fmt(v[g.index(i, j)]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> read_values(std::istream& in, const Grid2D& g, const std::string& path) {
  int nx = 0, ny = 0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  if (!(in >> nx >> ny >> xmin >> xmax >> ymin >> ymax)) {
    throw InvalidInput("'" + path + "' has no field header");
  }
  const BBox& b = g.bbox();
  if (nx != g.nx() || ny != g.ny() || xmin != b.xmin || xmax != b.xmax || ymin != b.ymin ||
      ymax != b.ymax) {
    throw InvalidInput("'" + path + "' was written on a different grid");
  }
  std::vector<double> v(g.size());
  for (double& x : v) {
    if (!(in >> x)) throw InvalidInput("'" + path + "' is truncated");
  }
  return v;
}

}  // namespace

std::string field_text(const ScalarField& field) { return values_text(field.grid(), field.values()); }

void write_field(const std::string& path, const ScalarField& field) {
  write_text(path, field_text(field));
}

ScalarField read_field(const std::string& path, const MaskPtr& mask) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  return ScalarField(mask, read_values(in, mask->grid(), path));
}

void write_eigenpair(const std::string& path, const EigenPair& pair) {
  write_text(path, "lambda residual iterations\n" + fmt(pair.lambda) + " " + fmt(pair.residual) +
                       " " + std::to_string(pair.iterations) + "\n" + field_text(pair.u));
}

void write_region(const std::string& path, const CellSet& region, const MaskPtr& mask) {
  write_text(path, values_text(mask->grid(), region.fraction));
}

CellSet read_region(const std::string& path, const MaskPtr& mask) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  return make_cell_set(*mask, read_values(in, mask->grid(), path));
}

std::pair<double, double> write_pgm(const std::string& path, const Grid2D& grid,
                                    const std::vector<double>& values) {
  if (values.size() != grid.size()) throw InvalidInput("raster size does not match its grid");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi > lo ? hi - lo : 1.0;
  std::string out = "P5\n" + std::to_string(grid.nx()) + " " + std::to_string(grid.ny()) + "\n255\n";
  // Top row first: image rows run from ymax down.
  for (int j = grid.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double t = (values[grid.index(i, j)] - lo) / span;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
    }
  }
  write_text(path, out);
  return {lo, hi};
}

std::string history_csv(const std::vector<IterationRecord>& history) {
  std::string out = "k,lambda,level,sym_diff,measure,eigen_iterations\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    const auto& h = history[k];
    out += std::to_string(k) + "," + fmt(h.lambda) + "," + fmt(h.level) + "," + fmt(h.sym_diff) +
           "," + fmt(h.measure) + "," + std::to_string(h.eigen_iterations) + "\n";
  }
  return out;
}

std::string curve_csv(const LambdaCurve& curve) {
  std::string out = "A,Lambda,c,iterations,flag_subcritical\n";
  for (const auto& s : curve.samples) {
    out += fmt(s.target) + "," + fmt(s.lambda) + "," + fmt(s.level) + "," +
           std::to_string(s.iterations) + "," + (s.subcritical ? "1" : "0") + "\n";
  }
  return out;
}

std::string checks_csv(const std::vector<CheckRow>& rows) {
  std::string out = "check,param,value,tolerance,pass\n";
  for (const auto& r : rows) {
    out += r.check + "," + r.param + "," + fmt(r.value) + "," + fmt(r.tolerance) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::string weiss_csv(const WeissProfile& profile) {
  std::string out = "r,W,e,W1,S,S_over_r2\n";
  for (const auto& s : profile.samples) {
    out += fmt(s.r) + "," + fmt(s.W) + "," + fmt(s.e) + "," + fmt(s.W1) + "," + fmt(s.S) + "," +
           fmt(s.S_over_r2) + "\n";
  }
  return out;
}

std::string blowup_csv(const BlowupSequence& seq) {
  std::string out = "r,T,a11,a12,a22,residual,harmonic_defect\n";
  for (const auto& l : seq.levels) {
    out += fmt(l.r) + "," + fmt(l.T) + "," + fmt(l.a11) + "," + fmt(l.a12) + "," + fmt(l.a22) +
           "," + fmt(l.residual) + "," + fmt(l.harmonic_defect) + "\n";
  }
  return out;
}

std::string contour_csv(const Contour& contour) {
  std::string out = "poly_id,x,y,grad_norm\n";
  for (std::size_t id = 0; id < contour.lines.size(); ++id) {
    const Polyline& line = contour.lines[id];
    for (std::size_t k = 0; k < line.points.size(); ++k) {
      const double gn = k < line.grad_norm.size() ? line.grad_norm[k] : 0.0;
      out += std::to_string(id) + "," + fmt(line.points[k].x) + "," + fmt(line.points[k].y) + "," +
             fmt(gn) + "\n";
    }
  }
  return out;
}

nlohmann::json manifest_base(const std::string& command, const std::string& config_hash) {
  nlohmann::json m;
  m["command"] = command;
  m["config_hash"] = config_hash;
  m["v_minus_convention"] = describe(SignConvention::standard);
  m["tolerances"] = nlohmann::json::object();
  m["rasters"] = nlohmann::json::object();
  m["files"] = nlohmann::json::array();
  return m;
}

void write_manifest(const std::string& dir, const nlohmann::json& manifest) {
  write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace cmem
