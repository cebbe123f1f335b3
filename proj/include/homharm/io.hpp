#pragma once

// On-disk formats: the JSON field file, its CSV flattening, JSON forms of the
// spectral, kernel, activation and grid types, and XYZ position import.

#include "homharm/field_types.hpp"
#include "homharm/nonlin.hpp"
#include "homharm/quadrature.hpp"
#include "homharm/se_kernels.hpp"
#include "homharm/spectral_conv.hpp"
#include "homharm/transforms.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace homharm {

using json = nlohmann::json;

/// Malformed content; the message names the line or field.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kFieldFormatVersion = 1;

/// Samples in [channel][node][dim] order. Nodes follow the quadrature grid
/// ordering for S2 and SO3, and the positions rows for R3points.
struct FieldFile {
  std::string space = "S2";  // S2 | SO3 | R3points
  int bandwidth = 0;          // 0 for R3points
  std::vector<int> field_orders;
  int channels = 1;
  int dim = 1;
  std::vector<cd> data;
  Eigen::MatrixX3d positions;

  std::size_t nodes() const {
    if (space == "R3points") return static_cast<std::size_t>(positions.rows());
    const std::size_t n = 2 * static_cast<std::size_t>(bandwidth);
    return space == "S2" ? n * n : n * n * n;
  }

  cd& at(int c, std::size_t node, int d) {
    return data[(static_cast<std::size_t>(c) * nodes() + node) * dim + d];
  }
  const cd& at(int c, std::size_t node, int d) const {
    return data[(static_cast<std::size_t>(c) * nodes() + node) * dim + d];
  }

  void validate() const {
    if (space != "S2" && space != "SO3" && space != "R3points")
      throw FormatError("field 'space': expected S2, SO3 or R3points, got '" + space + "'");
    if (space != "R3points" && bandwidth < 1)
      throw FormatError("field 'bandwidth': must be >= 1 for space " + space);
    if (channels < 1) throw FormatError("field 'channels': must be >= 1");
    if (dim < 1) throw FormatError("field 'data': value dimension must be >= 1");
    if (data.size() != static_cast<std::size_t>(channels) * nodes() * dim)
      throw FormatError("field 'data': expected " + std::to_string(channels) + " x " +
                        std::to_string(nodes()) + " x " + std::to_string(dim) + " values, got " +
                        std::to_string(data.size()));
  }

  bool operator==(const FieldFile& o) const {
    return space == o.space && bandwidth == o.bandwidth && field_orders == o.field_orders &&
           channels == o.channels && dim == o.dim && data == o.data &&
           positions.rows() == o.positions.rows() && positions == o.positions;
  }
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

/// Parse with line/column diagnostics.
inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw FormatError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON");
  }
}

inline const json& member(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(where + ": missing field '" + key + "'");
  return *it;
}

inline int get_int(const json& j, const std::string& key, const std::string& where) {
  const json& v = member(j, key, where);
  if (!v.is_number_integer()) throw FormatError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where + ": expected a number");
  return j.get<double>();
}

inline json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError(where + ": expected an [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline const json& array_of(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array");
  if (j.size() != n)
    throw FormatError(where + ": expected " + std::to_string(n) + " entries, got " +
                      std::to_string(j.size()));
  return j;
}

inline json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXcd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols,
                                    const std::string& where) {
  Eigen::MatrixXcd m(rows, cols);
  array_of(j, rows, where);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string wr = where + "[" + std::to_string(r) + "]";
    array_of(j[r], cols, wr);
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = complex_from(j[r][c], wr + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline json real_matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd real_matrix_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? (j[0].is_array() ? j[0].size() : 0) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string wr = where + "[" + std::to_string(r) + "]";
    array_of(j[r], cols, wr);
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = get_real(j[r][c], wr + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Field files

inline json to_json(const FieldFile& f) {
  f.validate();
  json j;
  j["format_version"] = kFieldFormatVersion;
  j["space"] = f.space;
  j["bandwidth"] = f.bandwidth;
  j["field_orders"] = f.field_orders;
  j["channels"] = f.channels;
  json data = json::array();
  for (int c = 0; c < f.channels; ++c) {
    json per_node = json::array();
    for (std::size_t n = 0; n < f.nodes(); ++n) {
      json vals = json::array();
      for (int d = 0; d < f.dim; ++d) vals.push_back(detail::complex_json(f.at(c, n, d)));
      per_node.push_back(std::move(vals));
    }
    data.push_back(std::move(per_node));
  }
  j["data"] = std::move(data);
  if (f.space == "R3points") {
    json pos = json::array();
    for (Eigen::Index i = 0; i < f.positions.rows(); ++i)
      pos.push_back({f.positions(i, 0), f.positions(i, 1), f.positions(i, 2)});
    j["positions"] = std::move(pos);
  }
  return j;
}

inline FieldFile field_file_from_json(const json& j) {
  const std::string top = "field file";
  const int version = detail::get_int(j, "format_version", top);
  if (version != kFieldFormatVersion)
    throw FormatError("field 'format_version': unsupported version " + std::to_string(version) +
                      " (this reader understands version 1)");
  FieldFile f;
  const json& space = detail::member(j, "space", top);
  if (!space.is_string()) throw FormatError("field 'space': must be a string");
  f.space = space.get<std::string>();
  f.bandwidth = detail::get_int(j, "bandwidth", top);
  f.channels = detail::get_int(j, "channels", top);
  const json& orders = detail::member(j, "field_orders", top);
  if (!orders.is_array()) throw FormatError("field 'field_orders': must be an array");
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (!orders[i].is_number_integer())
      throw FormatError("field 'field_orders[" + std::to_string(i) + "]': must be an integer");
    f.field_orders.push_back(orders[i].get<int>());
  }
  if (f.space == "R3points") {
    const json& pos = detail::member(j, "positions", top);
    if (!pos.is_array()) throw FormatError("field 'positions': must be an array");
    f.positions.resize(static_cast<Eigen::Index>(pos.size()), 3);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const std::string w = "field 'positions[" + std::to_string(i) + "]'";
      detail::array_of(pos[i], 3, w);
      for (int k = 0; k < 3; ++k) f.positions(i, k) = detail::get_real(pos[i][k], w);
    }
  }
  if (f.space != "S2" && f.space != "SO3" && f.space != "R3points")
    throw FormatError("field 'space': expected S2, SO3 or R3points, got '" + f.space + "'");
  if (f.space != "R3points" && f.bandwidth < 1)
    throw FormatError("field 'bandwidth': must be >= 1 for space " + f.space);
  if (f.channels < 1) throw FormatError("field 'channels': must be >= 1");
  const json& data = detail::member(j, "data", top);
  detail::array_of(data, f.channels, "field 'data'");
  const std::size_t nodes = f.nodes();
  f.dim = 0;
  for (int c = 0; c < f.channels; ++c) {
    const std::string wc = "field 'data[" + std::to_string(c) + "]'";
    detail::array_of(data[c], nodes, wc);
    for (std::size_t n = 0; n < nodes; ++n) {
      const json& vals = data[c][n];
      const std::string wn = "field 'data[" + std::to_string(c) + "][" + std::to_string(n) + "]'";
      if (!vals.is_array() || vals.empty()) throw FormatError(wn + ": expected a non-empty array");
      if (f.dim == 0) f.dim = static_cast<int>(vals.size());
      detail::array_of(vals, f.dim, wn);
      for (int d = 0; d < f.dim; ++d)
        f.data.push_back(detail::complex_from(
            vals[d], "field 'data[" + std::to_string(c) + "][" + std::to_string(n) + "][" +
                         std::to_string(d) + "]'"));
    }
  }
  if (f.dim == 0) f.dim = 1;
  f.validate();
  return f;
}

inline FieldFile read_field_json(const std::string& path) {
  return field_file_from_json(detail::parse_json(detail::read_text(path), path));
}

inline void write_field_json(const FieldFile& f, const std::string& path) {
  detail::write_text(path, to_json(f).dump(1) + "\n");
}

/// CSV flattening: `#key=value` metadata lines, a header, then one row per
/// (channel, node, dim) with the node coordinates (alpha, beta, gamma on the
/// grids, x, y, z for points).
inline std::string field_to_csv(const FieldFile& f) {
  f.validate();
  std::string out;
  out += "#format_version=" + std::to_string(kFieldFormatVersion) + "\n";
  out += "#space=" + f.space + "\n";
  out += "#bandwidth=" + std::to_string(f.bandwidth) + "\n";
  out += "#field_orders=";
  for (std::size_t i = 0; i < f.field_orders.size(); ++i)
    out += (i ? ";" : "") + std::to_string(f.field_orders[i]);
  out += "\n#channels=" + std::to_string(f.channels) + "\n";
  out += "#dim=" + std::to_string(f.dim) + "\n";
  out += "channel,node,dim,c0,c1,c2,re,im\n";
  QuadratureGrid grid;
  if (f.space != "R3points") grid = quadrature_grid(space_from_string(f.space), f.bandwidth);
  for (int c = 0; c < f.channels; ++c)
    for (std::size_t n = 0; n < f.nodes(); ++n) {
      std::array<double, 3> x{};
      if (f.space == "R3points")
        x = {f.positions(n, 0), f.positions(n, 1), f.positions(n, 2)};
      else
        x = grid.nodes[n];
      for (int d = 0; d < f.dim; ++d) {
        const cd v = f.at(c, n, d);
        out += std::to_string(c) + "," + std::to_string(n) + "," + std::to_string(d) + "," +
               detail::format_double(x[0]) + "," + detail::format_double(x[1]) + "," +
               detail::format_double(x[2]) + "," + detail::format_double(v.real()) + "," +
               detail::format_double(v.imag()) + "\n";
      }
    }
  return out;
}

namespace detail {

inline double csv_number(const std::string& s, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ", field '" + column +
                      "': not a number: '" + s + "'");
  }
}

inline long csv_integer(const std::string& s, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ", field '" + column +
                      "': not an integer: '" + s + "'");
  }
}

}  // namespace detail

inline FieldFile field_from_csv(const std::string& text) {
  static const char* kColumns[] = {"channel", "node", "dim", "c0", "c1", "c2", "re", "im"};
  FieldFile f;
  f.bandwidth = -1;
  bool have_version = false, header = false;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw FormatError("line " + std::to_string(lineno) + ": metadata needs key=value");
      const std::string key = line.substr(1, eq - 1), val = line.substr(eq + 1);
      if (key == "format_version") {
        const long v = detail::csv_integer(val, lineno, "format_version");
        if (v != kFieldFormatVersion)
          throw FormatError("line " + std::to_string(lineno) +
                            ", field 'format_version': unsupported version " + val +
                            " (this reader understands version 1)");
        have_version = true;
      } else if (key == "space") {
        f.space = val;
      } else if (key == "bandwidth") {
        f.bandwidth = static_cast<int>(detail::csv_integer(val, lineno, "bandwidth"));
      } else if (key == "channels") {
        f.channels = static_cast<int>(detail::csv_integer(val, lineno, "channels"));
      } else if (key == "dim") {
        f.dim = static_cast<int>(detail::csv_integer(val, lineno, "dim"));
      } else if (key == "field_orders") {
        std::istringstream os(val);
        std::string tok;
        while (std::getline(os, tok, ';'))
          f.field_orders.push_back(static_cast<int>(detail::csv_integer(tok, lineno, "field_orders")));
      } else {
        throw FormatError("line " + std::to_string(lineno) + ": unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (!header) {
      if (line != "channel,node,dim,c0,c1,c2,re,im")
        throw FormatError("line " + std::to_string(lineno) +
                          ": expected header 'channel,node,dim,c0,c1,c2,re,im'");
      if (!have_version) throw FormatError("line " + std::to_string(lineno) +
                                           ": missing '#format_version' before the header");
      if (f.bandwidth < 0) throw FormatError("line " + std::to_string(lineno) +
                                             ": missing '#bandwidth' before the header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw FormatError("line " + std::to_string(lineno) + ": expected 8 fields, got " +
                        std::to_string(cells.size()));
    const long c = detail::csv_integer(cells[0], lineno, kColumns[0]);
    const long n = detail::csv_integer(cells[1], lineno, kColumns[1]);
    const long d = detail::csv_integer(cells[2], lineno, kColumns[2]);
    const std::size_t flat = expected++;
    if (f.space == "R3points") {
      // positions come from the rows of channel 0, dim 0, in node order
      if (c == 0 && d == 0) {
        if (n != f.positions.rows())
          throw FormatError("line " + std::to_string(lineno) + ", field 'node': out of order");
        f.positions.conservativeResize(n + 1, 3);
        for (int k = 0; k < 3; ++k) f.positions(n, k) = detail::csv_number(cells[3 + k], lineno, kColumns[3 + k]);
      }
    } else {
      const std::size_t nodes = f.nodes();
      const std::size_t want = flat;
      const std::size_t got = (static_cast<std::size_t>(c) * nodes + n) * f.dim + d;
      if (c < 0 || n < 0 || d < 0 || d >= f.dim || static_cast<std::size_t>(n) >= nodes || got != want)
        throw FormatError("line " + std::to_string(lineno) + ": row (" + cells[0] + "," + cells[1] +
                          "," + cells[2] + ") out of order");
    }
    f.data.emplace_back(detail::csv_number(cells[6], lineno, kColumns[6]),
                        detail::csv_number(cells[7], lineno, kColumns[7]));
  }
  if (!header) throw FormatError("line " + std::to_string(lineno) + ": missing CSV header");
  if (f.space == "R3points") f.bandwidth = std::max(f.bandwidth, 0);
  f.validate();
  return f;
}

inline FieldFile read_field_csv(const std::string& path) {
  try {
    return field_from_csv(detail::read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_field_csv(const FieldFile& f, const std::string& path) {
  detail::write_text(path, field_to_csv(f));
}

/// Direction chosen by extension: .json -> .csv or .csv -> .json.
inline void convert_field(const std::string& in_path, const std::string& out_path) {
  auto ext = [](const std::string& p) {
    const auto dot = p.rfind('.');
    return dot == std::string::npos ? std::string{} : p.substr(dot);
  };
  const std::string ei = ext(in_path), eo = ext(out_path);
  FieldFile f;
  if (ei == ".json") f = read_field_json(in_path);
  else if (ei == ".csv") f = read_field_csv(in_path);
  else throw std::invalid_argument("convert: input must end in .json or .csv");
  if (eo == ".json") write_field_json(f, out_path);
  else if (eo == ".csv") write_field_csv(f, out_path);
  else throw std::invalid_argument("convert: output must end in .json or .csv");
}

/// Nonzero CG coefficients with all degrees <= lmax, as l1,m1,l2,m2,l,m,value rows.
inline std::string cg_table_csv(int lmax) {
  if (lmax < 0) throw std::invalid_argument("cg_table_csv: lmax must be nonnegative");
  std::string out = "l1,m1,l2,m2,l,m,value\n";
  for (int l1 = 0; l1 <= lmax; ++l1)
    for (int l2 = 0; l2 <= lmax; ++l2)
      for (int l = std::abs(l1 - l2); l <= std::min(l1 + l2, lmax); ++l)
        for (int m1 = -l1; m1 <= l1; ++m1)
          for (int m2 = -l2; m2 <= l2; ++m2) {
            const int m = m1 + m2;
            if (std::abs(m) > l) continue;
            const double v = clebsch_gordan(l1, m1, l2, m2, l, m);
            if (v == 0.0) continue;
            for (int x : {l1, m1, l2, m2, l, m}) out += std::to_string(x) + ',';
            out += detail::format_double(v) + '\n';
          }
  return out;
}

inline void write_cg_table_csv(int lmax, const std::string& path) {
  detail::write_text(path, cg_table_csv(lmax));
}

// Typed views.

inline FieldFile to_field_file(const TensorField& t) {
  t.validate();
  if (t.type.stabilizer != Stabilizer::SO2 || t.grid.space != Space::S2)
    throw std::invalid_argument("to_field_file: only SO(2) fields on S2 are stored as field files");
  return {"S2", t.grid.bandwidth, {t.type.order}, t.channels, t.dim(), t.samples, {}};
}

inline TensorField to_tensor_field(const FieldFile& f) {
  f.validate();
  if (f.space != "S2") throw FormatError("field 'space': expected S2 for a tensor field");
  if (f.field_orders.size() != 1 || f.dim != 1)
    throw FormatError("field 'field_orders': an S2 field carries exactly one order");
  TensorField t = TensorField::zeros(quadrature_grid(Space::S2, f.bandwidth),
                                     FieldType::so2(f.field_orders[0]), f.channels);
  t.samples = f.data;
  return t;
}

inline FieldFile to_field_file(const GroupFunction& g) {
  if (g.grid.space != Space::SO3)
    throw std::invalid_argument("to_field_file: group functions live on the SO3 grid");
  return {"SO3", g.grid.bandwidth, {}, g.channels, g.value_dim, g.samples, {}};
}

inline GroupFunction to_group_function(const FieldFile& f) {
  f.validate();
  if (f.space != "SO3") throw FormatError("field 'space': expected SO3 for a group function");
  GroupFunction g = GroupFunction::zeros(quadrature_grid(Space::SO3, f.bandwidth), f.channels, f.dim);
  g.samples = f.data;
  return g;
}

/// Real point features flattened per point over degrees 0..lmax; imaginary parts are zero.
inline FieldFile to_field_file(const PointCloud& p) {
  p.validate();
  FieldFile f;
  f.space = "R3points";
  f.channels = p.channels;
  f.positions = p.positions;
  for (int l = 0; l <= p.lmax; ++l) f.field_orders.push_back(l);
  f.dim = (p.lmax + 1) * (p.lmax + 1);
  f.data.assign(static_cast<std::size_t>(f.channels) * p.size() * f.dim, cd{});
  for (int c = 0; c < p.channels; ++c)
    for (int n = 0; n < p.size(); ++n)
      for (int l = 0; l <= p.lmax; ++l)
        for (int m = 0; m < 2 * l + 1; ++m) f.at(c, n, l * l + m) = p.features[n][l](m, c);
  return f;
}

inline PointCloud to_point_cloud(const FieldFile& f) {
  f.validate();
  if (f.space != "R3points") throw FormatError("field 'space': expected R3points for a point cloud");
  const int lmax = static_cast<int>(f.field_orders.size()) - 1;
  for (int l = 0; l <= lmax; ++l)
    if (f.field_orders[l] != l)
      throw FormatError("field 'field_orders': point clouds carry degrees 0..lmax in order");
  if (lmax < 0 || f.dim != (lmax + 1) * (lmax + 1))
    throw FormatError("field 'data': value dimension does not match field_orders");
  PointCloud p = PointCloud::zeros(f.positions, lmax, f.channels);
  for (int c = 0; c < f.channels; ++c)
    for (int n = 0; n < p.size(); ++n)
      for (int l = 0; l <= lmax; ++l)
        for (int m = 0; m < 2 * l + 1; ++m) {
          const cd v = f.at(c, n, l * l + m);
          if (v.imag() != 0.0)
            throw FormatError("field 'data[" + std::to_string(c) + "][" + std::to_string(n) +
                              "]': point features must be real");
          p.features[n][l](m, c) = v.real();
        }
  return p;
}

/// Whitespace-separated x y z per line; blank lines and '#' comments skipped.
/// A leading count line and an element symbol column (as in .xyz files) are accepted.
inline Eigen::MatrixX3d read_xyz_text(const std::string& text) {
  std::vector<std::array<double, 3>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (rows.empty() && tok.size() == 1) continue;  // atom count
    if (tok.size() == 4) tok.erase(tok.begin());      // element symbol
    if (tok.size() != 3)
      throw FormatError("line " + std::to_string(lineno) + ": expected 3 coordinates, got " +
                        std::to_string(tok.size()) + " fields");
    static const char* names[] = {"x", "y", "z"};
    std::array<double, 3> r{};
    for (int k = 0; k < 3; ++k) r[k] = detail::csv_number(tok[k], lineno, names[k]);
    rows.push_back(r);
  }
  Eigen::MatrixX3d pos(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < 3; ++k) pos(i, k) = rows[i][k];
  return pos;
}

inline Eigen::MatrixX3d read_xyz(const std::string& path) {
  try {
    return read_xyz_text(detail::read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Other JSON forms

inline json to_json(const QuadratureGrid& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    if (g.space == Space::SO3) nodes.push_back({n[0], n[1], n[2]});
    else if (g.space == Space::S2) nodes.push_back({n[0], n[1]});
    else nodes.push_back(n[0]);
  }
  return {{"space", std::string(to_string(g.space))},
          {"bandwidth", g.bandwidth},
          {"side", g.side()},
          {"nodes", std::move(nodes)},
          {"weights", g.weights}};
}

inline QuadratureGrid grid_from_json(const json& j) {
  const json& s = detail::member(j, "space", "grid");
  if (!s.is_string()) throw FormatError("grid: field 'space' must be a string");
  try {
    return quadrature_grid(space_from_string(s.get<std::string>()),
                           detail::get_int(j, "bandwidth", "grid"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("grid: ") + e.what());
  }
}

/// {bandwidth, channels, column, blocks: [channel][l] -> (2l+1)^2 rows of [re, im]}.
inline json to_json(const SpectralBlocks& s) {
  json blocks = json::array();
  for (int c = 0; c < s.channels; ++c) {
    json per = json::array();
    for (int l = 0; l < s.bandwidth; ++l) per.push_back(detail::matrix_json(s.block(c, l)));
    blocks.push_back(std::move(per));
  }
  json j{{"bandwidth", s.bandwidth}, {"channels", s.channels}, {"blocks", std::move(blocks)}};
  j["column"] = s.column ? json(*s.column) : json(nullptr);
  return j;
}

inline SpectralBlocks spectral_from_json(const json& j) {
  const int b = detail::get_int(j, "bandwidth", "spectrum");
  const int ch = detail::get_int(j, "channels", "spectrum");
  if (b < 1 || ch < 1) throw FormatError("spectrum: bandwidth and channels must be >= 1");
  SpectralBlocks s = SpectralBlocks::zeros(b, ch);
  const json& col = detail::member(j, "column", "spectrum");
  if (col.is_number_integer()) s.column = col.get<int>();
  else if (!col.is_null()) throw FormatError("spectrum: field 'column' must be an integer or null");
  const json& blocks = detail::array_of(detail::member(j, "blocks", "spectrum"), ch, "spectrum 'blocks'");
  for (int c = 0; c < ch; ++c) {
    const std::string wc = "spectrum 'blocks[" + std::to_string(c) + "]'";
    detail::array_of(blocks[c], b, wc);
    for (int l = 0; l < b; ++l)
      s.block(c, l) = detail::matrix_from(blocks[c][l], 2 * l + 1, 2 * l + 1,
                                          wc + "[" + std::to_string(l) + "]");
  }
  return s;
}

/// {m_in, m_out, B, in_channels, out_channels, coeffs: [o * in_channels + i] -> [[re, im] per degree from lmin]}.
inline json to_json(const SparseKernelSpec& k) {
  k.validate();
  json coeffs = json::array();
  for (int o = 0; o < k.out_channels; ++o)
    for (int i = 0; i < k.in_channels; ++i) {
      json per = json::array();
      for (const cd& z : k.coeffs[o][i]) per.push_back(detail::complex_json(z));
      coeffs.push_back(std::move(per));
    }
  return {{"m_in", k.m_in},
          {"m_out", k.m_out},
          {"B", k.bandwidth},
          {"in_channels", k.in_channels},
          {"out_channels", k.out_channels},
          {"coeffs", std::move(coeffs)}};
}

inline SparseKernelSpec kernel_from_json(const json& j) {
  const std::string w = "kernel";
  SparseKernelSpec k;
  try {
    k = SparseKernelSpec::zeros(detail::get_int(j, "m_in", w), detail::get_int(j, "m_out", w),
                                detail::get_int(j, "B", w), detail::get_int(j, "in_channels", w),
                                detail::get_int(j, "out_channels", w));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("kernel: ") + e.what());
  }
  const json& coeffs = detail::array_of(detail::member(j, "coeffs", w),
                                        static_cast<std::size_t>(k.out_channels) * k.in_channels,
                                        "kernel 'coeffs'");
  for (int o = 0; o < k.out_channels; ++o)
    for (int i = 0; i < k.in_channels; ++i) {
      const std::size_t p = static_cast<std::size_t>(o) * k.in_channels + i;
      const std::string wp = "kernel 'coeffs[" + std::to_string(p) + "]'";
      detail::array_of(coeffs[p], k.dimension(), wp);
      for (int d = 0; d < k.dimension(); ++d)
        k.coeffs[o][i][d] = detail::complex_from(coeffs[p][d], wp + "[" + std::to_string(d) + "]");
    }
  return k;
}

/// {kind, layers: [{weight: rows, bias: [...]}]}.
inline json to_json(const ActivationSpec& a) {
  json layers = json::array();
  for (const auto& ly : a.layers) {
    std::vector<double> bias(ly.bias.data(), ly.bias.data() + ly.bias.size());
    layers.push_back({{"weight", detail::real_matrix_json(ly.weight)}, {"bias", bias}});
  }
  return {{"kind", std::string(to_string(a.kind))}, {"layers", std::move(layers)}};
}

inline ActivationSpec activation_from_json(const json& j) {
  const json& kind = detail::member(j, "kind", "activation");
  if (!kind.is_string()) throw FormatError("activation: field 'kind' must be a string");
  ActivationSpec a;
  try {
    a.kind = activation_from_string(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("activation: ") + e.what());
  }
  if (j.contains("layers")) {
    const json& layers = j["layers"];
    if (!layers.is_array()) throw FormatError("activation: field 'layers' must be an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string w = "activation 'layers[" + std::to_string(i) + "]'";
      MlpLayer ly;
      ly.weight = detail::real_matrix_from(detail::member(layers[i], "weight", w), w + ".weight");
      const json& b = detail::member(layers[i], "bias", w);
      detail::array_of(b, ly.weight.rows(), w + ".bias");
      ly.bias.resize(ly.weight.rows());
      for (Eigen::Index r = 0; r < ly.bias.size(); ++r) ly.bias(r) = detail::get_real(b[r], w + ".bias");
      a.layers.push_back(std::move(ly));
    }
  }
  return a;
}

}  // namespace homharm
