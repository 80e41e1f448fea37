#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "distances.hpp"
#include "graph.hpp"

namespace margot {

// 17 significant digits round-trip a double exactly.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r' && ch != ' ' && ch != '\t') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

inline bool parse_node_id(const std::string& s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

// Reads all rows, skipping blank lines and one optional non-numeric header.
inline std::vector<std::vector<std::string>> read_csv_rows(
    const std::string& path, std::size_t min_cols, const char* what) {
  std::ifstream in(path);
  if (!in)
    throw InputError(std::string("cannot open ") + what + " file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (first) {
      first = false;
      double probe;
      if (!parse_double(cells[0], probe)) continue;
    }
    if (cells.size() < min_cols)
      throw InputError(std::string(what) + " file " + path +
                       ": expected at least " + std::to_string(min_cols) +
                       " columns, got " + std::to_string(cells.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline long long require_node_id(const std::string& cell,
                                 const std::string& path, const char* what) {
  long long id;
  if (!parse_node_id(cell, id))
    throw InputError(std::string(what) + " file " + path +
                     ": bad node id '" + cell + "'");
  return id;
}

inline double require_double(const std::string& cell, const std::string& path,
                             const char* what) {
  double v;
  if (!parse_double(cell, v))
    throw InputError(std::string(what) + " file " + path + ": bad number '" +
                     cell + "'");
  return v;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  return out;
}

} // namespace detail

// Columns: src,dst,affinity,cost.
inline std::vector<Edge> read_edge_csv(const std::string& path) {
  std::vector<Edge> edges;
  for (const auto& row : detail::read_csv_rows(path, 4, "edge")) {
    Edge e;
    e.src = detail::require_node_id(row[0], path, "edge");
    e.dst = detail::require_node_id(row[1], path, "edge");
    e.affinity = detail::require_double(row[2], path, "edge");
    e.cost = detail::require_double(row[3], path, "edge");
    edges.push_back(e);
  }
  return edges;
}

// Columns: node,sigma_in,sigma_out; missing nodes get zero mass.
inline std::pair<Vector, Vector> read_margin_csv(const std::string& path,
                                                 Index n) {
  Vector sigma_in = Vector::Zero(n), sigma_out = Vector::Zero(n);
  for (const auto& row : detail::read_csv_rows(path, 3, "margin")) {
    const long long id = detail::require_node_id(row[0], path, "margin");
    if (id < 1 || id > n)
      throw InputError("margin file " + path + ": node id " +
                       std::to_string(id) + " outside 1.." + std::to_string(n));
    sigma_in(id - 1) = detail::require_double(row[1], path, "margin");
    sigma_out(id - 1) = detail::require_double(row[2], path, "margin");
  }
  return {std::move(sigma_in), std::move(sigma_out)};
}

// Columns: node,weight; missing nodes get zero weight (rejected downstream).
inline Vector read_weight_csv(const std::string& path, Index n) {
  Vector w = Vector::Zero(n);
  for (const auto& row : detail::read_csv_rows(path, 2, "weight")) {
    const long long id = detail::require_node_id(row[0], path, "weight");
    if (id < 1 || id > n)
      throw InputError("weight file " + path + ": node id " +
                       std::to_string(id) + " outside 1.." + std::to_string(n));
    w(id - 1) = detail::require_double(row[1], path, "weight");
  }
  return w;
}

// Columns: node,group,membership with 1-based group ids.
inline Matrix read_group_csv(const std::string& path, Index n) {
  struct Entry {
    long long node, group;
    double value;
  };
  std::vector<Entry> entries;
  long long max_group = 0;
  for (const auto& row : detail::read_csv_rows(path, 3, "group")) {
    Entry e;
    e.node = detail::require_node_id(row[0], path, "group");
    e.group = detail::require_node_id(row[1], path, "group");
    e.value = detail::require_double(row[2], path, "group");
    if (e.node < 1 || e.node > n)
      throw InputError("group file " + path + ": node id " +
                       std::to_string(e.node) + " outside 1.." +
                       std::to_string(n));
    if (e.group < 1)
      throw InputError("group file " + path + ": group ids must be >= 1");
    max_group = std::max(max_group, e.group);
    entries.push_back(e);
  }
  if (entries.empty())
    throw InputError("group file " + path + ": no membership rows");
  Matrix membership = Matrix::Zero(n, max_group);
  for (const Entry& e : entries)
    membership(e.node - 1, e.group - 1) = e.value;
  return membership;
}

// Sparse nonzero dump, columns i,j,value with 1-based ids.
inline void write_entries_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = detail::open_output(path);
  out << "i,j,value\n";
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        out << (i + 1) << ',' << (j + 1) << ',' << fmt17(m(i, j)) << '\n';
  if (!out) throw InputError("write failed: " + path);
}

inline Matrix read_entries_csv(const std::string& path, Index rows,
                               Index cols) {
  Matrix m = Matrix::Zero(rows, cols);
  for (const auto& row : detail::read_csv_rows(path, 3, "matrix")) {
    const long long i = detail::require_node_id(row[0], path, "matrix");
    const long long j = detail::require_node_id(row[1], path, "matrix");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw InputError("matrix file " + path + ": entry (" +
                       std::to_string(i) + "," + std::to_string(j) +
                       ") out of range");
    m(i - 1, j - 1) = detail::require_double(row[2], path, "matrix");
  }
  return m;
}

inline void write_vector_csv(const std::string& path, const Vector& v,
                             const std::string& value_name) {
  std::ofstream out = detail::open_output(path);
  out << "node," << value_name << '\n';
  for (Index i = 0; i < v.size(); ++i)
    out << (i + 1) << ',' << fmt17(v(i)) << '\n';
  if (!out) throw InputError("write failed: " + path);
}

inline Vector read_vector_csv(const std::string& path, Index n) {
  Vector v = Vector::Zero(n);
  for (const auto& row : detail::read_csv_rows(path, 2, "vector")) {
    const long long id = detail::require_node_id(row[0], path, "vector");
    if (id < 1 || id > n)
      throw InputError("vector file " + path + ": node id " +
                       std::to_string(id) + " outside 1.." + std::to_string(n));
    v(id - 1) = detail::require_double(row[1], path, "vector");
  }
  return v;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out = detail::open_output(path);
  out << content;
  if (!out) throw InputError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

} // namespace margot
