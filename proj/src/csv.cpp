#include "ppf/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "ppf/errors.hpp"

namespace ppf {

namespace {

// Splits one physical CSV record; supports RFC-4180 double-quote quoting.
std::vector<std::string> split_record(const std::string& line, const std::string& path) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) fail(Errc::parse, path + ": unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0' && std::isfinite(out);
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, path + ": cannot open");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, path + ": empty file (missing header)");
  t.header = split_record(strip_cr(line), path);
  if (t.header.empty() || (t.header.size() == 1 && t.header[0].empty()))
    fail(Errc::parse, path + ": missing header");
  {
    std::set<std::string> seen;
    for (const auto& h : t.header) {
      if (!seen.insert(h).second) fail(Errc::parse, path + ": duplicate header column '" + h + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;  // tolerate trailing blank lines
    auto cells = split_record(line, path);
    if (cells.size() != t.header.size())
      fail(Errc::parse, path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace {
int find_label_column(const CsvTable& t, const std::string& label_column, const std::string& path) {
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == label_column) return static_cast<int>(j);
  }
  // Fall back to a 0-based index for headerless-style references.
  int idx = -1;
  const auto [p, ec] = std::from_chars(label_column.data(),
                                       label_column.data() + label_column.size(), idx);
  if (ec == std::errc{} && p == label_column.data() + label_column.size() && idx >= 0 &&
      idx < static_cast<int>(t.header.size()))
    return idx;
  fail(Errc::parse, path + ": label column '" + label_column + "' not found");
}
}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  const CsvTable t = read_csv(path);
  const int label_idx = find_label_column(t, label_column, path);
  const int p = static_cast<int>(t.header.size()) - 1;
  if (p < 1) fail(Errc::parse, path + ": no predictor columns");
  const int n = static_cast<int>(t.rows.size());
  if (n < 1) fail(Errc::parse, path + ": no data rows");

  Dataset d;
  d.var_names.reserve(p);
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (static_cast<int>(j) != label_idx) d.var_names.push_back(t.header[j]);
  }

  // Class ids by lexicographic order of the distinct label strings.
  std::map<std::string, int> class_id;
  for (const auto& row : t.rows) class_id[row[label_idx]];
  int next_id = 0;
  for (auto& [name, id] : class_id) id = next_id++;
  if (class_id.size() < 2) fail(Errc::parse, path + ": fewer than 2 classes");

  d.class_names.resize(class_id.size());
  for (const auto& [name, id] : class_id) d.class_names[id] = name;

  d.predictors.resize(n, p);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    d.labels[i] = class_id.at(row[label_idx]);
    int jj = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (static_cast<int>(j) == label_idx) continue;
      double v = 0.0;
      if (!parse_double(row[j], v))
        fail(Errc::parse, path + ": row " + std::to_string(i + 2) + ", column '" +
                              t.header[j] + "': non-numeric value '" + row[j] + "'");
      d.predictors(i, jj++) = v;
    }
  }
  d.recount_classes();
  return d;
}

Matrix load_matrix_csv(const std::string& path, const std::vector<std::string>& expect_columns) {
  const CsvTable t = read_csv(path);
  std::vector<int> order;
  if (expect_columns.empty()) {
    for (std::size_t j = 0; j < t.header.size(); ++j) order.push_back(static_cast<int>(j));
  } else {
    for (const auto& name : expect_columns) {
      const auto it = std::find(t.header.begin(), t.header.end(), name);
      if (it == t.header.end())
        fail(Errc::mismatch, path + ": required column '" + name + "' missing");
      order.push_back(static_cast<int>(it - t.header.begin()));
    }
  }
  Matrix x(static_cast<int>(t.rows.size()), static_cast<int>(order.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < order.size(); ++j) {
      double v = 0.0;
      if (!parse_double(t.rows[i][order[j]], v))
        fail(Errc::parse, path + ": row " + std::to_string(i + 2) + ": non-numeric value '" +
                              t.rows[i][order[j]] + "'");
      x(static_cast<int>(i), static_cast<int>(j)) = v;
    }
  }
  return x;
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same double, so
  // repeated runs produce byte-identical files.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {
bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}
}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, path + ": cannot write");
  const auto emit_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out << ',';
      if (needs_quoting(cells[j])) {
        out << '"';
        for (const char c : cells[j]) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << cells[j];
      }
    }
    out << '\n';
  };
  emit_row(header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) fail(Errc::internal, path + ": ragged CSV row");
    emit_row(row);
  }
  if (!out) fail(Errc::io, path + ": write failed");
}

}  // namespace ppf
