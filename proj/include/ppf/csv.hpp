#pragma once

#include <string>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/types.hpp"

namespace ppf {

// Raw parsed CSV: header plus string cells (RFC-4180 quoting, UTF-8,
// comma separator, decimal-point reals).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

// Loads a labeled dataset. label_column is a header name, or when no
// header matches and the string is an integer, a 0-based column index.
// Every other column must parse as a finite real; rows with any
// unparsable predictor cell are an error, not skipped.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Loads a label-free matrix (prediction input). Column order must match
// var_names when provided.
Matrix load_matrix_csv(const std::string& path, const std::vector<std::string>& expect_columns);

// Writers used for every tabular artifact (results, diagnostics). Values
// are printed with round-trip precision so reruns are byte-comparable.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string format_double(double v);

}  // namespace ppf
