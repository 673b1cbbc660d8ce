#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecot/core.hpp"

namespace ecot::io {

struct Dataset {
  Matrix features;
  std::optional<std::vector<int>> labels;  // present when a label column has values
};

// CSV schema: header row with feature columns f1..fd and an optional
// trailing `label` column holding 0/1 (labeled files) or nothing (test
// files). Ragged rows and non-numeric or missing feature cells are errors
// that name the offending row and column.
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(const std::string& path, const Matrix& features,
                       const std::vector<int>* labels = nullptr);

// Shortest representation that round-trips a double (up to 17 significant
// digits).
std::string format_double(double value);

// Write-temp-then-rename so readers never observe partial files.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

}  // namespace ecot::io
