#include "ecot/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecot::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_line(line);
  for (auto& h : header) h = trim(h);

  bool has_label_column = !header.empty() && header.back() == "label";
  std::size_t d = header.size() - (has_label_column ? 1 : 0);
  if (d == 0) throw std::runtime_error(path + ": no feature columns");
  for (std::size_t c = 0; c < d; ++c) {
    std::string expected = "f" + std::to_string(c + 1);
    if (header[c] != expected) {
      throw std::runtime_error(path + ": expected header column '" + expected +
                               "', found '" + header[c] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t labeled_cells = 0;
  std::size_t row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row_number) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " +
                               std::to_string(header.size()));
    }
    std::vector<double> row(d);
    for (std::size_t c = 0; c < d; ++c) {
      std::string cell = trim(cells[c]);
      if (cell.empty()) {
        throw std::runtime_error(path + ": missing value at row " +
                                 std::to_string(row_number) + ", column " +
                                 header[c]);
      }
      char* end = nullptr;
      errno = 0;
      double v = std::strtod(cell.c_str(), &end);
      if (errno != 0 || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw std::runtime_error(path + ": bad value '" + cell + "' at row " +
                                 std::to_string(row_number) + ", column " +
                                 header[c]);
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
    if (has_label_column) {
      std::string cell = trim(cells[d]);
      if (cell.empty()) {
        labels.push_back(-1);
      } else if (cell == "0" || cell == "1") {
        labels.push_back(cell == "1" ? 1 : 0);
        ++labeled_cells;
      } else {
        throw std::runtime_error(path + ": label must be 0 or 1 at row " +
                                 std::to_string(row_number));
      }
    }
  }

  Dataset out;
  out.features = Matrix::from_rows(rows);
  if (has_label_column && labeled_cells > 0) {
    if (labeled_cells != labels.size()) {
      throw std::runtime_error(path + ": label column is partially filled");
    }
    out.labels = std::move(labels);
  }
  return out;
}

void write_dataset_csv(const std::string& path, const Matrix& features,
                       const std::vector<int>* labels) {
  std::string content;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    if (c) content += ',';
    content += "f" + std::to_string(c + 1);
  }
  if (labels) content += ",label";
  content += '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto r = features.row(i);
    for (std::size_t c = 0; c < features.cols(); ++c) {
      if (c) content += ',';
      content += format_double(r[c]);
    }
    if (labels) content += "," + std::to_string((*labels)[i]);
    content += '\n';
  }
  write_text_atomic(path, content);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " +
                             std::strerror(errno));
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ecot::io
