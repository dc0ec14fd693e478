#include "gpbound/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpbound/version.hpp"

namespace gpbound {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("csv: cannot open " + path + " for writing");
  }
  return file;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& text) {
  size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<std::string> Manifest::lines() const {
  std::vector<std::string> out;
  out.push_back("schema: " + schema);
  out.push_back(std::string("tool: ") + kToolName + " " + kToolVersion);
  out.push_back("config_hash: " + config_hash);
  out.push_back("seed: " + std::to_string(seed));
  for (const auto& entry : provenance) out.push_back("provenance: " + entry);
  return out;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& rows, const Manifest& manifest) {
  if (static_cast<Eigen::Index>(columns.size()) != rows.cols()) {
    throw std::invalid_argument("csv: column name count does not match the data width");
  }
  auto file = open_for_write(path);
  for (const auto& line : manifest.lines()) file << "# " << line << "\n";
  file << join(columns, ",") << "\n";
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j > 0) file << ",";
      file << format_double(rows(i, j));
    }
    file << "\n";
  }
  if (!file) {
    throw std::runtime_error("csv: write to " + path + " failed");
  }
}

void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXd& targets, const Manifest& manifest) {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("csv: input rows and target count differ");
  }
  std::vector<std::string> columns;
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    columns.push_back("x_" + std::to_string(j + 1));
  }
  columns.push_back("y");
  Eigen::MatrixXd rows(inputs.rows(), inputs.cols() + 1);
  rows.leftCols(inputs.cols()) = inputs;
  rows.col(inputs.cols()) = targets;
  write_table_csv(path, columns, rows, manifest);
}

Dataset read_dataset_csv(const std::string& path, double noise_variance) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("csv: cannot open " + path);
  }
  std::string line;
  int line_number = 0;
  int dimension = -1;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(file, line)) {
    ++line_number;
    const std::string text = strip(line);
    if (text.empty() || text[0] == '#') continue;
    const std::vector<std::string> fields = split_line(text);
    if (!header_seen) {
      if (fields.size() < 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                 ": header must list x_1..x_d and y");
      }
      for (size_t j = 0; j + 1 < fields.size(); ++j) {
        const std::string expected = "x_" + std::to_string(j + 1);
        if (strip(fields[j]) != expected) {
          throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                   ": expected header column " + expected + ", found " +
                                   strip(fields[j]));
        }
      }
      if (strip(fields.back()) != "y") {
        throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                 ": last header column must be y");
      }
      dimension = static_cast<int>(fields.size()) - 1;
      header_seen = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != dimension + 1) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": expected " +
                               std::to_string(dimension + 1) + " fields, found " +
                               std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (size_t j = 0; j < fields.size(); ++j) {
      const std::string field = strip(fields[j]);
      size_t consumed = 0;
      try {
        row[j] = std::stod(field, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != field.size() || field.empty()) {
        throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                 ": cannot parse number from \"" + field + "\"");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw std::runtime_error(path + ": missing header row");
  }
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), dimension);
  data.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dimension; ++j) data.inputs(static_cast<Eigen::Index>(i), j) = rows[i][j];
    data.targets[static_cast<Eigen::Index>(i)] = rows[i][dimension];
  }
  data.noise_variance = noise_variance;
  data.validate();
  return data;
}

}  // namespace gpbound
