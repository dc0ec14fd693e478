#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gpbound/gp.hpp"

namespace gpbound {

// Header block written into every artifact so a result file identifies the
// schema, configuration and randomness that produced it.
struct Manifest {
  std::string schema;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> provenance;  // "constant=how it was obtained"

  // "key: value" lines, ready to be prefixed as comments.
  std::vector<std::string> lines() const;
};

// Shortest-round-trip style decimal rendering (17 significant digits).
std::string format_double(double value);

// CSV with '#'-prefixed manifest lines, then a header row, then data rows.
void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& rows, const Manifest& manifest);

// Dataset columns are x_1..x_d, y.
void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXd& targets, const Manifest& manifest);

// Reads a dataset CSV (comment lines allowed anywhere, header row required);
// the noise variance is not part of the file and is supplied by the caller.
Dataset read_dataset_csv(const std::string& path, double noise_variance);

}  // namespace gpbound
