#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpbound/csv.hpp"

using namespace gpbound;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

Manifest test_manifest() {
  Manifest manifest;
  manifest.schema = "gpbound-test-v1";
  manifest.config_hash = "fnv1a64:0123456789abcdef";
  manifest.seed = 11;
  manifest.provenance = {"kernel=configured"};
  return manifest;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file.good());
  return std::string(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("doubles format to full precision and parse back exactly") {
  for (const double value : {0.1, 1.0 / 3.0, -2.5e-300, 1.7e300, 81.0, 0.0, -0.0,
                             0.30000000000000004}) {
    CAPTURE(value);
    CHECK(std::stod(format_double(value)) == value);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("tables write a manifest header and their rows") {
  const auto path = temp_file("gpbound_table_test.csv");
  Eigen::MatrixXd rows(2, 3);
  rows << 1.0, 0.5, -2.0, 4.0, 1.0 / 3.0, 9.0;
  write_table_csv(path.string(), {"a", "b", "c"}, rows, test_manifest());
  const std::string text = slurp(path);
  CHECK(text.rfind("# schema: gpbound-test-v1", 0) == 0);
  CHECK(text.find("# config_hash: fnv1a64:0123456789abcdef") != std::string::npos);
  CHECK(text.find("# seed: 11") != std::string::npos);
  CHECK(text.find("# provenance: kernel=configured") != std::string::npos);
  CHECK(text.find("a,b,c\n") != std::string::npos);
  CHECK(text.find("1,0.5,-2\n") != std::string::npos);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(write_table_csv(path.string(), {"a", "b"}, rows, test_manifest()),
                  std::invalid_argument);
}

TEST_CASE("datasets round trip through csv exactly") {
  const auto path = temp_file("gpbound_dataset_test.csv");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  Eigen::MatrixXd inputs(17, 3);
  Eigen::VectorXd targets(17);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) inputs(i, j) = unit(rng);
    targets[i] = unit(rng);
  }
  write_dataset_csv(path.string(), inputs, targets, test_manifest());
  const Dataset loaded = read_dataset_csv(path.string(), 0.25);
  CHECK(loaded.noise_variance == 0.25);
  REQUIRE(loaded.size() == 17);
  REQUIRE(loaded.dimension() == 3);
  CHECK((loaded.inputs - inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.targets - targets).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("dataset reader rejects malformed files with line numbers") {
  const auto path = temp_file("gpbound_bad_dataset.csv");
  const auto write_file = [&](const std::string& content) {
    std::ofstream file(path);
    file << content;
  };

  write_file("# comment\nx_1,z\n0.0,1.0\n");
  CHECK_THROWS_AS(read_dataset_csv(path.string(), 0.01), std::runtime_error);

  write_file("x_1,y\n0.0\n");
  const std::string short_row = [&] {
    try {
      read_dataset_csv(path.string(), 0.01);
    } catch (const std::exception& error) {
      return std::string(error.what());
    }
    return std::string();
  }();
  CHECK(short_row.find(":2:") != std::string::npos);

  write_file("x_1,y\n0.0,banana\n");
  CHECK_THROWS_AS(read_dataset_csv(path.string(), 0.01), std::runtime_error);

  write_file("x_1,y\n\n# trailing comment\n0.5,1.5\n");
  const Dataset tolerant = read_dataset_csv(path.string(), 0.01);
  CHECK(tolerant.size() == 1);
  CHECK(tolerant.inputs(0, 0) == 0.5);
  CHECK(tolerant.targets[0] == 1.5);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_dataset_csv((temp_file("gpbound_missing.csv")).string(), 0.01),
                  std::runtime_error);
}
