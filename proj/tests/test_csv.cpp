#include "blockcov/csv.hpp"
#include "blockcov/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

using namespace blockcov;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "blockcov_test_csv";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("write then read is exact") {
  Eigen::MatrixXd m(3, 2);
  m << 0.1, -1e-300, 1.0 / 3.0, 12345678.9, -0.0, std::numeric_limits<double>::max();
  const auto p = scratch("round.csv");
  csv::write_matrix(p, m);
  const auto t = csv::read_matrix(p, false);
  CHECK(t.header.empty());
  CHECK(t.values == m);
}

TEST_CASE("header row") {
  const auto p = scratch("header.csv");
  write_text(p, "a,b,c\n1,2,3\n\n4,5,6\n");
  const auto t = csv::read_matrix(p, true);
  REQUIRE(t.header.size() == 3);
  CHECK(t.header[1] == "b");
  CHECK(t.values.rows() == 2);
  CHECK(t.values(1, 2) == 6.0);

  const std::vector<std::string> names{"x", "y"};
  csv::write_matrix(p, Eigen::MatrixXd::Ones(1, 2), names);
  const auto again = csv::read_matrix(p, true);
  CHECK(again.header == names);
}

TEST_CASE("malformed input reports the position") {
  const auto p = scratch("bad.csv");
  write_text(p, "1,2\n3,oops\n");
  try {
    csv::read_matrix(p, false);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2:") != std::string::npos);
  }
  write_text(p, "1,2\n3\n");
  CHECK_THROWS_AS(csv::read_matrix(p, false), IoError);
  write_text(p, "1,nan\n");
  CHECK_THROWS_AS(csv::read_matrix(p, false), IoError);
  CHECK_THROWS_AS(csv::read_matrix(scratch("missing.csv"), false), IoError);
}

TEST_CASE("shortest round-trip formatting") {
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(1.0) == "1");
  CHECK(csv::format_double(-2.5e-10) == "-2.5e-10");
}

TEST_CASE("single column writer") {
  const auto p = scratch("col.csv");
  const std::vector<int> v{3, 1, 2};
  csv::write_column(p, "order", v);
  std::ifstream in(p);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "order\n3\n1\n2\n");
}
