#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "rwot/io.hpp"

using namespace rwot;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("rwot_io_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

ErrorCode code_of(const std::string& text) {
  try {
    parse_distribution(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kInvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_distribution(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("single atom file is a Dirac mass") {
  const DiscreteDistribution d = parse_distribution("w,x1\n1.0,0.0\n");
  CHECK(d.size() == 1);
  CHECK(d.dim() == 1);
  CHECK(d.weights()(0) == 1.0);
  CHECK(d.points()(0, 0) == 0.0);
}

TEST_CASE("weights within tolerance are renormalized") {
  const DiscreteDistribution d = parse_distribution("w,x1\n0.5,0\n0.5000000001,1\n");
  CHECK(d.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(code_of("w,x1\n0.5,0\n0.6,1\n") == ErrorCode::kWeightError);
}

TEST_CASE("invalid weights") {
  CHECK(code_of("w,x1\n-0.5,0\n1.5,1\n") == ErrorCode::kWeightError);
  CHECK(code_of("w,x1\n0,0\n1,1\n") == ErrorCode::kWeightError);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(code_of("") == ErrorCode::kParseError);
  CHECK(code_of("x,y\n1,0\n") == ErrorCode::kParseError);
  CHECK(message_of("w,x1\n1,0\n").empty());
  const std::string text = "w,x1,x2\n0.5,0,1\n0.25,abc,1\n0.25,1,1\n";
  CHECK(code_of(text) == ErrorCode::kParseError);
  CHECK(message_of(text).find("line 3") != std::string::npos);
  CHECK(message_of("w,x1,x2\n0.5,0,1\n0.5,1\n").find("line 3") != std::string::npos);
}

TEST_CASE("duplicate atoms are merged") {
  const DiscreteDistribution d = parse_distribution("w,x1\n0.25,1\n0.5,2\n0.25,1\n");
  CHECK(d.size() == 2);
}

TEST_CASE("save then load round-trips to 1e-15") {
  TempDir dir;
  Rng rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.1, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + rep % 7, d = 1 + rep % 3;
    PointMatrix x(n, d);
    Vector a(n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) x(i, k) = u(rng);
      a(i) = w(rng);
    }
    const DiscreteDistribution p(x, a / a.sum());
    save_distribution(dir.file("p.csv"), p);
    const DiscreteDistribution q = load_distribution(dir.file("p.csv"));
    REQUIRE(q.size() == p.size());
    REQUIRE(q.dim() == p.dim());
    CHECK((q.points() - p.points()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((q.weights() - p.weights()).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("missing file is an IO error") {
  try {
    load_distribution("/nonexistent/rwot/p.csv");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("matrix and plan files") {
  TempDir dir;
  {
    std::ofstream out(dir.file("a.csv"));
    out << "2,0.5\n0.5,1\n";
  }
  const Matrix a = load_matrix(dir.file("a.csv"));
  CHECK(a.rows() == 2);
  CHECK(a(0, 1) == 0.5);
  {
    std::ofstream out(dir.file("b.csv"));
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(load_matrix(dir.file("b.csv")), Error);

  TransportPlan plan;
  plan.mass = Matrix::Zero(2, 2);
  plan.mass(0, 1) = 0.5;
  plan.mass(1, 0) = 0.5;
  save_plan(dir.file("plan.csv"), plan);
  std::ifstream in(dir.file("plan.csv"));
  std::string header, l1, l2, rest;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(header == "i,j,mass");
  CHECK(l1 == "0,1,0.5");
  CHECK(l2 == "1,0,0.5");
  CHECK_FALSE(std::getline(in, rest));
}
