#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polythresh/errors.hpp"
#include "polythresh/io.hpp"
#include "polythresh/stats.hpp"

using namespace polythresh;

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  CHECK(std::stod(format_double(M_PI)) == M_PI);
}

TEST_CASE("json output") {
  nlohmann::ordered_json j;
  j["b"] = 0.1;
  j["a"] = json_number(INFINITY);
  j["c"] = json_number(NAN);
  j["d"] = json_number(std::optional<double>{});
  j["e"] = nlohmann::ordered_json::array({1, 2.5});
  j["s"] = "x\"y";
  CHECK(dump_json(j) == R"({"b":0.10000000000000001,"a":"inf","c":null,"d":null,"e":[1,2.5],"s":"x\"y"})");
}

TEST_CASE("statistics helpers") {
  const auto w = wilson_interval(0, 100);
  CHECK(w.lower() >= -1e-15);
  CHECK(w.upper() > 0.0);
  const auto h = wilson_interval(50, 100);
  CHECK(h.center == doctest::Approx(0.5));
  CHECK(h.half_width == doctest::Approx(0.0960).epsilon(0.01));
  const double v[] = {1, 2, 3, 4};
  CHECK(pairwise_sum(v) == 10.0);
  const auto ms = mean_se(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("csv writers") {
  std::ostringstream os;
  CramerEval e;
  e.x = 0.5;
  e.lambda_star = 0.25;
  e.h_of_x = 1;
  e.tail_m = 2;
  e.ratio = NAN;
  write_cramer_table(os, {e});
  CHECK(os.str() == "x,lambda_star,h,m,ratio\n0.5,0.25,1,2,nan\n");
}

TEST_CASE("plot data") {
  const auto path = std::filesystem::temp_directory_path() / "polythresh_plot_test.txt";
  SweepGrid empty;
  CHECK_THROWS_AS(emit_plot_data(empty, 0.7, std::nullopt, path), ValidationError);

  SweepGrid one;
  SweepRow row;
  row.rho = 0.5;
  row.mean = 0.4;
  row.ci_half = 0.01;
  one.rows.push_back(row);
  emit_plot_data(one, 0.7, std::nullopt, path, "hello");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "# hello\n# curve: rho mean ci_half\n0.5 0.40000000000000002 0.01\n\n\n"
                    "# reference: label rho\nt1 0.69999999999999996\n");
  std::filesystem::remove(path);
}
