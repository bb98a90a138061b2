#include <filesystem>
#include <random>

#include <doctest.h>

#include "fkn/errors.hpp"
#include "fkn/io.hpp"
#include "fkn/svg.hpp"

using namespace fkn;
namespace fs = std::filesystem;

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(io::parse_double(io::format_double(x), 1) == x);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(2) == "2");
}

TEST_CASE("parse_double") {
  CHECK(io::parse_double("1e-3", 1) == 1e-3);
  CHECK(io::parse_double("-2.5", 1) == -2.5);
  CHECK_THROWS_WITH_AS(io::parse_double("abc", 7), doctest::Contains("line 7"), ParseError);
  CHECK_THROWS_AS(io::parse_double("inf", 1), ParseError);
  CHECK_THROWS_AS(io::parse_double("nan", 1), ParseError);
  CHECK_THROWS_AS(io::parse_double("1.5x", 1), ParseError);
  CHECK_THROWS_AS(io::parse_double("", 1), ParseError);
}

TEST_CASE("split") {
  CHECK(io::split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(io::split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("atomic write and CSV table") {
  const fs::path p = fs::temp_directory_path() / "fkn_test_table.csv";
  io::write_file_atomic(p, "# note\nx,y\n1,2\n3,4.5\n");
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
  const io::CsvTable t = io::read_csv_table(p);
  CHECK(t.comments == std::vector<std::string>{"# note"});
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  CHECK(t.column("y") == 1);
  CHECK(t.column("z") == -1);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == 4.5);

  io::write_file_atomic(p, "x,y\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(io::read_csv_table(p), doctest::Contains("line 3"), ParseError);
  fs::remove(p);
  CHECK_THROWS_AS(io::read_csv_table(p), ParseError);
}

TEST_CASE("nice_ticks") {
  CHECK(svg::nice_ticks(0, 1) == std::vector<double>{0, 0.2, 0.4, 0.6, 0.8, 1});
  CHECK(svg::nice_ticks(0.013, 97.2) == std::vector<double>{20, 40, 60, 80});
  CHECK(svg::nice_ticks(-0.03, 0.07) == std::vector<double>{-0.02, 0, 0.02, 0.04, 0.06});
  CHECK_FALSE(svg::nice_ticks(5, 5).empty());
}

TEST_CASE("line_chart") {
  svg::Series a{"train", {1, 2, 3}, {0.5, 0.25, 0.125}, false};
  svg::Series b{"val", {1, 2, 3}, {0.6, 0.3, 0.2}, true};
  const std::string s1 = svg::line_chart({a, b}, {"RMSE", "epoch", "rmse", false});
  const std::string s2 = svg::line_chart({a, b}, {"RMSE", "epoch", "rmse", false});
  CHECK(s1 == s2);
  CHECK(s1.rfind("<svg", 0) == 0);
  CHECK(s1.find("viewBox=\"0 0 960 540\"") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = s1.find("<polyline"); pos != std::string::npos; pos = s1.find("<polyline", pos + 1))
    ++polylines;
  CHECK(polylines == 2);
  CHECK(s1.find("stroke-dasharray") != std::string::npos);
  CHECK(s1.find(">train<") != std::string::npos);

  svg::Series zero{"with zero", {1, 2, 3}, {0, 1e-3, 1e-2}, false};
  const std::string log = svg::line_chart({zero}, {"log", "x", "y", true});
  CHECK(log.find("nan") == std::string::npos);
  CHECK(log.find("inf") == std::string::npos);
}
