#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "cyclebench/csv.hpp"

using namespace cyclebench;

TEST_CASE("split_line keeps empty fields") {
    CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(csv::split_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(csv::split_line("a,") == std::vector<std::string>{"a", ""});
    CHECK(csv::split_line("solo") == std::vector<std::string>{"solo"});
}

TEST_CASE("read parses header, rows and line numbers") {
    std::istringstream in("date,close\n\n2000-01-03,100.5\r\n2000-01-04,101\n");
    const csv::Table t = csv::read(in);
    REQUIRE(t.header == std::vector<std::string>{"date", "close"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"2000-01-03", "100.5"});
    CHECK(t.rows[1] == std::vector<std::string>{"2000-01-04", "101"});
    // blank line skipped, numbering stays tied to the file
    CHECK(t.line_numbers == std::vector<int>{3, 4});
}

TEST_CASE("read_file throws on a missing path") {
    CHECK_THROWS_AS(csv::read_file("/nonexistent/x.csv"), std::runtime_error);
}

TEST_CASE("column_index finds exact names only") {
    std::istringstream in("date,mkt_rf,rf\n");
    const csv::Table t = csv::read(in);
    CHECK(csv::column_index(t, "date") == 0);
    CHECK(csv::column_index(t, "mkt_rf") == 1);
    CHECK(csv::column_index(t, "rf") == 2);
    CHECK(csv::column_index(t, "close") == -1);
    CHECK(csv::column_index(t, "RF") == -1);
}

TEST_CASE("to_double parses and reports context") {
    CHECK(csv::to_double("1.5", "x") == doctest::Approx(1.5));
    CHECK(csv::to_double("-2e-3", "x") == doctest::Approx(-0.002));
    CHECK_THROWS_WITH_AS(csv::to_double("abc", "line 7 of p.csv"),
                         doctest::Contains("line 7 of p.csv"), std::invalid_argument);
    CHECK_THROWS_AS(csv::to_double("", "x"), std::invalid_argument);
}

TEST_CASE("format_double round trips exactly") {
    const double cases[] = {0.0,       -0.0,   0.5,         0.1,    1.0 / 3.0, 2.0 / 3.0,
                            1e300,     5e-324, 123456789.123456789, -17.25, 252.0,
                            0.0052117, 1e-9,   6.02214076e23};
    for (double v : cases) {
        const std::string s = csv::format_double(v);
        char* end = nullptr;
        const double back = std::strtod(s.c_str(), &end);
        CHECK(*end == '\0');
        CHECK(back == v);
    }
    CHECK(csv::format_double(std::nan("")) == "nan");
    CHECK(csv::format_double(0.5) == "0.5");
    CHECK(csv::format_double(2.0) == "2");
}
