#include <doctest.h>

#include <cmath>
#include <limits>

#include "tabml/rng.hpp"
#include "tabml/text.hpp"

using namespace tabml;

TEST_CASE("split keeps empty fields") {
    const auto f = split("a,,b,", ',');
    REQUIRE(f.size() == 4);
    CHECK(f[0] == "a");
    CHECK(f[1].empty());
    CHECK(f[3].empty());
}

TEST_CASE("split_lines strips carriage returns") {
    const auto l = split_lines("x\r\ny\n");
    REQUIRE(l.size() >= 2);
    CHECK(l[0] == "x");
    CHECK(l[1] == "y");
}

TEST_CASE("format_number round-trips") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double x = (rng.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(rng.uniform_index(30)) - 15.0);
        const auto back = parse_number(format_number(x));
        REQUIRE(back);
        CHECK(*back == x);
    }
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(97.35) == "97.35");
}

TEST_CASE("parse_number is strict") {
    CHECK_FALSE(parse_number("1.5x"));
    CHECK_FALSE(parse_number(""));
    CHECK_FALSE(parse_number("nan"));
    CHECK_FALSE(parse_number("inf"));
    CHECK(parse_number("+2") == 2.0);
    CHECK(parse_integer("12") == 12);
    CHECK_FALSE(parse_integer("1.0"));
}

TEST_CASE("rng is reproducible and unbiased enough") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(9);
    std::vector<int> hist(6, 0);
    for (int i = 0; i < 60000; ++i) ++hist[r.uniform_index(6)];
    for (int h : hist) CHECK(std::abs(h - 10000) < 500);
    double sum = 0, sq = 0;
    for (int i = 0; i < 50000; ++i) {
        const double x = r.normal(2.0, 3.0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / 50000, var = sq / 50000 - mean * mean;
    CHECK(std::abs(mean - 2.0) < 0.1);
    CHECK(std::abs(std::sqrt(var) - 3.0) < 0.1);
}
