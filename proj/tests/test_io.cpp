#include <iterexp/io.hpp>

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace iterexp::io;

TEST_CASE("parse_complex: accepted literal forms") {
    CHECK(parse_complex("2") == std::complex<double>{2, 0});
    CHECK(parse_complex("-3.5") == std::complex<double>{-3.5, 0});
    CHECK(parse_complex(".5") == std::complex<double>{0.5, 0});
    CHECK(parse_complex("3.14e2") == std::complex<double>{314, 0});
    CHECK(parse_complex("2i") == std::complex<double>{0, 2});
    CHECK(parse_complex("-0.5i") == std::complex<double>{0, -0.5});
    CHECK(parse_complex("1+2i") == std::complex<double>{1, 2});
    CHECK(parse_complex("1-2i") == std::complex<double>{1, -2});
    CHECK(parse_complex("1.5e-3+2.5e-4i") == std::complex<double>{1.5e-3, 2.5e-4});
    CHECK(parse_complex(" 1 + 2i ") == std::complex<double>{1, 2});
    CHECK(parse_complex("-1-1i") == std::complex<double>{-1, -1});
}

TEST_CASE("parse_complex: rejected forms") {
    CHECK_THROWS_AS(parse_complex(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("i"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("1+i"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("2ii"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("1+2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("1 2i"), std::invalid_argument);
}

TEST_CASE("format_double: 17 significant digits round-trip exactly") {
    // strtod instead of stod: the latter throws on subnormal results.
    for (double v : {1.0 / 3.0, std::numbers::pi, 1e-308, -2.718281828459045,
                     123456789.123456789, 5e-324}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("format_complex parses back") {
    std::complex<double> z{1.0 / 3.0, -std::numbers::pi};
    CHECK(parse_complex(format_complex(z)) == z);
    CHECK(parse_complex(format_complex({2.0, 0.0})) == std::complex<double>{2, 0});
}
