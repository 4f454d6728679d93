#pragma once

#include <complex>
#include <string>

namespace iterexp::io {

/// Parses the complex literal forms `a`, `ai`, `a+bi`, `a-bi` (optional
/// whitespace, scientific notation allowed). Throws std::invalid_argument
/// on anything else.
std::complex<double> parse_complex(const std::string& text);

/// Shortest representation that round-trips a double exactly (%.17g).
std::string format_double(double v);

std::string format_complex(std::complex<double> z);

} // namespace iterexp::io
