#include <iterexp/io.hpp>

#include <cstdio>
#include <regex>
#include <stdexcept>

namespace iterexp::io {

std::complex<double> parse_complex(const std::string& text) {
    // Accepted forms: a, ai, a+bi, a-bi; whitespace only at the ends and
    // around the separating sign.
    static const std::string mag = "(?:\\d+\\.?\\d*|\\.\\d+)(?:[eE][+-]?\\d+)?";
    static const std::string num = "[+-]?" + mag;
    static const std::regex real_only("^\\s*(" + num + ")\\s*$");
    static const std::regex imag_only("^\\s*(" + num + ")i\\s*$");
    static const std::regex full("^\\s*(" + num + ")\\s*([+-])\\s*(" + mag + ")i\\s*$");

    std::smatch m;
    if (std::regex_match(text, m, real_only)) return {std::stod(m[1]), 0.0};
    if (std::regex_match(text, m, imag_only)) return {0.0, std::stod(m[1])};
    if (std::regex_match(text, m, full)) {
        double im = std::stod(m[3]);
        return {std::stod(m[1]), m[2] == "-" ? -im : im};
    }
    throw std::invalid_argument("cannot parse complex literal: " + text);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_complex(std::complex<double> z) {
    std::string s = format_double(z.real());
    s += z.imag() < 0 ? "-" : "+";
    s += format_double(std::abs(z.imag()));
    s += "i";
    return s;
}

} // namespace iterexp::io
