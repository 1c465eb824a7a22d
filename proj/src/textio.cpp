#include "sdgen/textio.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "sdgen/error.hpp"

namespace sdgen {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        if (i > 0) os << ' ';
        os << format_full(row[i]);
    }
    os << '\n';
}

std::vector<double> parse_double_row(const std::string& line, const std::string& where) {
    std::vector<double> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, where));
    return out;
}

double parse_double(const std::string& token, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw ParseError(where + ": expected a number, got '" + token + "'");
    return v;
}

long parse_long(const std::string& token, const std::string& where) {
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0')
        throw ParseError(where + ": expected an integer, got '" + token + "'");
    return v;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    return fnv1a(s.data(), s.size(), seed);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

}  // namespace sdgen
