#ifndef SDGEN_TEXTIO_HPP
#define SDGEN_TEXTIO_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdgen {

// Formats a double with 17 significant digits, enough for an exact
// binary round trip through text.
std::string format_full(double v);

// Writes the entries of a row (or vector) space-separated at full precision.
void write_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Splits a line on whitespace and parses every token as double.
// `where` names the file/line for error messages.
std::vector<double> parse_double_row(const std::string& line, const std::string& where);

double parse_double(const std::string& token, const std::string& where);
long parse_long(const std::string& token, const std::string& where);

// 64-bit FNV-1a, used for config hashes and parameter fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);

// splitmix64: cheap seed derivation for independent RNG streams.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace sdgen

#endif
