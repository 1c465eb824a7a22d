#ifndef SDGEN_ERROR_HPP
#define SDGEN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sdgen {

// All failures surface as one of these categories. The CLI maps them to a
// one-line "error: <category>: <message>" report and a nonzero exit code.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error("shape", msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("parse", msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("numeric", msg) {}
};

struct InputError : Error {
    explicit InputError(const std::string& msg) : Error("input", msg) {}
};

struct LookupError : Error {
    explicit LookupError(const std::string& msg) : Error("lookup", msg) {}
};

struct CoverageError : Error {
    explicit CoverageError(const std::string& msg) : Error("coverage", msg) {}
};

}  // namespace sdgen

#endif
