#ifndef UMMC_ERRORS_HPP
#define UMMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ummc {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failure in a text input (trace log, formula, document, PRISM text).
// `position` is a line number for line-oriented inputs and a character
// offset for formula strings; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position = 0)
        : Error(msg), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

}  // namespace ummc

#endif
