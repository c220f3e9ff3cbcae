#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cftc {

/// Base class for every failure raised by the library. The message is the
/// stable, user-facing description (e.g. "binding mismatch").
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the formula and model parsers. Carries a 1-based location.
class ParseError : public Error
{
public:
    ParseError( const std::string& what, std::size_t line, std::size_t column )
        : Error( "line " + std::to_string( line ) + ", column " + std::to_string( column ) + ": " + what ),
          line_{ line }, column_{ column }
    {
    }

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace cftc
