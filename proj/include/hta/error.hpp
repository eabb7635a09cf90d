#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hta {

// Non-finite or out-of-range numeric argument.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation called on an object that is not in a usable state (empty model, empty gallery).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed or inconsistent user input (files, frame order, flags).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace hta
