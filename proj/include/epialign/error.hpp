#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace epialign {

/// Violated precondition of a library call (caller bug, not bad data).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Base for recoverable errors caused by inputs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input. Binary readers attach the byte offset of the problem.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::optional<std::uint64_t> offset() const { return offset_; }

private:
    std::optional<std::uint64_t> offset_;
};

class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// The data is well-formed but cannot support the requested computation
/// (e.g. all training targets equal, too few aligned test days).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace epialign
