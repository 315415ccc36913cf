#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hpe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// Non-positive distance passed to the crop-size computation.
class InvalidDistanceError : public Error {
public:
    using Error::Error;
};

class EmptyCropError : public Error {
public:
    using Error::Error;
};

/// Raised when a depth patch has no usable variation (empty or constant foreground).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class BehindCameraError : public Error {
public:
    using Error::Error;
};

/// Binary decoding failure; carries the byte offset where decoding stopped.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class CheckpointVersionError : public Error {
public:
    using Error::Error;
};

class CheckpointCorruptError : public Error {
public:
    using Error::Error;
};

}  // namespace hpe
