#pragma once

#include <stdexcept>
#include <string>

namespace sprobe {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Binary or text file does not conform to its documented layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure, always carrying the offending path.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Linear system is singular where a unique solution was required.
class RankDeficientError : public Error {
public:
    using Error::Error;
};

/// A theoretical bound was exceeded by an empirical residual.
class BoundViolation : public Error {
public:
    using Error::Error;
};

}  // namespace sprobe
