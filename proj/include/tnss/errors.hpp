#pragma once

#include <stdexcept>
#include <string>

namespace tnss {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape, order, or bond-consistency violation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A fit produced non-finite values.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Prompt template with an unresolved placeholder.
class TemplateError : public Error {
public:
    using Error::Error;
};

/// Malformed model reply.
class ParseError : public Error {
public:
    enum class Kind { NoRanksLine, WrongArity, NotInteger, OutOfBounds };

    ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Missing, truncated, or otherwise unreadable files.
class IoError : public Error {
public:
    using Error::Error;
};

/// HTTP transport or status failure.
class HttpError : public Error {
public:
    explicit HttpError(const std::string& what, int status = 0) : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// Authentication rejected by the endpoint.
class AuthError : public HttpError {
public:
    using HttpError::HttpError;
};

}  // namespace tnss
