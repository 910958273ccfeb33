#pragma once

#include <stdexcept>
#include <string>

namespace chronoqa {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

class MalformedTimestamp : public Error {
public:
    explicit MalformedTimestamp(const std::string& text)
        : Error("malformed timestamp: \"" + text + "\""), text_(text) {}
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(message) {}
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& reason)
        : Error("line " + std::to_string(line_no) + ": " + reason), line_no_(line_no) {}
    std::size_t line_no() const { return line_no_; }

private:
    std::size_t line_no_;
};

class EmbedderUnavailable : public Error {
public:
    explicit EmbedderUnavailable(const std::string& message) : Error(message) {}
};

class FixtureMiss : public Error {
public:
    explicit FixtureMiss(const std::string& request_hash)
        : Error("no fixture entry for request " + request_hash), request_hash_(request_hash) {}
    const std::string& request_hash() const { return request_hash_; }

private:
    std::string request_hash_;
};

class CacheMiss : public Error {
public:
    explicit CacheMiss(const std::string& request_hash)
        : Error("no cached response for request " + request_hash), request_hash_(request_hash) {}
    const std::string& request_hash() const { return request_hash_; }

private:
    std::string request_hash_;
};

class ApiError : public Error {
public:
    ApiError(const std::string& message, int status, int retries)
        : Error(message + " (status " + std::to_string(status) + " after " +
                std::to_string(retries) + " retries)"),
          status_(status),
          retries_(retries) {}
    int status() const { return status_; }
    int retries() const { return retries_; }

private:
    int status_;
    int retries_;
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& message) : Error(message) {}
};

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& template_id)
        : Error("unknown prompt template: " + template_id) {}
};

class MalformedDecomposition : public Error {
public:
    explicit MalformedDecomposition(const std::string& reason) : Error(reason) {}
};

class PlaceholderViolation : public Error {
public:
    PlaceholderViolation(int reference, const std::string& question)
        : Error("placeholder #" + std::to_string(reference) +
                " refers to an unavailable sibling answer in \"" + question + "\""),
          reference_(reference) {}
    int reference() const { return reference_; }

private:
    int reference_;
};

class DepthExceeded : public Error {
public:
    explicit DepthExceeded(int max_depth)
        : Error("decomposition tree exceeds maximum depth " + std::to_string(max_depth)) {}
};

class MissingPlaceholderAnswer : public Error {
public:
    explicit MissingPlaceholderAnswer(int reference)
        : Error("no prior answer for placeholder #" + std::to_string(reference)),
          reference_(reference) {}
    int reference() const { return reference_; }

private:
    int reference_;
};

class EmptyRecordSet : public Error {
public:
    explicit EmptyRecordSet(const std::string& what_for)
        : Error("empty record set: " + what_for) {}
};

class UndefinedRecall : public Error {
public:
    UndefinedRecall() : Error("recall undefined: question has no gold fact annotations") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(message) {}
};

}  // namespace chronoqa
