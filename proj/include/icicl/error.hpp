#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icicl {

/// Base of every error raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON or YAML input. Line and column are 1-based.
class syntax_error : public error {
  public:
    syntax_error(const std::string& message, std::size_t line, std::size_t column)
        : error("syntax error at line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

class unsupported_version : public error {
  public:
    using error::error;
};

class empty_corpus : public error {
  public:
    using error::error;
};

class empty_bank : public error {
  public:
    using error::error;
};

/// A bank file line failed validation.
class corrupt_bank : public error {
  public:
    corrupt_bank(std::size_t line, const std::string& why)
        : error("corrupt bank at line " + std::to_string(line) + ": " + why), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class insufficient_bank : public error {
  public:
    using error::error;
};

/// Transport-level failure talking to a backend (after retries).
class backend_unavailable : public error {
  public:
    using error::error;
};

/// The backend answered with a non-success status.
class backend_rejected : public error {
  public:
    backend_rejected(int status, const std::string& body_excerpt)
        : error("backend rejected request with status " + std::to_string(status) + ": " +
                body_excerpt),
          status_(status),
          body_excerpt_(body_excerpt) {}

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

  private:
    int status_;
    std::string body_excerpt_;
};

class all_calls_failed : public error {
  public:
    using error::error;
};

class greedy_missing : public error {
  public:
    using error::error;
};

class dimension_mismatch : public error {
  public:
    dimension_mismatch(std::size_t lhs, std::size_t rhs)
        : error("embedding dimension mismatch: " + std::to_string(lhs) + " vs " +
                std::to_string(rhs)) {}
};

class pointer_miss : public error {
  public:
    explicit pointer_miss(const std::string& pointer)
        : error("pointer does not resolve: " + pointer), pointer_(pointer) {}

    const std::string& pointer() const noexcept { return pointer_; }

  private:
    std::string pointer_;
};

class path_collision : public error {
  public:
    explicit path_collision(const std::string& path)
        : error("overload path already exists: " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

class malformed_labels : public error {
  public:
    malformed_labels(std::size_t line, const std::string& why)
        : error("malformed labels at line " + std::to_string(line) + ": " + why), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class config_error : public error {
  public:
    using error::error;
};

}  // namespace icicl
