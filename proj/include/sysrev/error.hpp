#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sysrev {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable name used in CLI and HTTP error payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// -- graph loading ----------------------------------------------------------

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& detail)
      : Error("MalformedLine", "line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class DanglingEdge : public Error {
 public:
  DanglingEdge(std::string source, std::string target)
      : Error("DanglingEdge", "dangling edge " + source + " -> " + target),
        source_(std::move(source)),
        target_(std::move(target)) {}
  const std::string& source() const noexcept { return source_; }
  const std::string& target() const noexcept { return target_; }

 private:
  std::string source_;
  std::string target_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id) : Error("DuplicateId", "duplicate concept id " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnknownConcept : public Error {
 public:
  explicit UnknownConcept(const std::string& id) : Error("UnknownConcept", "unknown concept " + id) {}
};

// -- providers and numerics -------------------------------------------------

class ProviderUnavailable : public Error {
 public:
  explicit ProviderUnavailable(const std::string& what) : Error("ProviderUnavailable", what) {}
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : Error("DimensionMismatch", "vector dimensions differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

// -- queries ----------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string expected)
      : Error("ParseError", "at position " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class EmptyExpansion : public Error {
 public:
  explicit EmptyExpansion(const std::string& what = "expansion set has no entries")
      : Error("EmptyExpansion", what) {}
};

class InvalidQuery : public Error {
 public:
  explicit InvalidQuery(const std::string& what) : Error("InvalidQuery", what) {}
};

// -- retrieval --------------------------------------------------------------

class BackendError : public Error {
 public:
  BackendError(int status, const std::string& body_excerpt)
      : BackendError("BackendError", status, body_excerpt) {}
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_; }

 protected:
  BackendError(std::string kind, int status, const std::string& body_excerpt)
      : Error(std::move(kind), "backend status " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        body_(body_excerpt) {}

 private:
  int status_;
  std::string body_;
};

class RateLimited : public BackendError {
 public:
  RateLimited(int status, const std::string& body_excerpt) : BackendError("RateLimited", status, body_excerpt) {}
};

// -- feedback ---------------------------------------------------------------

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& query_id) : Error("UnknownSession", "unknown session " + query_id) {}
};

class StorageError : public Error {
 public:
  explicit StorageError(const std::string& what) : Error("StorageError", what) {}
};

// -- service ----------------------------------------------------------------

/// Request or record failed validation; `field()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error("ValidationError", field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sysrev
