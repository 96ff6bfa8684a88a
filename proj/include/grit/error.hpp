#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grit {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by malformed or inconsistent input data (CLI exit code 1).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Errors caused by invalid configuration or usage (CLI exit code 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public DataError {
  public:
    explicit IoError(std::string const& path, std::string const& what)
        : DataError(path + ": " + what), m_path(path)
    {}
    [[nodiscard]] std::string const& path() const noexcept { return m_path; }

  private:
    std::string m_path;
};

class FormatError : public DataError {
  public:
    FormatError(std::size_t line, std::string reason)
        : DataError("line " + std::to_string(line) + ": " + reason),
          m_line(line),
          m_reason(std::move(reason))
    {}
    [[nodiscard]] std::size_t line() const noexcept { return m_line; }
    [[nodiscard]] std::string const& reason() const noexcept { return m_reason; }

  private:
    std::size_t m_line;
    std::string m_reason;
};

class DuplicateId : public DataError {
  public:
    DuplicateId(std::string id, std::size_t line)
        : DataError("line " + std::to_string(line) + ": duplicate product id '" + id + "'"),
          m_id(std::move(id)),
          m_line(line)
    {}
    [[nodiscard]] std::string const& id() const noexcept { return m_id; }
    [[nodiscard]] std::size_t line() const noexcept { return m_line; }

  private:
    std::string m_id;
    std::size_t m_line;
};

class UnknownLabel : public DataError {
  public:
    explicit UnknownLabel(std::string token)
        : DataError("unknown relevance label '" + token + "'"), m_token(std::move(token))
    {}
    [[nodiscard]] std::string const& token() const noexcept { return m_token; }

  private:
    std::string m_token;
};

class ConflictingDuplicate : public DataError {
  public:
    ConflictingDuplicate(std::string query_id, std::string product_id, std::size_t line)
        : DataError(
            "line " + std::to_string(line) + ": conflicting labels for query '" + query_id
            + "' and product '" + product_id + "'"),
          m_query_id(std::move(query_id)),
          m_product_id(std::move(product_id))
    {}
    [[nodiscard]] std::string const& query_id() const noexcept { return m_query_id; }
    [[nodiscard]] std::string const& product_id() const noexcept { return m_product_id; }

  private:
    std::string m_query_id;
    std::string m_product_id;
};

class RankGap : public DataError {
  public:
    explicit RankGap(std::string query_id)
        : DataError("ranks for query '" + query_id + "' are not contiguous from 1"),
          m_query_id(std::move(query_id))
    {}
    [[nodiscard]] std::string const& query_id() const noexcept { return m_query_id; }

  private:
    std::string m_query_id;
};

class DuplicateDoc : public DataError {
  public:
    DuplicateDoc(std::string query_id, std::string product_id)
        : DataError(
            "product '" + product_id + "' appears more than once for query '" + query_id + "'"),
          m_query_id(std::move(query_id)),
          m_product_id(std::move(product_id))
    {}
    [[nodiscard]] std::string const& query_id() const noexcept { return m_query_id; }
    [[nodiscard]] std::string const& product_id() const noexcept { return m_product_id; }

  private:
    std::string m_query_id;
    std::string m_product_id;
};

class EmptyCatalog : public DataError {
  public:
    EmptyCatalog() : DataError("cannot build an index over an empty catalog") {}
};

class MismatchedQuerySets : public DataError {
  public:
    using DataError::DataError;
};

class TooFewSamples : public DataError {
  public:
    explicit TooFewSamples(std::size_t count)
        : DataError(
            "paired t-test needs at least 2 samples, got " + std::to_string(count))
    {}
};

/// Transport or wire-format failure of a text-generation backend.
class BackendError : public Error {
  public:
    explicit BackendError(std::string const& what, std::size_t attempt = 0)
        : Error(attempt == 0 ? what : "attempt " + std::to_string(attempt) + ": " + what),
          m_attempt(attempt)
    {}
    [[nodiscard]] std::size_t attempt() const noexcept { return m_attempt; }

  private:
    std::size_t m_attempt;
};

class UnparsableVerdict : public Error {
  public:
    explicit UnparsableVerdict(std::string response)
        : Error("validator answered neither yes nor no: '" + response + "'"),
          m_response(std::move(response))
    {}
    [[nodiscard]] std::string const& response() const noexcept { return m_response; }

  private:
    std::string m_response;
};

}  // namespace grit
