#pragma once

#include <stdexcept>
#include <string>

namespace lmaudit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A domain value violates one of its invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Malformed input document (HAR, plan, scenario, config).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Filesystem or transport-level failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Raised before network I/O when a request would exceed the query budget.
class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(const std::string& what) : Error(what) {}
};

/// A plan cannot be executed as written (unbound host, unresolved placeholder).
class PlanError : public Error {
 public:
  explicit PlanError(const std::string& what) : Error(what) {}
};

}  // namespace lmaudit
