#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cayley {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCategory {
  kUsage,      // invalid dimensions, bad configuration
  kInput,      // unreadable or malformed files, points outside a map's domain
  kNumerical,  // conditioning or factorization failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Dimension or configuration mismatch.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::kUsage, what) {}
};

/// A point lies outside the domain (or image set) of the map being applied.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::kInput, what) {}
};

/// Ill-conditioned solve or failed factorization.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::kNumerical, what) {}
};

/// Malformed or unreadable input file.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCategory::kInput, what) {}
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kInput:
      return "input";
    case ErrorCategory::kNumerical:
      return "numerical";
  }
  return "unknown";
}

}  // namespace cayley
