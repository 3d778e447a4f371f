#pragma once

#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>

namespace vattr {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an interface contract (shape mismatch, wrong rank, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A numeric parameter is out of its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A computation produced a non-finite value.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Malformed persisted file.
class FormatError : public Error {
 public:
  FormatError(const std::string& field, const std::string& detail)
      : Error("format error in field '" + field + "': " + detail), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// The requested method needs a capability the scorer does not provide.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Exceptions must not escape an OpenMP region; worker threads record the
// first one here and the caller rethrows it after the loop.
class FirstException {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace vattr
