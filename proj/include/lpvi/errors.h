#pragma once

#include <stdexcept>
#include <string>

namespace lpvi {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TagMismatchError : public Error {
 public:
  using Error::Error;
};

// vee() on a matrix outside the algebra image.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Path or layout dimensions inconsistent with the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Retraction inverse evaluated outside its injectivity region.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Control basis sections not pointwise independent.
class IllPosedBasisError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Non-finite numbers where finite ones are required.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int index)
      : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace lpvi
