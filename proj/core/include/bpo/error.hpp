#pragma once

#include <stdexcept>
#include <string>

namespace bpo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad token id, shape mismatch...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// NaN or Inf showed up in a loss, objective, gradient or parameter.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { BadMagic, Corrupt, DimsMismatch, Io };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace bpo
