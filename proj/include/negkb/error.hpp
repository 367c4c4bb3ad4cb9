#pragma once

#include <stdexcept>
#include <string>

namespace negkb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// More than the tolerated share of rows in an input file were malformed.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class UnknownConceptError : public Error {
 public:
  explicit UnknownConceptError(const std::string& concept_name)
      : Error("unknown concept: " + concept_name), concept_(concept_name) {}
  const std::string& concept_name() const { return concept_; }

 private:
  std::string concept_;
};

class UndefinedFrequencyError : public Error {
 public:
  using Error::Error;
};

class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

// Any failure of an external inference backend (cache or remote).
class ProviderError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class MalformedProbeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IncompatibleRunError : public Error {
 public:
  using Error::Error;
};

}  // namespace negkb
